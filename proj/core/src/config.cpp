#include <lti/config.hpp>

#include <lti/error.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lti {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

} // namespace

Config Config::parse(std::string_view text, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::size_t lineno = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        cfg.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(source_ + ": missing key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const auto v = get(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(source_ + ": key '" + key + "' is not a number: " + v);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key) const {
    const auto v = get(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(source_ + ": key '" + key + "' is not a nonnegative integer: " + v);
    return out;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_uint(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = get(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(source_ + ": key '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    const std::string value = get(key);
    std::string_view rest = value;
    while (true) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

void Config::require_known(std::initializer_list<std::string_view> known) const {
    for (const auto& [key, value] : values_)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(source_ + ": unknown key '" + key + "'");
}

} // namespace lti
