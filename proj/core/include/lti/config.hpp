#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lti {

/// Line-oriented key=value settings. Blank lines and lines starting with
/// '#' are ignored; whitespace around keys and values is trimmed.
class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<string>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list, entries trimmed, empty entries dropped.
    std::vector<std::string> get_list(const std::string& key) const;

    /// Throws ConfigError naming the first key not in `known`.
    void require_known(std::initializer_list<std::string_view> known) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

private:
    std::string source_;
    std::map<std::string, std::string> values_;
};

} // namespace lti
