#include <lti/phantom.hpp>

#include <lti/error.hpp>
#include <lti/tensorio.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lti {

namespace {

// Calls fn(x, y) at the 2x2 subsample positions of pixel (row, col) of a
// `resolution` grid that spans the n x n reference extent.
template <typename Fn>
double supersample(std::size_t row, std::size_t col, std::size_t resolution, double n, Fn&& fn) {
    const double h = n / static_cast<double>(resolution);
    const double half = 0.5 * static_cast<double>(resolution);
    double acc = 0.0;
    for (int sr = 0; sr < 2; ++sr) {
        for (int sc = 0; sc < 2; ++sc) {
            const double x = (static_cast<double>(col) + 0.25 + 0.5 * sc - half) * h;
            const double y = (half - static_cast<double>(row) - 0.25 - 0.5 * sr) * h;
            acc += fn(x, y);
        }
    }
    return 0.25 * acc;
}

} // namespace

bool EllipseSpec::contains(double x, double y) const noexcept {
    const double dx = x - center_x;
    const double dy = y - center_y;
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    const double u = (c * dx + s * dy) / semi_axis_a;
    const double v = (-s * dx + c * dy) / semi_axis_b;
    return u * u + v * v <= 1.0;
}

double EllipseSpec::value_at(double x, double y) const noexcept {
    return intensity + gradient_x * (x - center_x) + gradient_y * (y - center_y);
}

Image make_circle(std::size_t n, double radius_frac, double value) {
    return circle_renderer(radius_frac, value)(n);
}

PhantomRenderer circle_renderer(double radius_frac, double value) {
    if (!(radius_frac > 0.0 && radius_frac < 0.5)) throw ArgumentError("circle radius fraction must be in (0, 0.5)");
    return [radius_frac, value](std::size_t resolution) {
        if (resolution == 0) throw ConfigError("circle: empty image");
        const double n = static_cast<double>(resolution);
        const double r2 = radius_frac * n * radius_frac * n;
        Image img(resolution);
        if (value == 0.0) return img;
        for (std::size_t row = 0; row < resolution; ++row)
            for (std::size_t col = 0; col < resolution; ++col)
                img(row, col) = value * supersample(row, col, resolution, n,
                                                    [r2](double x, double y) { return x * x + y * y <= r2 ? 1.0 : 0.0; });
        return img;
    };
}

Image render_ellipses(const std::vector<EllipseSpec>& specs, std::size_t n, std::size_t resolution,
                      RealRange clamp) {
    if (resolution == 0 || n == 0) throw ConfigError("ellipses: empty image");
    const double scale = static_cast<double>(resolution) / static_cast<double>(n);
    Image img(resolution, 0.0, 1.0 / scale);
    const auto paint = [&specs, clamp](double x, double y) {
        double v = 0.0;
        for (const auto& e : specs)
            if (e.contains(x, y)) v = std::clamp(e.value_at(x, y), clamp.lo, clamp.hi);
        return v;
    };
    for (std::size_t row = 0; row < resolution; ++row)
        for (std::size_t col = 0; col < resolution; ++col)
            img(row, col) = supersample(row, col, resolution, static_cast<double>(n), paint);
    return img;
}

PhantomRenderer ellipse_renderer(std::vector<EllipseSpec> specs, std::size_t n, RealRange clamp) {
    return [specs = std::move(specs), n, clamp](std::size_t resolution) {
        return render_ellipses(specs, n, resolution, clamp);
    };
}

std::vector<EllipseSpec> random_ellipse_specs(std::size_t n, std::mt19937_64& rng, const EllipseOptions& options) {
    if (options.count.lo < 1 || options.count.hi > 20 || options.count.lo > options.count.hi)
        throw ConfigError("ellipse count range must lie within [1, 20]");
    if (!(options.intensity.lo >= 0.0) || options.intensity.lo > options.intensity.hi)
        throw ConfigError("ellipse intensity range must be nonnegative and ordered");
    const double nd = static_cast<double>(n);
    const double support = 0.45 * nd;
    std::uniform_int_distribution<int> count_dist(options.count.lo, options.count.hi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int count = count_dist(rng);
    std::vector<EllipseSpec> specs;
    specs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        EllipseSpec e;
        e.semi_axis_a = nd * (0.03 + 0.22 * unit(rng));
        e.semi_axis_b = nd * (0.03 + 0.22 * unit(rng));
        e.rotation = std::numbers::pi * unit(rng);
        const double reach = support - std::max(e.semi_axis_a, e.semi_axis_b);
        const double rho = reach * std::sqrt(unit(rng));
        const double ang = 2.0 * std::numbers::pi * unit(rng);
        e.center_x = rho * std::cos(ang);
        e.center_y = rho * std::sin(ang);
        e.intensity = options.intensity.lo + (options.intensity.hi - options.intensity.lo) * unit(rng);
        const double slope = options.max_slope / nd * unit(rng);
        const double dir = 2.0 * std::numbers::pi * unit(rng);
        e.gradient_x = slope * std::cos(dir);
        e.gradient_y = slope * std::sin(dir);
        specs.push_back(e);
    }
    return specs;
}

EllipsePhantom make_random_ellipses(std::size_t n, std::mt19937_64& rng, const EllipseOptions& options) {
    EllipsePhantom out;
    out.specs = random_ellipse_specs(n, rng, options);
    out.image = render_ellipses(out.specs, n, n, options.intensity);
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Image DatasetSplit::render(const DatasetEntry& entry) const {
    return render_ellipses(entry.specs, image_size, image_size, intensity);
}

PhantomRenderer DatasetSplit::renderer(const DatasetEntry& entry) const {
    return ellipse_renderer(entry.specs, image_size, intensity);
}

DatasetSplit make_dataset(const DatasetConfig& config) {
    if (config.image_size < 8) throw ConfigError("dataset image size too small");
    DatasetSplit split;
    split.seed = config.seed;
    split.image_size = config.image_size;
    split.intensity = config.ellipses.intensity;
    std::uint64_t index = 0;
    const auto fill = [&](std::vector<DatasetEntry>& list, std::size_t count) {
        list.reserve(count);
        for (std::size_t i = 0; i < count; ++i, ++index) {
            DatasetEntry entry;
            entry.seed = splitmix64(config.seed + index);
            std::mt19937_64 rng(entry.seed);
            entry.specs = random_ellipse_specs(config.image_size, rng, config.ellipses);
            list.push_back(std::move(entry));
        }
    };
    fill(split.train, config.train);
    fill(split.validation, config.validation);
    fill(split.test, config.test);
    return split;
}

void write_dataset(const DatasetSplit& split, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::ofstream manifest(directory / "manifest.txt");
    if (!manifest) throw ConfigError("cannot write manifest in " + directory.string());
    const auto emit = [&](const std::vector<DatasetEntry>& list, const char* name) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string rel = std::string(name) + "_" + std::to_string(i) + ".lti";
            write_tensor(to_tensor_file(split.render(list[i])), directory / rel);
            manifest << rel << ' ' << list[i].seed << ' ' << name << '\n';
        }
    };
    emit(split.train, "train");
    emit(split.validation, "validation");
    emit(split.test, "test");
}

std::vector<ManifestLine> read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open manifest " + file.string());
    std::vector<ManifestLine> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream ss(line);
        ManifestLine m;
        if (!(ss >> m.path >> m.seed >> m.split))
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": malformed manifest line");
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace lti
