#pragma once

#include <lti/image.hpp>
#include <lti/tomo.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace lti {

/// Ellipse in pixel units of the reference grid, measured from the image
/// center with y pointing up. Inside the ellipse the intensity is
/// `intensity + gradient . (p - center)`.
struct EllipseSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double semi_axis_a = 1.0;
    double semi_axis_b = 1.0;
    double rotation = 0.0;
    double intensity = 1.0;
    double gradient_x = 0.0;
    double gradient_y = 0.0;

    bool contains(double x, double y) const noexcept;
    double value_at(double x, double y) const noexcept;
    bool operator==(const EllipseSpec&) const = default;
};

struct IntRange {
    int lo;
    int hi;
};

struct RealRange {
    double lo;
    double hi;
};

/// Centered disk of radius radius_frac * n, 2x2 supersampled.
Image make_circle(std::size_t n, double radius_frac, double value);
/// The same disk at any resolution over the n x n extent.
PhantomRenderer circle_renderer(double radius_frac, double value);

/// Paints the ellipses in order (later ones overwrite) on a grid of
/// `resolution` pixels spanning the `n` x `n` reference extent, 2x2
/// supersampled, then clamps into `clamp`.
Image render_ellipses(const std::vector<EllipseSpec>& specs, std::size_t n, std::size_t resolution,
                      RealRange clamp);
PhantomRenderer ellipse_renderer(std::vector<EllipseSpec> specs, std::size_t n, RealRange clamp);

struct EllipsePhantom {
    Image image;
    std::vector<EllipseSpec> specs;
};

struct EllipseOptions {
    IntRange count{3, 10};
    RealRange intensity{0.2, 1.0};
    double max_slope = 0.5; ///< gradient magnitude bound, divided by n
};

/// Random ellipses fully inside the inscribed disk of the image.
std::vector<EllipseSpec> random_ellipse_specs(std::size_t n, std::mt19937_64& rng,
                                              const EllipseOptions& options = {});
EllipsePhantom make_random_ellipses(std::size_t n, std::mt19937_64& rng, const EllipseOptions& options = {});

struct DatasetConfig {
    std::size_t train = 1600;
    std::size_t validation = 200;
    std::size_t test = 200;
    std::uint64_t seed = 0;
    std::size_t image_size = 128;
    EllipseOptions ellipses{};
};

struct DatasetEntry {
    std::uint64_t seed = 0;
    std::vector<EllipseSpec> specs;
};

/// Specs for every image; pixels are rendered on demand.
struct DatasetSplit {
    std::uint64_t seed = 0;
    std::size_t image_size = 0;
    RealRange intensity{0.2, 1.0};
    std::vector<DatasetEntry> train;
    std::vector<DatasetEntry> validation;
    std::vector<DatasetEntry> test;

    Image render(const DatasetEntry& entry) const;
    PhantomRenderer renderer(const DatasetEntry& entry) const;
};

/// Image i of the dataset uses seed splitmix64(seed + i); train, validation
/// and test take consecutive index ranges, so they never share an image.
DatasetSplit make_dataset(const DatasetConfig& config);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Writes one .lti raster per image plus manifest.txt with lines
/// "<relative path> <seed> <split>".
void write_dataset(const DatasetSplit& split, const std::filesystem::path& directory);

struct ManifestLine {
    std::string path;
    std::uint64_t seed;
    std::string split;
};
std::vector<ManifestLine> read_manifest(const std::filesystem::path& file);

} // namespace lti
