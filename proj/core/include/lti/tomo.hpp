#pragma once

#include <lti/image.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace lti {

constexpr double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

/// Parallel-beam acquisition restricted to the angular range [-phi, phi].
///
/// Projection angle theta is the normal direction of the integration line
/// L(theta, s) = { x : x1 cos(theta) + x2 sin(theta) = s }. Angles are
/// sampled uniformly with both endpoints included. Detector bins are
/// centered on s = (j - (count - 1) / 2) * spacing.
struct ScanGeometry {
    double half_angle = 0.0; ///< phi in radians, (0, pi/2]
    std::size_t angle_count = 0;
    std::size_t detector_count = 0;
    double detector_spacing = 1.0;

    /// Geometry for an n x n image: one projection per degree unless
    /// `angle_count` is given, and an odd detector count covering the
    /// image diagonal at unit detector spacing (in pixel units).
    static ScanGeometry for_image(std::size_t n, double half_angle, std::size_t angle_count = 0,
                                  double pixel_spacing = 1.0);

    std::vector<double> angles() const;
    double detector_position(std::size_t bin) const noexcept;

    /// Throws ConfigError when phi, angle count or detector layout are invalid.
    void validate() const;

    bool operator==(const ScanGeometry&) const = default;
};

/// Angle x detector array of line integrals.
class Sinogram {
public:
    Sinogram() = default;
    explicit Sinogram(const ScanGeometry& geometry, double value = 0.0);

    const ScanGeometry& geometry() const noexcept { return geometry_; }
    std::size_t angle_count() const noexcept { return geometry_.angle_count; }
    std::size_t detector_count() const noexcept { return geometry_.detector_count; }

    double& operator()(std::size_t angle, std::size_t bin) noexcept {
        return data_[angle * geometry_.detector_count + bin];
    }
    double operator()(std::size_t angle, std::size_t bin) const noexcept {
        return data_[angle * geometry_.detector_count + bin];
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

private:
    ScanGeometry geometry_{};
    std::vector<double> data_;
};

enum class FilterKind { RamLak, SheppLogan };

struct NoiseSpec {
    double relative_level = 0.01; ///< std as a fraction of mean |clean sinogram|
    std::uint64_t seed = 0;
};

/// Calls `visit(pixel_index, length)` for every pixel the line L(theta, s)
/// crosses in an n x n grid centered at the origin. Lengths are exact
/// pixel-intersection lengths (Siddon). A line running exactly along a
/// pixel boundary is split evenly between the two neighbouring pixels.
void trace_ray(std::size_t n, double pixel_spacing, double theta, double s,
               const std::function<void(std::size_t, double)>& visit);

/// Precomputed ray-driven projector. The adjoint applies the transpose of
/// the very same sparse matrix, so <A f, g> = <f, A^T g> holds to rounding.
class RadonOperator {
public:
    RadonOperator(std::size_t n, const ScanGeometry& geometry, double pixel_spacing = 1.0);

    std::size_t image_size() const noexcept { return n_; }
    double pixel_spacing() const noexcept { return pixel_spacing_; }
    const ScanGeometry& geometry() const noexcept { return geometry_; }
    std::size_t ray_count() const noexcept { return row_start_.size() - 1; }
    std::size_t nonzeros() const noexcept { return columns_.size(); }

    Sinogram forward(const Image& image) const;
    Image adjoint(const Sinogram& sinogram) const;

    void forward(std::span<const double> image, std::span<double> sinogram) const;
    void adjoint(std::span<const double> sinogram, std::span<double> image) const;
    /// out = A^T A x
    void normal(std::span<const double> x, std::span<double> out) const;

    /// Pixel indices touched by one ray, for sparsity inspection.
    std::span<const std::uint32_t> ray_pixels(std::size_t angle, std::size_t bin) const;

private:
    std::size_t n_;
    double pixel_spacing_;
    ScanGeometry geometry_;
    std::vector<std::size_t> row_start_;
    std::vector<std::uint32_t> columns_;
    std::vector<double> weights_;
};

Sinogram radon_forward(const Image& image, const ScanGeometry& geometry);
Image radon_adjoint(const Sinogram& sinogram, const ScanGeometry& geometry, std::size_t n,
                    double pixel_spacing = 1.0);

/// Filtered backprojection: ramp filter (optionally Shepp-Logan windowed)
/// applied in the frequency domain after zero padding to a power of two,
/// then pixel-driven backprojection with linear interpolation and
/// trapezoidal angle weights.
Image fbp(const Sinogram& sinogram, FilterKind filter, std::size_t n, double pixel_spacing = 1.0);

/// Renders the object at the requested resolution over a fixed physical extent.
using PhantomRenderer = std::function<Image(std::size_t resolution)>;

/// Projects the object rendered at `oversample` times the target resolution
/// onto a detector that is `oversample` times finer, averages the sub-bins
/// back to the target grid and adds white Gaussian noise.
Sinogram simulate_measurements(const PhantomRenderer& render, std::size_t n,
                               const ScanGeometry& geometry, const NoiseSpec& noise,
                               unsigned oversample = 2, double pixel_spacing = 1.0);

/// Image variant; the high-resolution rendering is pixel replication.
Sinogram simulate_measurements(const Image& phantom, const ScanGeometry& geometry,
                               const NoiseSpec& noise, unsigned oversample = 2);

void add_gaussian_noise(Sinogram& sinogram, const NoiseSpec& noise);

} // namespace lti
