#pragma once

#include <lti/image.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lti {

namespace detail {
class Fft2;
}

/// Identifies one subband of a cone-adapted shearlet system.
/// Lowpass: scale -1, shear 0, cone 0. Directional: scale >= 0 (coarse to
/// fine), cone +1 (horizontal) or -1 (vertical), |shear| <= 2^level.
struct SubbandIndex {
    int scale = -1;
    int shear = 0;
    int cone = 0;

    static constexpr SubbandIndex lowpass() noexcept { return {}; }
    constexpr bool is_lowpass() const noexcept { return cone == 0; }
    bool operator==(const SubbandIndex&) const = default;
};

/// H x W x S stack of real coefficients, subband-major, row-major within a
/// subband. Carries subband metadata when produced by a shearlet system and
/// optional per-subband visibility flags (1 = visible).
class CoefficientTensor {
public:
    CoefficientTensor() = default;
    CoefficientTensor(std::size_t height, std::size_t width, std::vector<SubbandIndex> subbands,
                      double value = 0.0);
    /// Plain stack without subband metadata (e.g. gradient channels).
    CoefficientTensor(std::size_t height, std::size_t width, std::size_t count, double value = 0.0);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t subband_count() const noexcept { return count_; }
    std::size_t subband_size() const noexcept { return height_ * width_; }

    const std::vector<SubbandIndex>& subbands() const noexcept { return subbands_; }

    bool has_visibility() const noexcept { return !visible_.empty(); }
    const std::vector<std::uint8_t>& visibility() const noexcept { return visible_; }
    void set_visibility(std::vector<std::uint8_t> flags);
    void clear_visibility() noexcept { visible_.clear(); }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> subband(std::size_t s) noexcept {
        return std::span<double>(data_).subspan(s * subband_size(), subband_size());
    }
    std::span<const double> subband(std::size_t s) const noexcept {
        return std::span<const double>(data_).subspan(s * subband_size(), subband_size());
    }
    double& operator()(std::size_t s, std::size_t row, std::size_t col) noexcept {
        return data_[(s * height_ + row) * width_ + col];
    }
    double operator()(std::size_t s, std::size_t row, std::size_t col) const noexcept {
        return data_[(s * height_ + row) * width_ + col];
    }

    bool same_shape(const CoefficientTensor& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && count_ == other.count_;
    }

    bool operator==(const CoefficientTensor&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t count_ = 0;
    std::vector<SubbandIndex> subbands_;
    std::vector<std::uint8_t> visible_;
    std::vector<double> data_;
};

/// Bandlimited cone-adapted discrete shearlet system on an n x n grid.
///
/// Windows are real, even and built in the frequency domain from Meyer-type
/// profiles: separable squares for the scales and shifted angular bumps in
/// the slope variable for the shears. Each cone keeps its own seam
/// shearlets (|shear| = 2^level) cut at the diagonal, which matches the
/// index ranges of the cone-adapted definition and gives a partition
/// sum_c |w_c|^2 = 1 at every frequency sample, i.e. a Parseval frame.
///
/// Subband order: lowpass, then scales coarse to fine; within a scale the
/// horizontal cone with ascending shear, then the vertical cone with
/// ascending shear.
class ShearletSystem {
public:
    /// `shearing_levels` has one entry per scale, coarse to fine.
    ShearletSystem(std::size_t n, std::vector<int> shearing_levels);

    /// Five-scale configuration with 59 subbands.
    static std::vector<int> reference_levels();
    /// Finest `scale_count(n)` entries of the reference configuration.
    static std::vector<int> default_levels(std::size_t n);
    static std::size_t default_scale_count(std::size_t n);
    static std::size_t count_subbands(std::span<const int> shearing_levels) noexcept;

    std::size_t size() const noexcept { return n_; }
    std::size_t scale_count() const noexcept { return levels_.size(); }
    std::size_t subband_count() const noexcept { return subbands_.size(); }
    const std::vector<int>& shearing_levels() const noexcept { return levels_; }
    const std::vector<SubbandIndex>& subbands() const noexcept { return subbands_; }
    std::size_t index_of(const SubbandIndex& idx) const;
    /// Positions of the directional subbands of scale j in the subband list.
    std::vector<std::size_t> scale_members(int scale) const;

    /// Half-spectrum layout: n rows by n/2 + 1 columns (FFTW r2c order).
    std::size_t spectrum_width() const noexcept { return n_ / 2 + 1; }
    std::span<const double> window(std::size_t s) const noexcept {
        const std::size_t len = n_ * spectrum_width();
        return std::span<const double>(windows_).subspan(s * len, len);
    }
    /// Physical frequency (xi_x, xi_y) of a half-spectrum sample, with x
    /// pointing along columns and y pointing up (decreasing row index).
    std::pair<double, double> frequency(std::size_t row, std::size_t col) const noexcept;

    CoefficientTensor make_tensor(double value = 0.0) const;

    CoefficientTensor forward(const Image& image) const;
    Image adjoint(const CoefficientTensor& coeffs) const;
    void forward(std::span<const double> image, std::span<double> coeffs) const;
    void adjoint(std::span<const double> coeffs, std::span<double> image) const;

    /// Central normal direction of a directional subband in (-pi/2, pi/2].
    /// Horizontal cone: atan(k / 2^s); vertical cone: pi/2 - atan(k / 2^s)
    /// wrapped into the range. Positive angles point into the upper right
    /// quadrant of the frequency plane.
    double orientation(const SubbandIndex& idx) const;

private:
    std::size_t n_;
    std::vector<int> levels_;
    std::vector<SubbandIndex> subbands_;
    std::vector<double> windows_;
    std::shared_ptr<const detail::Fft2> fft_;
};

ShearletSystem build_system(std::size_t n, std::vector<int> shearing_levels);
CoefficientTensor forward(const ShearletSystem& system, const Image& image);
Image adjoint(const ShearletSystem& system, const CoefficientTensor& coeffs);
double subband_orientation(const ShearletSystem& system, const SubbandIndex& idx);

} // namespace lti
