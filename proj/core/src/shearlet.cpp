#include <lti/shearlet.hpp>

#include <lti/error.hpp>

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lti {

namespace {

// Half-width of the transition region of the angular bump, in shear units.
constexpr double kShearTransition = 0.25;

/// Meyer auxiliary function: smooth step from 0 on (-inf, 0] to 1 on [1, inf)
/// with v(x) + v(1 - x) = 1.
double meyer_step(double x) noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double x2 = x * x;
    return x2 * x2 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x2 * x);
}

/// 1D scaling profile: 1 on [0, 1], smooth decay to 0 on [1, 2].
double scaling_profile(double t) noexcept {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    return std::cos(0.5 * std::numbers::pi * meyer_step(t - 1.0));
}

double square_scaling(double fx, double fy, double radius) noexcept {
    return scaling_profile(std::abs(fx) / radius) * scaling_profile(std::abs(fy) / radius);
}

/// Angular bump with sum_k bump(u - k)^2 = 1.
double shear_bump(double u) noexcept {
    const double a = std::abs(u);
    const double lo = 0.5 - kShearTransition;
    if (a <= lo) return 1.0;
    if (a >= 0.5 + kShearTransition) return 0.0;
    return std::cos(0.5 * std::numbers::pi * meyer_step((a - lo) / (2.0 * kShearTransition)));
}

long canonical(long k, long n) noexcept {
    long v = ((k % n) + n) % n;
    if (v >= n / 2) v -= n;
    return v;
}

} // namespace

// -- CoefficientTensor ------------------------------------------------------

CoefficientTensor::CoefficientTensor(std::size_t height, std::size_t width,
                                     std::vector<SubbandIndex> subbands, double value)
    : height_(height), width_(width), count_(subbands.size()), subbands_(std::move(subbands)),
      data_(height * width * count_, value) {}

CoefficientTensor::CoefficientTensor(std::size_t height, std::size_t width, std::size_t count,
                                     double value)
    : height_(height), width_(width), count_(count), data_(height * width * count, value) {}

void CoefficientTensor::set_visibility(std::vector<std::uint8_t> flags) {
    if (flags.size() != count_) throw ConfigError("visibility flag count does not match subband count");
    visible_ = std::move(flags);
}

// -- ShearletSystem ---------------------------------------------------------

std::vector<int> ShearletSystem::reference_levels() { return {0, 0, 1, 2, 2}; }

std::size_t ShearletSystem::default_scale_count(std::size_t n) {
    std::size_t log2n = 0;
    while ((std::size_t{1} << (log2n + 1)) <= n) ++log2n;
    return log2n > 5 ? log2n - 4 : 1;
}

std::vector<int> ShearletSystem::default_levels(std::size_t n) {
    const auto ref = reference_levels();
    const std::size_t scales = default_scale_count(n);
    if (scales <= ref.size()) return {ref.end() - static_cast<long>(scales), ref.end()};
    std::vector<int> out(scales - ref.size(), 0);
    out.insert(out.end(), ref.begin(), ref.end());
    return out;
}

std::size_t ShearletSystem::count_subbands(std::span<const int> shearing_levels) noexcept {
    std::size_t count = 1;
    for (int s : shearing_levels) count += 2 * (2 * (std::size_t{1} << s) + 1);
    return count;
}

ShearletSystem::ShearletSystem(std::size_t n, std::vector<int> shearing_levels)
    : n_(n), levels_(std::move(shearing_levels)) {
    if (n < 32 || n % 2 != 0) throw ConfigError("shearlet system needs an even size n >= 32");
    if (levels_.empty()) throw ConfigError("at least one scale is required");
    for (int s : levels_)
        if (s < 0 || s > 8) throw ConfigError("shearing levels must lie in [0, 8]");
    const std::size_t scales = levels_.size();
    // Lowpass transition starts at n / 2^(J+1); it must span a few samples.
    const double base = static_cast<double>(n) / static_cast<double>(std::size_t{1} << (scales + 1));
    if (base < 2.0)
        throw ConfigError("image size " + std::to_string(n) + " is too small for " +
                          std::to_string(scales) + " scales");

    subbands_.push_back(SubbandIndex::lowpass());
    for (std::size_t j = 0; j < scales; ++j) {
        const int kmax = 1 << levels_[j];
        for (int cone : {1, -1})
            for (int k = -kmax; k <= kmax; ++k) subbands_.push_back({static_cast<int>(j), k, cone});
    }

    const std::size_t count = subbands_.size();
    const std::size_t width = spectrum_width();
    const std::size_t plane = n_ * width;
    windows_.assign(count * plane, 0.0);

    std::vector<double> radial(scales);
    auto raw_windows = [&](double fx, double fy, std::vector<double>& out) {
        // radial partition: lowpass plus telescoping differences of squares
        const double low = square_scaling(fx, fy, base);
        double prev = low * low;
        for (std::size_t j = 0; j < scales; ++j) {
            double outer = 1.0;
            if (j + 1 < scales) {
                const double phi = square_scaling(fx, fy, base * double(std::size_t{2} << j));
                outer = phi * phi;
            }
            radial[j] = std::sqrt(std::max(outer - prev, 0.0));
            prev = outer;
        }
        out[0] = low;
        std::size_t pos = 1;
        const bool origin = fx == 0.0 && fy == 0.0;
        const bool horizontal = std::abs(fy) <= std::abs(fx);
        for (std::size_t j = 0; j < scales; ++j) {
            const int kmax = 1 << levels_[j];
            const double scale = static_cast<double>(kmax);
            for (int cone : {1, -1}) {
                const bool inside = !origin && (cone == 1) == horizontal;
                const double slope = !inside ? 0.0 : (cone == 1 ? fy / fx : fx / fy);
                for (int k = -kmax; k <= kmax; ++k, ++pos)
                    out[pos] = inside ? radial[j] * shear_bump(scale * slope - k) : 0.0;
            }
        }
    };

    std::vector<double> here(count), mirror(count);
    const long ln = static_cast<long>(n_);
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const long a = canonical(static_cast<long>(c), ln);
            const long b = canonical(static_cast<long>(r), ln);
            // x along columns, y up: row frequency b corresponds to xi_y = -b
            raw_windows(double(a), double(-b), here);
            raw_windows(double(canonical(-a, ln)), double(-canonical(-b, ln)), mirror);
            // symmetrize so that w(-xi) = w(xi) also on the Nyquist lines
            double total = 0.0;
            for (std::size_t s = 0; s < count; ++s) {
                here[s] = std::sqrt(0.5 * (here[s] * here[s] + mirror[s] * mirror[s]));
                total += here[s] * here[s];
            }
            if (!(total > 0.0)) throw ConfigError("shearlet windows do not cover the frequency plane");
            const double inv = 1.0 / std::sqrt(total);
            for (std::size_t s = 0; s < count; ++s) windows_[s * plane + r * width + c] = here[s] * inv;
        }
    }

    fft_ = std::make_shared<const detail::Fft2>(n_);
}

std::pair<double, double> ShearletSystem::frequency(std::size_t row, std::size_t col) const noexcept {
    const long ln = static_cast<long>(n_);
    return {double(canonical(static_cast<long>(col), ln)), double(-canonical(static_cast<long>(row), ln))};
}

std::size_t ShearletSystem::index_of(const SubbandIndex& idx) const {
    const auto it = std::find(subbands_.begin(), subbands_.end(), idx);
    if (it == subbands_.end()) throw ArgumentError("subband index is not part of this system");
    return static_cast<std::size_t>(it - subbands_.begin());
}

std::vector<std::size_t> ShearletSystem::scale_members(int scale) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < subbands_.size(); ++s)
        if (!subbands_[s].is_lowpass() && subbands_[s].scale == scale) out.push_back(s);
    return out;
}

CoefficientTensor ShearletSystem::make_tensor(double value) const {
    return CoefficientTensor(n_, n_, subbands_, value);
}

void ShearletSystem::forward(std::span<const double> image, std::span<double> coeffs) const {
    const std::size_t pixels = n_ * n_;
    if (image.size() != pixels || coeffs.size() != pixels * subband_count())
        throw ConfigError("shearlet forward: size mismatch");
    detail::RealBuffer real(pixels);
    detail::ComplexBuffer spectrum(fft_->spectrum_size());
    detail::ComplexBuffer product(fft_->spectrum_size());
    std::copy(image.begin(), image.end(), real.data());
    fft_->forward(real, spectrum);
    const double norm = 1.0 / static_cast<double>(pixels);
    for (std::size_t s = 0; s < subband_count(); ++s) {
        const auto w = window(s);
        for (std::size_t i = 0; i < w.size(); ++i) product[i] = spectrum[i] * (w[i] * norm);
        fft_->inverse(product, real);
        std::copy(real.data(), real.data() + pixels, coeffs.begin() + static_cast<long>(s * pixels));
    }
}

void ShearletSystem::adjoint(std::span<const double> coeffs, std::span<double> image) const {
    const std::size_t pixels = n_ * n_;
    if (image.size() != pixels || coeffs.size() != pixels * subband_count())
        throw ConfigError("shearlet adjoint: size mismatch");
    detail::RealBuffer real(pixels);
    detail::ComplexBuffer spectrum(fft_->spectrum_size());
    detail::ComplexBuffer accum(fft_->spectrum_size());
    for (std::size_t s = 0; s < subband_count(); ++s) {
        const auto src = coeffs.subspan(s * pixels, pixels);
        std::copy(src.begin(), src.end(), real.data());
        fft_->forward(real, spectrum);
        const auto w = window(s);
        for (std::size_t i = 0; i < w.size(); ++i) accum[i] += spectrum[i] * w[i];
    }
    fft_->inverse(accum, real);
    const double norm = 1.0 / static_cast<double>(pixels);
    for (std::size_t i = 0; i < pixels; ++i) image[i] = real[i] * norm;
}

CoefficientTensor ShearletSystem::forward(const Image& image) const {
    if (image.size() != n_) throw ConfigError("shearlet forward: image size does not match system");
    CoefficientTensor out = make_tensor();
    forward(image.values(), out.values());
    return out;
}

Image ShearletSystem::adjoint(const CoefficientTensor& coeffs) const {
    if (coeffs.height() != n_ || coeffs.width() != n_ || coeffs.subband_count() != subband_count())
        throw ConfigError("shearlet adjoint: tensor shape does not match system");
    Image out(n_);
    adjoint(coeffs.values(), out.values());
    return out;
}

double ShearletSystem::orientation(const SubbandIndex& idx) const {
    if (idx.is_lowpass()) throw ArgumentError("orientation is defined for directional subbands only");
    if (idx.scale < 0 || static_cast<std::size_t>(idx.scale) >= levels_.size())
        throw ArgumentError("subband scale out of range");
    const int kmax = 1 << levels_[static_cast<std::size_t>(idx.scale)];
    if (std::abs(idx.shear) > kmax) throw ArgumentError("shear exceeds the scale's shearing level");
    const double tilt = std::atan(static_cast<double>(idx.shear) / kmax);
    if (idx.cone == 1) return tilt;
    const double angle = std::numbers::pi / 2 - tilt; // in [pi/4, 3pi/4]
    return angle > std::numbers::pi / 2 ? angle - std::numbers::pi : angle;
}

ShearletSystem build_system(std::size_t n, std::vector<int> shearing_levels) {
    return ShearletSystem(n, std::move(shearing_levels));
}

CoefficientTensor forward(const ShearletSystem& system, const Image& image) {
    return system.forward(image);
}

Image adjoint(const ShearletSystem& system, const CoefficientTensor& coeffs) {
    return system.adjoint(coeffs);
}

double subband_orientation(const ShearletSystem& system, const SubbandIndex& idx) {
    return system.orientation(idx);
}

} // namespace lti
