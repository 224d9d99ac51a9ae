#include <lti/tomo.hpp>

#include <lti/error.hpp>

#include "fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace lti {

namespace {

constexpr double kAxisEps = 1e-12;

// Splits an axis-aligned line between the columns (or rows) on either side
// when it coincides with a pixel boundary.
template <typename Visit>
void trace_axis_aligned(std::size_t n, double spacing, double offset, bool vertical, Visit&& visit) {
    const double h = 0.5 * static_cast<double>(n) * spacing;
    const double u = (offset + h) / spacing; // boundary coordinate in pixel units
    if (u < -1e-9 || u > static_cast<double>(n) + 1e-9) return;
    const double nearest = std::round(u);
    std::size_t lanes[2];
    double share[2];
    int count = 0;
    if (std::abs(u - nearest) < 1e-9) {
        const auto b = static_cast<long>(nearest);
        if (b - 1 >= 0) {
            lanes[count] = static_cast<std::size_t>(b - 1);
            share[count++] = 0.5;
        }
        if (b < static_cast<long>(n)) {
            lanes[count] = static_cast<std::size_t>(b);
            share[count++] = 0.5;
        }
    } else {
        lanes[0] = static_cast<std::size_t>(std::floor(u));
        share[0] = 1.0;
        count = 1;
    }
    for (int l = 0; l < count; ++l) {
        for (std::size_t k = 0; k < n; ++k) {
            // vertical line x = offset: lane is a column, walk all rows
            const std::size_t idx = vertical ? k * n + lanes[l] : (n - 1 - lanes[l]) * n + k;
            visit(idx, share[l] * spacing);
        }
    }
}

template <typename Visit>
void trace_ray_impl(std::size_t n, double spacing, double theta, double s, std::vector<double>& ts,
                    Visit&& visit) {
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    const double px = s * c;
    const double py = s * sn;
    const double dx = -sn;
    const double dy = c;
    const double h = 0.5 * static_cast<double>(n) * spacing;

    if (std::abs(dx) < kAxisEps) { // line x = px
        trace_axis_aligned(n, spacing, px, true, visit);
        return;
    }
    if (std::abs(dy) < kAxisEps) { // line y = py; rows counted from the bottom
        trace_axis_aligned(n, spacing, py, false, visit);
        return;
    }

    const double tx0 = (-h - px) / dx;
    const double tx1 = (h - px) / dx;
    const double ty0 = (-h - py) / dy;
    const double ty1 = (h - py) / dy;
    const double tmin = std::max(std::min(tx0, tx1), std::min(ty0, ty1));
    const double tmax = std::min(std::max(tx0, tx1), std::max(ty0, ty1));
    if (!(tmax > tmin)) return;

    ts.clear();
    ts.push_back(tmin);
    for (std::size_t i = 0; i <= n; ++i) {
        const double plane = -h + static_cast<double>(i) * spacing;
        const double tx = (plane - px) / dx;
        if (tx > tmin && tx < tmax) ts.push_back(tx);
        const double ty = (plane - py) / dy;
        if (ty > tmin && ty < tmax) ts.push_back(ty);
    }
    ts.push_back(tmax);
    std::sort(ts.begin(), ts.end());

    const double inv = 1.0 / spacing;
    const auto last = static_cast<long>(n) - 1;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double len = ts[i] - ts[i - 1];
        if (len <= 1e-12 * spacing) continue;
        const double tm = 0.5 * (ts[i] + ts[i - 1]);
        const double x = px + tm * dx;
        const double y = py + tm * dy;
        const long col = std::clamp(static_cast<long>(std::floor((x + h) * inv)), 0L, last);
        const long row = std::clamp(static_cast<long>(std::floor((h - y) * inv)), 0L, last);
        visit(static_cast<std::size_t>(row) * n + static_cast<std::size_t>(col), len);
    }
}

void check_coverage(std::size_t n, double pixel_spacing, const ScanGeometry& g) {
    g.validate();
    if (n == 0) throw ConfigError("image size must be positive");
    if (!(pixel_spacing > 0.0)) throw ConfigError("pixel spacing must be positive");
    const double diag = std::sqrt(2.0) * static_cast<double>(n) * pixel_spacing;
    const double extent = static_cast<double>(g.detector_count) * g.detector_spacing;
    if (extent + 1e-9 < diag)
        throw ConfigError("detector extent " + std::to_string(extent) +
                          " does not cover the image diagonal " + std::to_string(diag));
}

std::size_t next_pow2(std::size_t v) { return std::bit_ceil(v); }

} // namespace

ScanGeometry ScanGeometry::for_image(std::size_t n, double half_angle, std::size_t angle_count,
                                     double pixel_spacing) {
    ScanGeometry g;
    g.half_angle = half_angle;
    g.angle_count = angle_count != 0
                        ? angle_count
                        : static_cast<std::size_t>(std::lround(2.0 * rad_to_deg(half_angle))) + 1;
    const double diag = std::sqrt(2.0) * static_cast<double>(n);
    g.detector_count = 2 * static_cast<std::size_t>(std::ceil(0.5 * diag - 1e-9)) + 1;
    g.detector_spacing = pixel_spacing;
    return g;
}

std::vector<double> ScanGeometry::angles() const {
    std::vector<double> out(angle_count);
    const double step = angle_count > 1 ? 2.0 * half_angle / static_cast<double>(angle_count - 1) : 0.0;
    for (std::size_t i = 0; i < angle_count; ++i)
        out[i] = -half_angle + step * static_cast<double>(i);
    // symmetric grids must contain exact negatives
    for (std::size_t i = 0; i < angle_count / 2; ++i) out[angle_count - 1 - i] = -out[i];
    if (angle_count % 2 == 1) out[angle_count / 2] = 0.0;
    return out;
}

double ScanGeometry::detector_position(std::size_t bin) const noexcept {
    return (static_cast<double>(bin) - 0.5 * static_cast<double>(detector_count - 1)) * detector_spacing;
}

void ScanGeometry::validate() const {
    if (!(half_angle > 0.0) || half_angle > std::numbers::pi / 2 + 1e-12)
        throw ConfigError("half angle must lie in (0, pi/2]");
    if (angle_count < 2) throw ConfigError("at least two projection angles are required");
    if (detector_count == 0) throw ConfigError("detector count must be positive");
    if (!(detector_spacing > 0.0)) throw ConfigError("detector spacing must be positive");
}

Sinogram::Sinogram(const ScanGeometry& geometry, double value)
    : geometry_(geometry), data_(geometry.angle_count * geometry.detector_count, value) {}

void trace_ray(std::size_t n, double pixel_spacing, double theta, double s,
               const std::function<void(std::size_t, double)>& visit) {
    std::vector<double> ts;
    trace_ray_impl(n, pixel_spacing, theta, s, ts, visit);
}

RadonOperator::RadonOperator(std::size_t n, const ScanGeometry& geometry, double pixel_spacing)
    : n_(n), pixel_spacing_(pixel_spacing), geometry_(geometry) {
    check_coverage(n, pixel_spacing, geometry);
    const auto angles = geometry.angles();
    const std::size_t rays = geometry.angle_count * geometry.detector_count;
    row_start_.reserve(rays + 1);
    row_start_.push_back(0);
    columns_.reserve(rays * n);
    weights_.reserve(rays * n);
    std::vector<double> ts;
    ts.reserve(2 * n + 4);
    for (std::size_t a = 0; a < geometry.angle_count; ++a) {
        for (std::size_t d = 0; d < geometry.detector_count; ++d) {
            trace_ray_impl(n, pixel_spacing, angles[a], geometry.detector_position(d), ts,
                           [&](std::size_t idx, double len) {
                               columns_.push_back(static_cast<std::uint32_t>(idx));
                               weights_.push_back(len);
                           });
            row_start_.push_back(columns_.size());
        }
    }
    columns_.shrink_to_fit();
    weights_.shrink_to_fit();
}

void RadonOperator::forward(std::span<const double> image, std::span<double> sinogram) const {
    if (image.size() != n_ * n_ || sinogram.size() != ray_count())
        throw ConfigError("radon forward: size mismatch");
    const std::size_t rays = ray_count();
    for (std::size_t r = 0; r < rays; ++r) {
        double acc = 0.0;
        for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
            acc += weights_[k] * image[columns_[k]];
        sinogram[r] = acc;
    }
}

void RadonOperator::adjoint(std::span<const double> sinogram, std::span<double> image) const {
    if (image.size() != n_ * n_ || sinogram.size() != ray_count())
        throw ConfigError("radon adjoint: size mismatch");
    std::fill(image.begin(), image.end(), 0.0);
    const std::size_t rays = ray_count();
    for (std::size_t r = 0; r < rays; ++r) {
        const double v = sinogram[r];
        if (v == 0.0) continue;
        for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
            image[columns_[k]] += weights_[k] * v;
    }
}

void RadonOperator::normal(std::span<const double> x, std::span<double> out) const {
    std::vector<double> tmp(ray_count());
    forward(x, tmp);
    adjoint(tmp, out);
}

Sinogram RadonOperator::forward(const Image& image) const {
    if (image.size() != n_) throw ConfigError("radon forward: image size does not match operator");
    Sinogram out(geometry_);
    forward(image.values(), out.values());
    return out;
}

Image RadonOperator::adjoint(const Sinogram& sinogram) const {
    if (sinogram.geometry() != geometry_)
        throw ConfigError("radon adjoint: sinogram geometry does not match operator");
    Image out(n_, 0.0, pixel_spacing_);
    adjoint(sinogram.values(), out.values());
    return out;
}

std::span<const std::uint32_t> RadonOperator::ray_pixels(std::size_t angle, std::size_t bin) const {
    const std::size_t r = angle * geometry_.detector_count + bin;
    return {columns_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
}

Sinogram radon_forward(const Image& image, const ScanGeometry& geometry) {
    const std::size_t n = image.size();
    check_coverage(n, image.spacing(), geometry);
    Sinogram out(geometry);
    const auto angles = geometry.angles();
    const auto px = image.values();
    std::vector<double> ts;
    for (std::size_t a = 0; a < geometry.angle_count; ++a) {
        for (std::size_t d = 0; d < geometry.detector_count; ++d) {
            double acc = 0.0;
            trace_ray_impl(n, image.spacing(), angles[a], geometry.detector_position(d), ts,
                           [&](std::size_t idx, double len) { acc += len * px[idx]; });
            out(a, d) = acc;
        }
    }
    return out;
}

Image radon_adjoint(const Sinogram& sinogram, const ScanGeometry& geometry, std::size_t n,
                    double pixel_spacing) {
    if (sinogram.geometry() != geometry)
        throw ConfigError("radon adjoint: sinogram shape does not match geometry");
    check_coverage(n, pixel_spacing, geometry);
    Image out(n, 0.0, pixel_spacing);
    auto px = out.values();
    const auto angles = geometry.angles();
    std::vector<double> ts;
    for (std::size_t a = 0; a < geometry.angle_count; ++a) {
        for (std::size_t d = 0; d < geometry.detector_count; ++d) {
            const double v = sinogram(a, d);
            if (v == 0.0) continue;
            trace_ray_impl(n, pixel_spacing, angles[a], geometry.detector_position(d), ts,
                           [&](std::size_t idx, double len) { px[idx] += len * v; });
        }
    }
    return out;
}

Image fbp(const Sinogram& sinogram, FilterKind filter, std::size_t n, double pixel_spacing) {
    const ScanGeometry& g = sinogram.geometry();
    g.validate();
    if (n == 0) throw ConfigError("fbp: image size must be positive");
    const std::size_t nd = g.detector_count;
    const double ds = g.detector_spacing;
    const std::size_t pad = next_pow2(std::max<std::size_t>(2 * nd, 64));

    // Discrete ramp: transform of the band-limited spatial kernel, which
    // keeps the DC term consistent with the sampled projections.
    detail::Fft1 fft(pad);
    detail::RealBuffer kernel(pad);
    kernel[0] = 1.0 / (4.0 * ds * ds);
    for (std::size_t m = 1; m < pad / 2; ++m) {
        if (m % 2 == 1) {
            const double v = -1.0 / (std::numbers::pi * std::numbers::pi * double(m * m) * ds * ds);
            kernel[m] = v;
            kernel[pad - m] = v;
        }
    }
    detail::ComplexBuffer response(fft.spectrum_size());
    fft.forward(kernel, response);
    std::vector<double> gain(fft.spectrum_size());
    for (std::size_t k = 0; k < gain.size(); ++k) {
        double hk = response[k].real();
        if (filter == FilterKind::SheppLogan && k > 0) {
            const double x = std::numbers::pi * static_cast<double>(k) / static_cast<double>(pad);
            hk *= std::sin(x) / x;
        }
        // ds from the convolution sum, 1/pad from the unnormalized inverse
        gain[k] = hk * ds / static_cast<double>(pad);
    }

    std::vector<double> filtered(g.angle_count * nd);
    detail::RealBuffer line(pad);
    detail::ComplexBuffer spec(fft.spectrum_size());
    for (std::size_t a = 0; a < g.angle_count; ++a) {
        std::fill(line.data(), line.data() + pad, 0.0);
        for (std::size_t d = 0; d < nd; ++d) line[d] = sinogram(a, d);
        fft.forward(line, spec);
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= gain[k];
        fft.inverse(spec, line);
        std::copy(line.data(), line.data() + nd, filtered.begin() + static_cast<long>(a * nd));
    }

    const auto angles = g.angles();
    const double step = 2.0 * g.half_angle / static_cast<double>(g.angle_count - 1);
    Image out(n, 0.0, pixel_spacing);
    const double center = 0.5 * static_cast<double>(n - 1);
    const double dcenter = 0.5 * static_cast<double>(nd - 1);
    for (std::size_t a = 0; a < g.angle_count; ++a) {
        const double w = (a == 0 || a + 1 == g.angle_count) ? 0.5 * step : step;
        const double c = std::cos(angles[a]) * pixel_spacing / ds;
        const double sn = std::sin(angles[a]) * pixel_spacing / ds;
        const double* q = filtered.data() + a * nd;
        for (std::size_t r = 0; r < n; ++r) {
            const double y = center - static_cast<double>(r);
            for (std::size_t col = 0; col < n; ++col) {
                const double x = static_cast<double>(col) - center;
                const double u = x * c + y * sn + dcenter;
                const double fl = std::floor(u);
                const long i0 = static_cast<long>(fl);
                if (i0 < 0 || i0 + 1 >= static_cast<long>(nd)) {
                    if (i0 == static_cast<long>(nd) - 1 && u == fl) out(r, col) += w * q[i0];
                    continue;
                }
                const double t = u - fl;
                out(r, col) += w * ((1.0 - t) * q[i0] + t * q[i0 + 1]);
            }
        }
    }
    return out;
}

void add_gaussian_noise(Sinogram& sinogram, const NoiseSpec& noise) {
    if (noise.relative_level < 0.0) throw ConfigError("noise level must be nonnegative");
    if (noise.relative_level == 0.0) return;
    auto v = sinogram.values();
    double mean_abs = 0.0;
    for (double x : v) mean_abs += std::abs(x);
    mean_abs /= static_cast<double>(v.size());
    const double sigma = noise.relative_level * mean_abs;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : v) x += sigma * normal(rng);
}

Sinogram simulate_measurements(const PhantomRenderer& render, std::size_t n,
                               const ScanGeometry& geometry, const NoiseSpec& noise,
                               unsigned oversample, double pixel_spacing) {
    if (oversample < 1) throw ConfigError("oversample factor must be at least 1");
    geometry.validate();
    const Image fine = render(n * oversample);
    if (fine.size() != n * oversample) throw ConfigError("renderer returned an image of the wrong size");

    ScanGeometry fine_geometry = geometry;
    fine_geometry.detector_count = geometry.detector_count * oversample;
    fine_geometry.detector_spacing = geometry.detector_spacing / oversample;

    Image scaled(fine.size(), 0.0, pixel_spacing / oversample);
    std::copy(fine.values().begin(), fine.values().end(), scaled.values().begin());
    const Sinogram fine_sino = radon_forward(scaled, fine_geometry);

    Sinogram out(geometry);
    const double inv = 1.0 / static_cast<double>(oversample);
    for (std::size_t a = 0; a < geometry.angle_count; ++a) {
        for (std::size_t d = 0; d < geometry.detector_count; ++d) {
            double acc = 0.0;
            for (unsigned m = 0; m < oversample; ++m) acc += fine_sino(a, d * oversample + m);
            out(a, d) = acc * inv;
        }
    }
    add_gaussian_noise(out, noise);
    return out;
}

Sinogram simulate_measurements(const Image& phantom, const ScanGeometry& geometry,
                               const NoiseSpec& noise, unsigned oversample) {
    if (oversample < 1) throw ConfigError("oversample factor must be at least 1");
    if (oversample == 1) {
        Sinogram out = radon_forward(phantom, geometry);
        add_gaussian_noise(out, noise);
        return out;
    }
    const std::size_t n = phantom.size();
    auto replicate = [&phantom, n](std::size_t resolution) {
        const std::size_t q = resolution / n;
        Image fine(resolution);
        for (std::size_t r = 0; r < resolution; ++r)
            for (std::size_t c = 0; c < resolution; ++c) fine(r, c) = phantom(r / q, c / q);
        return fine;
    };
    return simulate_measurements(replicate, n, geometry, noise, oversample, phantom.spacing());
}

} // namespace lti
