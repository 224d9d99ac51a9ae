#include <lti/visibility.hpp>

#include <lti/error.hpp>
#include <lti/vecops.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lti {

namespace {

void check_half_angle(double half_angle) {
    if (!(half_angle > 0.0) || half_angle > std::numbers::pi / 2 + 1e-12)
        throw ArgumentError("wedge half-angle must lie in (0, pi/2]");
}

} // namespace

std::string_view to_string(VisibilityRule rule) noexcept {
    switch (rule) {
    case VisibilityRule::WedgeSupport: return "wedge";
    case VisibilityRule::Orientation: return "orientation";
    case VisibilityRule::Quantile: return "quantile";
    }
    return "?";
}

VisibilityRule parse_visibility_rule(std::string_view name) {
    if (name == "wedge") return VisibilityRule::WedgeSupport;
    if (name == "orientation") return VisibilityRule::Orientation;
    if (name == "quantile") return VisibilityRule::Quantile;
    throw ArgumentError("unknown visibility rule '" + std::string(name) + "'");
}

VisibilityMask::VisibilityMask(std::vector<std::uint8_t> flags, double half_angle, VisibilityRule rule)
    : flags_(std::move(flags)), half_angle_(half_angle), rule_(rule) {}

std::size_t VisibilityMask::visible_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(flags_.begin(), flags_.end(), [](auto f) { return f != 0; }));
}

bool in_visible_wedge(double xi_x, double xi_y, double half_angle) noexcept {
    if (xi_x == 0.0 && xi_y == 0.0) return true;
    if (half_angle >= std::numbers::pi / 2 - 1e-12) return true;
    return std::abs(xi_y) <= std::tan(half_angle) * std::abs(xi_x) * (1.0 + 1e-12);
}

VisibilityMask wedge_classify(const ShearletSystem& system, double half_angle) {
    check_half_angle(half_angle);
    const std::size_t n = system.size();
    const std::size_t width = system.spectrum_width();
    std::vector<std::uint8_t> flags(system.subband_count(), 0);
    // W_phi is symmetric under xi -> -xi, as are the windows, so the half
    // spectrum sees every support point up to sign.
    for (std::size_t s = 0; s < system.subband_count(); ++s) {
        const auto w = system.window(s);
        bool hit = false;
        for (std::size_t r = 0; r < n && !hit; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                const double v = w[r * width + c];
                if (v * v <= kSupportThreshold) continue;
                const auto [fx, fy] = system.frequency(r, c);
                if (in_visible_wedge(fx, fy, half_angle)) {
                    hit = true;
                    break;
                }
            }
        }
        flags[s] = hit ? 1 : 0;
    }
    return {std::move(flags), half_angle, VisibilityRule::WedgeSupport};
}

VisibilityMask orientation_classify(const ShearletSystem& system, double half_angle) {
    check_half_angle(half_angle);
    std::vector<std::uint8_t> flags(system.subband_count(), 1);
    const auto& subbands = system.subbands();
    for (std::size_t s = 0; s < subbands.size(); ++s) {
        if (subbands[s].is_lowpass()) continue;
        const double angle = std::abs(system.orientation(subbands[s]));
        flags[s] = angle <= half_angle + 1e-12 ? 1 : 0;
    }
    return {std::move(flags), half_angle, VisibilityRule::Orientation};
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ArgumentError("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<double> projected_atom_norms(const ShearletSystem& system,
                                         const ImageToSinogram& forward_op) {
    const std::size_t n = system.size();
    std::vector<double> norms(system.subband_count(), 0.0);
    CoefficientTensor delta = system.make_tensor();
    for (std::size_t s = 0; s < system.subband_count(); ++s) {
        delta(s, n / 2, n / 2) = 1.0;
        const Image atom = system.adjoint(delta);
        delta(s, n / 2, n / 2) = 0.0;
        const auto projected = forward_op(atom);
        norms[s] = vec::norm(projected);
    }
    return norms;
}

VisibilityMask quantile_classify(const ShearletSystem& system, const ImageToSinogram& forward_op,
                                 double half_angle) {
    check_half_angle(half_angle);
    const auto norms = projected_atom_norms(system, forward_op);
    std::vector<std::uint8_t> flags(system.subband_count(), 1);
    const double p = half_angle / std::numbers::pi;
    for (std::size_t j = 0; j < system.scale_count(); ++j) {
        const auto members = system.scale_members(static_cast<int>(j));
        if (members.size() < 2) continue; // quantile undefined: keep visible
        std::vector<double> scale_norms;
        for (auto s : members) scale_norms.push_back(norms[s]);
        const double q = empirical_quantile(scale_norms, p);
        for (auto s : members) flags[s] = norms[s] > q ? 1 : 0;
    }
    return {std::move(flags), half_angle, VisibilityRule::Quantile};
}

VisibilityMask quantile_classify(const ShearletSystem& system, const RadonOperator& radon) {
    if (radon.image_size() != system.size())
        throw ConfigError("projector image size does not match shearlet system");
    auto op = [&radon](const Image& img) {
        std::vector<double> out(radon.ray_count());
        radon.forward(img.values(), out);
        return out;
    };
    return quantile_classify(system, op, radon.geometry().half_angle);
}

VisibilityMask classify(const ShearletSystem& system, VisibilityRule rule, double half_angle,
                        const RadonOperator* radon) {
    switch (rule) {
    case VisibilityRule::WedgeSupport: return wedge_classify(system, half_angle);
    case VisibilityRule::Orientation: return orientation_classify(system, half_angle);
    case VisibilityRule::Quantile: {
        if (radon == nullptr) throw ConfigError("quantile rule needs a forward operator");
        auto op = [radon](const Image& img) {
            std::vector<double> out(radon->ray_count());
            radon->forward(img.values(), out);
            return out;
        };
        return quantile_classify(system, op, half_angle);
    }
    }
    throw ArgumentError("unknown visibility rule");
}

CoefficientTensor mask_restrict(const CoefficientTensor& coeffs, const VisibilityMask& mask, Keep keep) {
    if (mask.size() != coeffs.subband_count()) throw ConfigError("mask does not match coefficient tensor");
    CoefficientTensor out = coeffs;
    const bool want_visible = keep == Keep::Visible;
    for (std::size_t s = 0; s < coeffs.subband_count(); ++s) {
        if (mask.visible(s) != want_visible) {
            auto band = out.subband(s);
            std::fill(band.begin(), band.end(), 0.0);
        }
    }
    out.set_visibility(mask.flags());
    return out;
}

} // namespace lti
