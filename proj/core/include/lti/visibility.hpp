#pragma once

#include <lti/shearlet.hpp>
#include <lti/tomo.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace lti {

enum class VisibilityRule { WedgeSupport, Orientation, Quantile };

std::string_view to_string(VisibilityRule rule) noexcept;
VisibilityRule parse_visibility_rule(std::string_view name);

/// Per-subband visible/invisible partition for a wedge half-angle phi.
/// Bandlimited subbands have translation-invariant spectra, so every
/// translate of a subband shares its flag.
class VisibilityMask {
public:
    VisibilityMask(std::vector<std::uint8_t> flags, double half_angle, VisibilityRule rule);

    std::size_t size() const noexcept { return flags_.size(); }
    bool visible(std::size_t subband) const noexcept { return flags_[subband] != 0; }
    const std::vector<std::uint8_t>& flags() const noexcept { return flags_; }
    double half_angle() const noexcept { return half_angle_; }
    VisibilityRule rule() const noexcept { return rule_; }
    std::size_t visible_count() const noexcept;

private:
    std::vector<std::uint8_t> flags_;
    double half_angle_;
    VisibilityRule rule_;
};

/// Threshold on |window|^2 below which a frequency sample is outside the support.
inline constexpr double kSupportThreshold = 1e-12;

/// True when the frequency (xi_x, xi_y) lies in the visible wedge
/// { r (cos w, sin w) : |w| <= phi }.
bool in_visible_wedge(double xi_x, double xi_y, double half_angle) noexcept;

/// Invisible iff the thresholded window support misses the visible wedge.
VisibilityMask wedge_classify(const ShearletSystem& system, double half_angle);

/// Visible iff |orientation| <= phi; ties at the boundary count as visible.
VisibilityMask orientation_classify(const ShearletSystem& system, double half_angle);

using ImageToSinogram = std::function<std::vector<double>(const Image&)>;

/// Per scale, visible iff ||A psi_c|| is strictly above the empirical
/// (phi/pi)-quantile of the norms of that scale (linear interpolation
/// between order statistics). psi_c is the atom centered in the image.
VisibilityMask quantile_classify(const ShearletSystem& system, const ImageToSinogram& forward_op,
                                 double half_angle);
VisibilityMask quantile_classify(const ShearletSystem& system, const RadonOperator& radon);

/// Norm of the projected atom of every subband (lowpass included).
std::vector<double> projected_atom_norms(const ShearletSystem& system,
                                         const ImageToSinogram& forward_op);

/// Empirical p-quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double p);

VisibilityMask classify(const ShearletSystem& system, VisibilityRule rule, double half_angle,
                        const RadonOperator* radon = nullptr);

enum class Keep { Visible, Invisible };

/// Copies the kept subbands bit-exactly and zeroes the rest; the result
/// carries the mask as its visibility flags.
CoefficientTensor mask_restrict(const CoefficientTensor& coeffs, const VisibilityMask& mask, Keep keep);

} // namespace lti
