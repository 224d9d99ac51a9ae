#pragma once

#include <lti/image.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lti {

/// ||recon - truth|| / ||truth||. Throws UndefinedMetricError for zero truth.
double relative_error(const Image& recon, const Image& truth);

/// 10 log10(peak^2 / MSE) with peak = max(truth) unless given. Identical
/// images give +infinity.
double psnr(const Image& recon, const Image& truth, std::optional<double> peak = std::nullopt);

/// PSNR values above this are printed as the cap.
inline constexpr double kPsnrTextCap = 99.0;

/// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range max(truth) - min(truth) (1 if constant),
/// replicated borders.
double ssim(const Image& recon, const Image& truth);

struct MetricReport {
    double re = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

MetricReport evaluate(const Image& recon, const Image& truth);

/// Per-method lists of per-image reports, in insertion order.
class MetricTable {
public:
    void add(const std::string& method, const MetricReport& report);
    const std::vector<std::string>& methods() const noexcept { return methods_; }
    const std::vector<MetricReport>& reports(const std::string& method) const;
    /// Mean over the images of one method; infinite PSNRs are averaged as the cap.
    MetricReport mean(const std::string& method) const;
    bool empty() const noexcept { return methods_.empty(); }

    /// One row per method: "method  RE  PSNR  SSIM", aligned.
    std::string to_text() const;
    /// "method,re,psnr,ssim" header plus one row per method.
    std::string to_csv() const;

private:
    std::vector<std::string> methods_;
    std::vector<std::vector<MetricReport>> rows_;
};

std::string format_psnr(double value);

} // namespace lti
