#include <lti/metrics.hpp>

#include <lti/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lti {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.size() != b.size()) throw ConfigError(std::string(what) + ": image sizes differ");
    if (a.size() == 0) throw ConfigError(std::string(what) + ": empty image");
}

constexpr int kRadius = 5;

std::array<double, 2 * kRadius + 1> gaussian_taps() {
    std::array<double, 2 * kRadius + 1> w{};
    double sum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        w[static_cast<std::size_t>(i + kRadius)] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        sum += w[static_cast<std::size_t>(i + kRadius)];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable Gaussian filter with replicated borders.
std::vector<double> blur(const std::vector<double>& in, std::size_t n) {
    static const auto taps = gaussian_taps();
    const auto clampi = [n](std::ptrdiff_t i) {
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
    };
    std::vector<double> tmp(in.size()), out(in.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int k = -kRadius; k <= kRadius; ++k)
                acc += taps[static_cast<std::size_t>(k + kRadius)] * in[r * n + clampi(static_cast<std::ptrdiff_t>(c) + k)];
            tmp[r * n + c] = acc;
        }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int k = -kRadius; k <= kRadius; ++k)
                acc += taps[static_cast<std::size_t>(k + kRadius)] * tmp[clampi(static_cast<std::ptrdiff_t>(r) + k) * n + c];
            out[r * n + c] = acc;
        }
    return out;
}

} // namespace

double relative_error(const Image& recon, const Image& truth) {
    require_same_shape(recon, truth, "relative_error");
    double num = 0.0;
    double den = 0.0;
    const auto a = recon.values();
    const auto b = truth.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    if (den == 0.0) throw UndefinedMetricError("relative error against a zero image");
    return std::sqrt(num / den);
}

double psnr(const Image& recon, const Image& truth, std::optional<double> peak) {
    require_same_shape(recon, truth, "psnr");
    const auto a = recon.values();
    const auto b = truth.values();
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    const double p = peak ? *peak : *std::max_element(b.begin(), b.end());
    if (!(p > 0.0)) throw UndefinedMetricError("psnr needs a positive peak");
    return 10.0 * std::log10(p * p / mse);
}

double ssim(const Image& recon, const Image& truth) {
    require_same_shape(recon, truth, "ssim");
    const std::size_t n = truth.size();
    const auto a = recon.values();
    const auto b = truth.values();
    const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
    const double range = *hi > *lo ? *hi - *lo : 1.0;
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = blur(x, n), my = blur(y, n);
    const auto sxx = blur(xx, n), syy = blur(yy, n), sxy = blur(xy, n);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(x.size());
}

MetricReport evaluate(const Image& recon, const Image& truth) {
    return {relative_error(recon, truth), psnr(recon, truth), ssim(recon, truth)};
}

void MetricTable::add(const std::string& method, const MetricReport& report) {
    auto it = std::find(methods_.begin(), methods_.end(), method);
    if (it == methods_.end()) {
        methods_.push_back(method);
        rows_.emplace_back();
        rows_.back().push_back(report);
        return;
    }
    rows_[static_cast<std::size_t>(it - methods_.begin())].push_back(report);
}

const std::vector<MetricReport>& MetricTable::reports(const std::string& method) const {
    auto it = std::find(methods_.begin(), methods_.end(), method);
    if (it == methods_.end()) throw ConfigError("no results for method '" + method + "'");
    return rows_[static_cast<std::size_t>(it - methods_.begin())];
}

MetricReport MetricTable::mean(const std::string& method) const {
    const auto& list = reports(method);
    if (list.empty()) throw UndefinedMetricError("no images for method '" + method + "'");
    MetricReport m;
    for (const auto& r : list) {
        m.re += r.re;
        m.psnr += std::min(r.psnr, kPsnrTextCap);
        m.ssim += r.ssim;
    }
    const double k = static_cast<double>(list.size());
    m.re /= k;
    m.psnr /= k;
    m.ssim /= k;
    return m;
}

std::string format_psnr(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::min(value, kPsnrTextCap));
    return buf;
}

std::string MetricTable::to_text() const {
    std::size_t width = 6;
    for (const auto& m : methods_) width = std::max(width, m.size());
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s\n", static_cast<int>(width), "method", "RE", "PSNR", "SSIM");
    out += buf;
    for (const auto& m : methods_) {
        const auto r = mean(m);
        std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %8s  %8.4f\n", static_cast<int>(width), m.c_str(), r.re,
                      format_psnr(r.psnr).c_str(), r.ssim);
        out += buf;
    }
    return out;
}

std::string MetricTable::to_csv() const {
    std::string out = "method,re,psnr,ssim\n";
    char buf[160];
    for (const auto& m : methods_) {
        const auto r = mean(m);
        std::snprintf(buf, sizeof buf, "%s,%.6f,%s,%.6f\n", m.c_str(), r.re, format_psnr(r.psnr).c_str(), r.ssim);
        out += buf;
    }
    return out;
}

} // namespace lti
