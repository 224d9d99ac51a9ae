#pragma once

#include <cmath>
#include <cstddef>
#include <span>

// Small dense vector kernels shared by the solvers.
namespace lti::vec {

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) noexcept {
    for (double& v : x) v *= alpha;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) noexcept {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace lti::vec
