#pragma once

#include <lti/image.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace lti::testing {

inline Image random_image(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Image img(n);
    for (double& v : img.values()) v = nd(rng);
    return img;
}

inline std::vector<double> random_vector(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(len);
    for (double& x : v) x = nd(rng);
    return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
    double num = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(num) / norm(b);
}

} // namespace lti::testing
