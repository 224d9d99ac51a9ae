#include <doctest.h>

#include "helpers.hpp"

#include <lti/error.hpp>
#include <lti/shearlet.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace lti;
using lti::testing::dot;
using lti::testing::norm;
using lti::testing::random_image;
using lti::testing::rel_diff;

namespace {

// Def.-style enumeration: lowpass plus, per scale and cone, every shear
// with |k| <= 2^s.
std::size_t enumerate_indices(const std::vector<int>& levels) {
    std::size_t count = 1;
    for (int s : levels)
        for (int cone = 0; cone < 2; ++cone)
            for (int k = -(1 << s); k <= (1 << s); ++k) ++count;
    return count;
}

} // namespace

TEST_CASE("reference configuration has 59 subbands") {
    const auto ref = ShearletSystem::reference_levels();
    CHECK(ref.size() == 5);
    CHECK(ShearletSystem::count_subbands(ref) == 59);
    const ShearletSystem sys(512, ref);
    CHECK(sys.subband_count() == 59);
    CHECK(sys.scale_count() == 5);
}

TEST_CASE("subband count matches brute-force enumeration") {
    CHECK(ShearletSystem::count_subbands(std::vector<int>{0}) == enumerate_indices({0}));
    CHECK(ShearletSystem::count_subbands(std::vector<int>{0}) == 7);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> len(1, 5), lvl(0, 3);
    for (int t = 0; t < 5; ++t) {
        std::vector<int> levels(static_cast<std::size_t>(len(rng)));
        for (int& s : levels) s = lvl(rng);
        CHECK(ShearletSystem::count_subbands(levels) == enumerate_indices(levels));
    }
}

TEST_CASE("default levels follow the image size") {
    CHECK(ShearletSystem::default_scale_count(32) == 1);
    CHECK(ShearletSystem::default_scale_count(64) == 2);
    CHECK(ShearletSystem::default_scale_count(128) == 3);
    CHECK(ShearletSystem::default_scale_count(256) == 4);
    CHECK(ShearletSystem::default_scale_count(512) == 5);
    CHECK(ShearletSystem::default_levels(512) == ShearletSystem::reference_levels());
}

TEST_CASE("invalid systems are rejected") {
    CHECK_THROWS_AS(ShearletSystem(16, {0}), ConfigError);
    CHECK_THROWS_AS(ShearletSystem(33, {0}), ConfigError);
    CHECK_THROWS_AS(ShearletSystem(64, {}), ConfigError);
    CHECK_THROWS_AS(ShearletSystem(64, {-1}), ConfigError);
    CHECK_THROWS_AS(ShearletSystem(32, {0, 0, 1, 2}), ConfigError);
}

TEST_CASE("windows form a partition of unity") {
    for (std::size_t n : {32, 64, 128}) {
        const ShearletSystem sys(n, ShearletSystem::default_levels(n));
        const std::size_t len = n * sys.spectrum_width();
        std::vector<double> total(len, 0.0);
        for (std::size_t s = 0; s < sys.subband_count(); ++s) {
            const auto w = sys.window(s);
            for (std::size_t i = 0; i < len; ++i) total[i] += w[i] * w[i];
        }
        double worst = 0.0;
        for (double t : total) worst = std::max(worst, std::abs(t - 1.0));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("subband order: lowpass, coarse to fine, horizontal then vertical, shear ascending") {
    const ShearletSystem sys(64, {0, 1});
    const auto& idx = sys.subbands();
    REQUIRE(idx.size() == 1 + 6 + 10);
    CHECK(idx[0].is_lowpass());
    CHECK(idx[1] == SubbandIndex{0, -1, 1});
    CHECK(idx[3] == SubbandIndex{0, 1, 1});
    CHECK(idx[4] == SubbandIndex{0, -1, -1});
    CHECK(idx[7] == SubbandIndex{1, -2, 1});
    CHECK(idx[16] == SubbandIndex{1, 2, -1});
    CHECK(sys.index_of(SubbandIndex{1, 0, -1}) == 14);
    CHECK(sys.scale_members(1).size() == 10);
}

TEST_CASE("directional windows stay in their cone") {
    const ShearletSystem sys(64, ShearletSystem::default_levels(64));
    const std::size_t w = sys.spectrum_width();
    for (std::size_t s = 1; s < sys.subband_count(); ++s) {
        const int cone = sys.subbands()[s].cone;
        const auto win = sys.window(s);
        std::size_t outside = 0;
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                if (win[r * w + c] * win[r * w + c] <= 1e-12) continue;
                const auto [fx, fy] = sys.frequency(r, c);
                const double along = cone == 1 ? std::abs(fx) : std::abs(fy);
                const double across = cone == 1 ? std::abs(fy) : std::abs(fx);
                if (across > along + 1.0) ++outside;
            }
        CHECK(outside == 0);
    }
}

TEST_CASE("forward and adjoint: zero maps to zero") {
    const ShearletSystem sys(32, {1});
    const auto c = sys.forward(Image(32));
    CHECK(std::all_of(c.values().begin(), c.values().end(), [](double v) { return v == 0.0; }));
    const auto img = sys.adjoint(sys.make_tensor());
    CHECK(std::all_of(img.values().begin(), img.values().end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("Parseval: norm preservation and perfect reconstruction") {
    for (std::size_t n : {64, 128}) {
        const ShearletSystem sys(n, ShearletSystem::default_levels(n));
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Image f = random_image(n, seed);
            const auto c = sys.forward(f);
            CHECK(std::abs(norm(c.values()) - norm(f.values())) <= 1e-6 * norm(f.values()));
            CHECK(rel_diff(sys.adjoint(c).values(), f.values()) <= 1e-6);
        }
    }
}

TEST_CASE("forward/adjoint inner product identity") {
    const std::size_t n = 64;
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const Image f = random_image(n, 3);
    auto c = sys.make_tensor();
    const auto rv = lti::testing::random_vector(c.values().size(), 4);
    std::copy(rv.begin(), rv.end(), c.values().begin());
    const double lhs = dot(sys.forward(f).values(), c.values());
    const double rhs = dot(f.values(), sys.adjoint(c).values());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * norm(f.values()) * norm(c.values()));
}

TEST_CASE("a sinusoid inside one window lands in that subband") {
    const std::size_t n = 64;
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const std::size_t w = sys.spectrum_width();
    const std::size_t target = sys.index_of(SubbandIndex{1, 1, 1});
    // Frequency sample where the window is largest (away from the Nyquist
    // lines and the zero column so the cosine is a clean pair of peaks).
    const auto win = sys.window(target);
    std::size_t best_r = 0, best_c = 0;
    double best = -1.0;
    for (std::size_t r = 1; r < n; ++r)
        for (std::size_t c = 1; c + 1 < w; ++c)
            if (r != n / 2 && win[r * w + c] > best) {
                best = win[r * w + c];
                best_r = r;
                best_c = c;
            }
    REQUIRE(best * best > 0.99);
    Image f(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            f(r, c) = std::cos(2.0 * std::numbers::pi * (static_cast<double>(best_r * r) + static_cast<double>(best_c * c)) /
                               static_cast<double>(n));
    const auto coeffs = sys.forward(f);
    double total = 0.0, in_target = 0.0;
    for (std::size_t s = 0; s < coeffs.subband_count(); ++s) {
        const double e = dot(coeffs.subband(s), coeffs.subband(s));
        total += e;
        if (s == target) in_target = e;
    }
    CHECK(in_target / total > 0.99);
}

TEST_CASE("orientation of directional subbands") {
    const ShearletSystem sys(128, ShearletSystem::default_levels(128));
    for (int j = 0; j < static_cast<int>(sys.scale_count()); ++j) {
        const int kmax = 1 << sys.shearing_levels()[static_cast<std::size_t>(j)];
        CHECK(sys.orientation({j, 0, 1}) == 0.0);
        CHECK(sys.orientation({j, 0, -1}) == doctest::Approx(std::numbers::pi / 2));
        CHECK(sys.orientation({j, kmax, 1}) == doctest::Approx(std::numbers::pi / 4));
        CHECK(sys.orientation({j, -kmax, 1}) == doctest::Approx(-std::numbers::pi / 4));
        CHECK(std::abs(sys.orientation({j, kmax, -1})) == doctest::Approx(std::numbers::pi / 4));
        CHECK(std::abs(sys.orientation({j, -kmax, -1})) == doctest::Approx(std::numbers::pi / 4));
    }
    CHECK_THROWS_AS(sys.orientation(SubbandIndex::lowpass()), ArgumentError);
    CHECK_THROWS_AS(subband_orientation(sys, SubbandIndex{0, 99, 1}), ArgumentError);
}

TEST_CASE("size mismatch is a configuration error") {
    const ShearletSystem sys(32, {0});
    CHECK_THROWS_AS(sys.forward(Image(64)), ConfigError);
    CHECK_THROWS_AS(sys.adjoint(CoefficientTensor(32, 32, std::size_t{3})), ConfigError);
}
