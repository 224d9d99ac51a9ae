#include <doctest.h>

#include "helpers.hpp"

#include <lti/error.hpp>
#include <lti/metrics.hpp>
#include <lti/phantom.hpp>

#include <cmath>
#include <limits>

using namespace lti;

namespace {

Image offset(const Image& img, double a, double b) {
    Image out = img;
    for (double& v : out.values()) v = a * v + b;
    return out;
}

} // namespace

TEST_CASE("relative error") {
    const Image t = lti::testing::random_image(16, 1);
    CHECK(relative_error(t, t) == 0.0);
    CHECK(relative_error(Image(16), t) == doctest::Approx(1.0));
    CHECK(relative_error(offset(t, 2.0, 0.0), t) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_error(t, Image(16)), UndefinedMetricError);
    CHECK_THROWS_AS(relative_error(t, Image(8)), ConfigError);
}

TEST_CASE("relative error obeys the triangle inequality") {
    const Image t = lti::testing::random_image(16, 2);
    const Image x = lti::testing::random_image(16, 3), y = lti::testing::random_image(16, 4);
    // ||x - t|| <= ||x - y|| + ||y - t||, each term rescaled to its reference
    const double scale = lti::testing::norm(y.values()) / lti::testing::norm(t.values());
    CHECK(relative_error(x, t) <= relative_error(x, y) * scale + relative_error(y, t) + 1e-12);
}

TEST_CASE("psnr") {
    const Image t = make_circle(32, 0.3, 2.0);
    CHECK(std::isinf(psnr(t, t)));
    CHECK(format_psnr(psnr(t, t)) == "99.00");
    // uniform error e: 20 log10(peak / |e|)
    CHECK(psnr(offset(t, 1.0, 0.1), t) == doctest::Approx(20.0 * std::log10(2.0 / 0.1)));
    // MSE equal to peak^2 gives 0 dB
    CHECK(psnr(offset(t, 1.0, 2.0), t) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(psnr(offset(t, 1.0, 0.1), t, 1.0) == doctest::Approx(20.0 * std::log10(1.0 / 0.1)));
    // strictly decreasing in MSE
    CHECK(psnr(offset(t, 1.0, 0.1), t) > psnr(offset(t, 1.0, 0.2), t));
}

TEST_CASE("ssim") {
    const Image disk = make_circle(64, 0.25, 1.0);
    CHECK(ssim(disk, disk) == doctest::Approx(1.0));
    const double shifted = ssim(offset(disk, 1.0, 0.5), disk);
    CHECK(shifted < 1.0);
    // Values from an independent implementation (Gaussian filtering with
    // nearest-edge extension, truncated at radius 5).
    CHECK(shifted == doctest::Approx(0.21520496876519285).epsilon(1e-9));
    CHECK(ssim(offset(disk, 0.8, 0.0), disk) == doctest::Approx(0.9873630815779548).epsilon(1e-9));
    // Negating a disk on a zero background leaves the background identical,
    // which dominates the mean.
    CHECK(ssim(offset(disk, -1.0, 0.0), disk) == doctest::Approx(0.7329304394800837).epsilon(1e-9));
    // With a positive background everywhere, negation gives SSIM < 0.
    const Image lifted = offset(disk, 1.0, 0.5);
    const double neg = ssim(offset(lifted, -1.0, 0.0), lifted);
    CHECK(neg < 0.0);
    CHECK(neg == doctest::Approx(-0.536033173291157).epsilon(1e-9));
}

TEST_CASE("ssim stays in [-1, 1] and is symmetric for equal ranges") {
    const Image a = lti::testing::random_image(32, 7), b = lti::testing::random_image(32, 8);
    const double s = ssim(a, b);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    const Image c = offset(a, -1.0, 0.0);
    CHECK(ssim(c, a) == doctest::Approx(ssim(a, c)));
}

TEST_CASE("metric table") {
    MetricTable t;
    CHECK(t.empty());
    t.add("fbp", {0.8, 20.0, 0.5});
    t.add("fbp", {0.6, std::numeric_limits<double>::infinity(), 0.7});
    t.add("l1", {0.2, 30.0, 0.9});
    CHECK(t.methods() == std::vector<std::string>{"fbp", "l1"});
    const auto m = t.mean("fbp");
    CHECK(m.re == doctest::Approx(0.7));
    CHECK(m.psnr == doctest::Approx(0.5 * (20.0 + kPsnrTextCap)));
    CHECK(m.ssim == doctest::Approx(0.6));
    CHECK(t.to_csv() == "method,re,psnr,ssim\nfbp,0.700000,59.50,0.600000\nl1,0.200000,30.00,0.900000\n");
    const auto text = t.to_text();
    CHECK(text.find("method") == 0);
    CHECK(text.find("l1 ") != std::string::npos);
    CHECK_THROWS_AS(t.mean("tv"), ConfigError);
}
