#include <doctest.h>

#include <lti/config.hpp>
#include <lti/error.hpp>

using namespace lti;

TEST_CASE("key=value parsing") {
    const auto c = Config::parse("# comment\n\n image_size = 64 \nmethods=fbp, l1-shearlet,,tv\nnoise=0.02\nflag=yes\n");
    CHECK(c.get_uint("image_size") == 64);
    CHECK(c.get_list("methods") == std::vector<std::string>{"fbp", "l1-shearlet", "tv"});
    CHECK(c.get_double("noise") == 0.02);
    CHECK(c.get_bool("flag", false));
    CHECK(c.get("missing", "x") == "x");
    CHECK(c.get_uint("missing", 5) == 5);
    CHECK_THROWS_AS(c.get("missing"), ConfigError);
    CHECK_THROWS_AS(c.get_uint("noise"), ConfigError);
    CHECK_THROWS_AS(c.get_double("methods"), ConfigError);
    CHECK_THROWS_AS(c.require_known({"image_size"}), ConfigError);
    CHECK_NOTHROW(c.require_known({"image_size", "methods", "noise", "flag"}));
}

TEST_CASE("malformed lines") {
    CHECK_THROWS_AS(Config::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("=3\n"), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), ConfigError);
}
