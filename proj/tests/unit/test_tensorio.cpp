#include <doctest.h>

#include "helpers.hpp"

#include <lti/shearlet.hpp>
#include <lti/tensorio.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace lti;

namespace {

TensorFile random_coeffs(std::uint32_t h, std::uint32_t w, std::uint32_t s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TensorFile f;
    f.kind = TensorKind::Coeffs;
    f.height = h;
    f.width = w;
    f.subbands = s;
    std::uniform_int_distribution<int> small(-8, 8);
    for (std::uint32_t i = 0; i < s; ++i)
        f.records.push_back({static_cast<std::int16_t>(small(rng)), static_cast<std::int16_t>(small(rng)),
                             static_cast<std::int8_t>(small(rng) % 2), static_cast<std::uint8_t>(rng() & 1)});
    std::uniform_int_distribution<std::uint32_t> bits;
    for (std::size_t i = 0; i < std::size_t{h} * w * s; ++i) {
        float v;
        const std::uint32_t b = bits(rng) & 0x7f7fffffu; // finite, keeps NaN payloads out of equality
        std::memcpy(&v, &b, 4);
        f.data.push_back(rng() & 1 ? v : -v);
    }
    return f;
}

template <typename Fn>
TensorIoErrc code_of(Fn&& fn) {
    try {
        fn();
    } catch (const TensorIoError& e) {
        return e.code();
    }
    FAIL("no TensorIoError thrown");
    return TensorIoErrc::Io;
}

} // namespace

TEST_CASE("byte layout is fixed") {
    TensorFile f;
    f.kind = TensorKind::Coeffs;
    f.height = 1;
    f.width = 2;
    f.subbands = 1;
    f.records = {{-1, 2, -1, 1}};
    f.data = {1.0f, -2.0f};
    const auto bytes = encode_tensor(f);
    const std::vector<std::uint8_t> expect{
        'L', 'T', 'I', '1', 1, 0, 0, 0, 2, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0,
        0xff, 0xff, 2, 0, 0xff, 1,
        0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
    CHECK(bytes == expect);
}

TEST_CASE("round trip through memory and disk") {
    const auto f = random_coeffs(8, 8, 3, 1);
    CHECK(decode_tensor(encode_tensor(f)) == f);
    const auto path = std::filesystem::temp_directory_path() / "lti_tensorio_roundtrip.lti";
    write_tensor(f, path);
    CHECK(read_tensor(path) == f);
    std::filesystem::remove(path);
}

TEST_CASE("round trip of library types") {
    const Image img = lti::testing::random_image(32, 4);
    const Image back = image_from(decode_tensor(encode_tensor(to_tensor_file(img))));
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        CHECK(back.values()[i] == static_cast<double>(static_cast<float>(img.values()[i])));

    const ShearletSystem sys(32, {0});
    auto c = sys.forward(img);
    std::vector<std::uint8_t> flags(c.subband_count(), 1);
    flags[3] = 0;
    c.set_visibility(flags);
    const auto cb = coefficients_from(decode_tensor(encode_tensor(to_tensor_file(c))));
    CHECK(cb.subbands() == c.subbands());
    CHECK(cb.visibility() == flags);

    const auto g = ScanGeometry::for_image(32, 0.7);
    Sinogram s(g, 1.5);
    const auto sb = sinogram_from(to_tensor_file(s), g);
    CHECK(sb.values()[7] == 1.5);
    CHECK_THROWS_AS(sinogram_from(to_tensor_file(s), ScanGeometry::for_image(64, 0.7)), TensorIoError);
    CHECK(code_of([&] { image_from(to_tensor_file(s)); }) == TensorIoErrc::BadKind);
}

TEST_CASE("corrupt files map to distinct error codes") {
    const auto bytes = encode_tensor(random_coeffs(4, 4, 2, 9));
    auto truncated = bytes;
    truncated.pop_back();
    CHECK(code_of([&] { decode_tensor(truncated); }) == TensorIoErrc::Truncated);
    auto header_only = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10);
    CHECK(code_of([&] { decode_tensor(header_only); }) == TensorIoErrc::Truncated);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { decode_tensor(magic); }) == TensorIoErrc::BadMagic);
    auto version = bytes;
    version[4] = 2;
    CHECK(code_of([&] { decode_tensor(version); }) == TensorIoErrc::VersionMismatch);
    auto kind = bytes;
    kind[8] = 7;
    CHECK(code_of([&] { decode_tensor(kind); }) == TensorIoErrc::BadKind);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(code_of([&] { decode_tensor(trailing); }) == TensorIoErrc::Malformed);
    CHECK(code_of([] { read_tensor("/nonexistent/dir/x.lti"); }) == TensorIoErrc::Io);
}

TEST_CASE("invalid in-memory files are rejected before writing") {
    auto f = random_coeffs(2, 2, 2, 3);
    f.data.pop_back();
    CHECK(code_of([&] { encode_tensor(f); }) == TensorIoErrc::Malformed);
    f = random_coeffs(2, 2, 2, 3);
    f.records.pop_back();
    CHECK(code_of([&] { encode_tensor(f); }) == TensorIoErrc::Malformed);
}
