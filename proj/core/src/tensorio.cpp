#include <lti/tensorio.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

namespace lti {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'I', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 1 + 4 + 4 + 4;
constexpr std::size_t kRecordSize = 2 + 2 + 1 + 1;
constexpr std::uint32_t kMaxDim = 1u << 20;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        using U = std::make_unsigned_t<T>;
        if (bytes_.size() - pos_ < sizeof(T))
            throw TensorIoError(TensorIoErrc::Truncated, std::string("file ends inside ") + what);
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

const char* to_string(TensorIoErrc code) noexcept {
    switch (code) {
    case TensorIoErrc::BadMagic: return "bad-magic";
    case TensorIoErrc::Truncated: return "truncated";
    case TensorIoErrc::VersionMismatch: return "version-mismatch";
    case TensorIoErrc::BadKind: return "bad-kind";
    case TensorIoErrc::Malformed: return "malformed";
    case TensorIoErrc::Io: return "io";
    }
    return "unknown";
}

TensorIoError::TensorIoError(TensorIoErrc code, const std::string& what)
    : Error(std::string("tensorio ") + to_string(code) + ": " + what), code_(code) {}

void TensorFile::validate() const {
    if (static_cast<std::uint8_t>(kind) > 2) throw TensorIoError(TensorIoErrc::BadKind, "unknown kind");
    if (kind != TensorKind::Coeffs && subbands != 1)
        throw TensorIoError(TensorIoErrc::Malformed, "images and sinograms have exactly one slice");
    const std::size_t expect_records = kind == TensorKind::Coeffs ? subbands : 0;
    if (records.size() != expect_records)
        throw TensorIoError(TensorIoErrc::Malformed, "record count does not match subband count");
    const std::uint64_t count = std::uint64_t{height} * width * subbands;
    if (data.size() != count) throw TensorIoError(TensorIoErrc::Malformed, "payload size does not match H*W*S");
}

std::vector<std::uint8_t> encode_tensor(const TensorFile& file) {
    file.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + file.records.size() * kRecordSize + file.data.size() * 4);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put(out, kTensorVersion);
    put(out, static_cast<std::uint8_t>(file.kind));
    put(out, file.height);
    put(out, file.width);
    put(out, file.subbands);
    for (const auto& r : file.records) {
        put(out, r.scale);
        put(out, r.shear);
        put(out, r.cone);
        put(out, r.visible);
    }
    for (float v : file.data) put(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

TensorFile decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw TensorIoError(TensorIoErrc::Truncated, "file shorter than the magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw TensorIoError(TensorIoErrc::BadMagic, "not an LTI1 file");
    Reader in(bytes.subspan(4));
    const auto version = in.get<std::uint32_t>("header");
    if (version != kTensorVersion)
        throw TensorIoError(TensorIoErrc::VersionMismatch, "version " + std::to_string(version) + ", expected " +
                                                               std::to_string(kTensorVersion));
    TensorFile file;
    const auto kind = in.get<std::uint8_t>("header");
    if (kind > 2) throw TensorIoError(TensorIoErrc::BadKind, "kind byte " + std::to_string(kind));
    file.kind = static_cast<TensorKind>(kind);
    file.height = in.get<std::uint32_t>("header");
    file.width = in.get<std::uint32_t>("header");
    file.subbands = in.get<std::uint32_t>("header");
    if (file.height > kMaxDim || file.width > kMaxDim || file.subbands > kMaxDim)
        throw TensorIoError(TensorIoErrc::Malformed, "dimension exceeds " + std::to_string(kMaxDim));
    if (file.kind != TensorKind::Coeffs && file.subbands != 1)
        throw TensorIoError(TensorIoErrc::Malformed, "images and sinograms have exactly one slice");

    if (file.kind == TensorKind::Coeffs) {
        if (in.remaining() / kRecordSize < file.subbands)
            throw TensorIoError(TensorIoErrc::Truncated, "file ends inside subband records");
        file.records.resize(file.subbands);
        for (auto& r : file.records) {
            r.scale = in.get<std::int16_t>("record");
            r.shear = in.get<std::int16_t>("record");
            r.cone = in.get<std::int8_t>("record");
            r.visible = in.get<std::uint8_t>("record");
        }
    }
    const std::uint64_t count = std::uint64_t{file.height} * file.width * file.subbands;
    if (in.remaining() / 4 < count)
        throw TensorIoError(TensorIoErrc::Truncated, "payload holds " + std::to_string(in.remaining()) +
                                                         " bytes, expected " + std::to_string(count * 4));
    if (in.remaining() != count * 4) throw TensorIoError(TensorIoErrc::Malformed, "trailing bytes after payload");
    file.data.resize(static_cast<std::size_t>(count));
    for (auto& v : file.data) v = std::bit_cast<float>(in.get<std::uint32_t>("payload"));
    return file;
}

void write_tensor(const TensorFile& file, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(file);
    auto tmp = path;
    tmp += ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw TensorIoError(TensorIoErrc::Io, "cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw TensorIoError(TensorIoErrc::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw TensorIoError(TensorIoErrc::Io, "cannot move " + tmp.string() + ": " + ec.message());
}

TensorFile read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TensorIoError(TensorIoErrc::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

TensorFile to_tensor_file(const Image& image) {
    TensorFile f;
    f.kind = TensorKind::Image;
    f.height = f.width = static_cast<std::uint32_t>(image.size());
    f.data.assign(image.values().begin(), image.values().end());
    return f;
}

TensorFile to_tensor_file(const Sinogram& sinogram) {
    TensorFile f;
    f.kind = TensorKind::Sinogram;
    f.height = static_cast<std::uint32_t>(sinogram.angle_count());
    f.width = static_cast<std::uint32_t>(sinogram.detector_count());
    f.data.assign(sinogram.values().begin(), sinogram.values().end());
    return f;
}

TensorFile to_tensor_file(const CoefficientTensor& coeffs) {
    TensorFile f;
    f.kind = TensorKind::Coeffs;
    f.height = static_cast<std::uint32_t>(coeffs.height());
    f.width = static_cast<std::uint32_t>(coeffs.width());
    f.subbands = static_cast<std::uint32_t>(coeffs.subband_count());
    f.records.resize(coeffs.subband_count());
    const auto& meta = coeffs.subbands();
    for (std::size_t s = 0; s < f.records.size(); ++s) {
        auto& r = f.records[s];
        if (!meta.empty()) {
            r.scale = static_cast<std::int16_t>(meta[s].scale);
            r.shear = static_cast<std::int16_t>(meta[s].shear);
            r.cone = static_cast<std::int8_t>(meta[s].cone);
        }
        r.visible = coeffs.has_visibility() ? coeffs.visibility()[s] : 1;
    }
    f.data.assign(coeffs.values().begin(), coeffs.values().end());
    return f;
}

Image image_from(const TensorFile& file, double pixel_spacing) {
    file.validate();
    if (file.kind != TensorKind::Image) throw TensorIoError(TensorIoErrc::BadKind, "expected an image");
    if (file.height != file.width) throw TensorIoError(TensorIoErrc::Malformed, "images must be square");
    Image img(file.height, 0.0, pixel_spacing);
    std::copy(file.data.begin(), file.data.end(), img.values().begin());
    return img;
}

Sinogram sinogram_from(const TensorFile& file, const ScanGeometry& geometry) {
    file.validate();
    if (file.kind != TensorKind::Sinogram) throw TensorIoError(TensorIoErrc::BadKind, "expected a sinogram");
    if (file.height != geometry.angle_count || file.width != geometry.detector_count)
        throw TensorIoError(TensorIoErrc::Malformed, "sinogram dimensions do not match the geometry");
    Sinogram sino(geometry);
    std::copy(file.data.begin(), file.data.end(), sino.values().begin());
    return sino;
}

CoefficientTensor coefficients_from(const TensorFile& file) {
    file.validate();
    if (file.kind != TensorKind::Coeffs) throw TensorIoError(TensorIoErrc::BadKind, "expected coefficients");
    std::vector<SubbandIndex> meta(file.subbands);
    std::vector<std::uint8_t> flags(file.subbands);
    for (std::size_t s = 0; s < meta.size(); ++s) {
        meta[s] = {file.records[s].scale, file.records[s].shear, file.records[s].cone};
        flags[s] = file.records[s].visible;
    }
    CoefficientTensor out(file.height, file.width, std::move(meta));
    out.set_visibility(std::move(flags));
    std::copy(file.data.begin(), file.data.end(), out.values().begin());
    return out;
}

} // namespace lti
