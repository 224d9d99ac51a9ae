#pragma once

#include <lti/error.hpp>
#include <lti/image.hpp>
#include <lti/shearlet.hpp>
#include <lti/tomo.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lti {

// On-disk layout, all integers little-endian:
//   "LTI1"  u32 version  u8 kind  u32 H  u32 W  u32 S
//   S x { i16 scale  i16 shear  i8 cone  u8 visible }   (coeffs only)
//   H*W*S float32, row-major within a subband, subband-major

inline constexpr std::uint32_t kTensorVersion = 1;

enum class TensorKind : std::uint8_t { Image = 0, Sinogram = 1, Coeffs = 2 };

enum class TensorIoErrc { BadMagic, Truncated, VersionMismatch, BadKind, Malformed, Io };

const char* to_string(TensorIoErrc code) noexcept;

class TensorIoError : public Error {
public:
    TensorIoError(TensorIoErrc code, const std::string& what);
    TensorIoErrc code() const noexcept { return code_; }

private:
    TensorIoErrc code_;
};

struct SubbandRecord {
    std::int16_t scale = -1;
    std::int16_t shear = 0;
    std::int8_t cone = 0;
    std::uint8_t visible = 1;
    bool operator==(const SubbandRecord&) const = default;
};

struct TensorFile {
    TensorKind kind = TensorKind::Image;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t subbands = 1;
    std::vector<SubbandRecord> records; ///< empty unless kind == Coeffs
    std::vector<float> data;

    /// Throws TensorIoError(Malformed) when sizes disagree.
    void validate() const;
    bool operator==(const TensorFile&) const = default;
};

std::vector<std::uint8_t> encode_tensor(const TensorFile& file);
TensorFile decode_tensor(std::span<const std::uint8_t> bytes);

/// Writes to a temporary sibling and renames, so readers never observe a
/// partial file.
void write_tensor(const TensorFile& file, const std::filesystem::path& path);
TensorFile read_tensor(const std::filesystem::path& path);

TensorFile to_tensor_file(const Image& image);
TensorFile to_tensor_file(const Sinogram& sinogram);
/// Coefficient tensors without visibility flags are written as all visible.
TensorFile to_tensor_file(const CoefficientTensor& coeffs);

Image image_from(const TensorFile& file, double pixel_spacing = 1.0);
/// The geometry is not stored; its dimensions must match the file.
Sinogram sinogram_from(const TensorFile& file, const ScanGeometry& geometry);
CoefficientTensor coefficients_from(const TensorFile& file);

} // namespace lti
