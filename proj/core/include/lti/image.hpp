#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lti {

/// Square grayscale image stored row-major. Row 0 is the top of the image,
/// so the physical y axis points towards decreasing row index.
class Image {
public:
    Image() = default;
    explicit Image(std::size_t n, double value = 0.0, double spacing = 1.0)
        : n_(n), spacing_(spacing), data_(n * n, value) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t pixel_count() const noexcept { return data_.size(); }
    double spacing() const noexcept { return spacing_; }

    double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * n_ + col]; }
    double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * n_ + col]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t n_ = 0;
    double spacing_ = 1.0;
    std::vector<double> data_;
};

} // namespace lti
