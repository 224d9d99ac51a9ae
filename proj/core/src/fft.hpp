#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace lti::detail {

/// fftw_malloc-backed array; FFTW's new-array execute interface needs
/// buffers with the same alignment as the ones the plan was made with.
template <typename T>
class FftwBuffer {
public:
    FftwBuffer() = default;
    explicit FftwBuffer(std::size_t count);
    FftwBuffer(FftwBuffer&&) noexcept = default;
    FftwBuffer& operator=(FftwBuffer&&) noexcept = default;

    T* data() noexcept { return ptr_.get(); }
    const T* data() const noexcept { return ptr_.get(); }
    std::size_t size() const noexcept { return size_; }
    T& operator[](std::size_t i) noexcept { return ptr_[i]; }
    const T& operator[](std::size_t i) const noexcept { return ptr_[i]; }
    std::span<T> span() noexcept { return {ptr_.get(), size_}; }
    std::span<const T> span() const noexcept { return {ptr_.get(), size_}; }

private:
    struct Free {
        void operator()(T* p) const noexcept;
    };
    std::unique_ptr<T[], Free> ptr_;
    std::size_t size_ = 0;
};

using RealBuffer = FftwBuffer<double>;
using ComplexBuffer = FftwBuffer<std::complex<double>>;

/// Unnormalized 2D real-to-complex transform of an n x n row-major grid.
/// The half spectrum has n rows and n/2 + 1 columns. Plans are immutable
/// after construction, so execute() may be called concurrently with
/// distinct buffers.
class Fft2 {
public:
    explicit Fft2(std::size_t n);
    ~Fft2();
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t half_width() const noexcept { return n_ / 2 + 1; }
    std::size_t spectrum_size() const noexcept { return n_ * half_width(); }

    void forward(const RealBuffer& in, ComplexBuffer& out) const;
    /// Destroys `in` (FFTW c2r semantics). Output is scaled by n*n.
    void inverse(ComplexBuffer& in, RealBuffer& out) const;

private:
    std::size_t n_;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

/// Unnormalized 1D real-to-complex transform of length n.
class Fft1 {
public:
    explicit Fft1(std::size_t n);
    ~Fft1();
    Fft1(const Fft1&) = delete;
    Fft1& operator=(const Fft1&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

    void forward(const RealBuffer& in, ComplexBuffer& out) const;
    void inverse(ComplexBuffer& in, RealBuffer& out) const;

private:
    std::size_t n_;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

} // namespace lti::detail
