#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace lti::detail {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

template <typename T>
FftwBuffer<T>::FftwBuffer(std::size_t count)
    : ptr_(static_cast<T*>(fftw_malloc(sizeof(T) * (count == 0 ? 1 : count)))), size_(count) {
    if (!ptr_) throw std::bad_alloc();
    for (std::size_t i = 0; i < count; ++i) ptr_[i] = T{};
}

template <typename T>
void FftwBuffer<T>::Free::operator()(T* p) const noexcept {
    fftw_free(p);
}

template class FftwBuffer<double>;
template class FftwBuffer<std::complex<double>>;

Fft2::Fft2(std::size_t n) : n_(n) {
    RealBuffer real(n * n);
    ComplexBuffer spec(n * (n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    const int ni = static_cast<int>(n);
    forward_plan_ = fftw_plan_dft_r2c_2d(ni, ni, real.data(), as_fftw(spec.data()), FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_2d(ni, ni, as_fftw(spec.data()), real.data(), FFTW_ESTIMATE);
}

Fft2::~Fft2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft2::forward(const RealBuffer& in, ComplexBuffer& out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                         as_fftw(out.data()));
}

void Fft2::inverse(ComplexBuffer& in, RealBuffer& out) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(in.data()), out.data());
}

Fft1::Fft1(std::size_t n) : n_(n) {
    RealBuffer real(n);
    ComplexBuffer spec(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    const int ni = static_cast<int>(n);
    forward_plan_ = fftw_plan_dft_r2c_1d(ni, real.data(), as_fftw(spec.data()), FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(ni, as_fftw(spec.data()), real.data(), FFTW_ESTIMATE);
}

Fft1::~Fft1() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft1::forward(const RealBuffer& in, ComplexBuffer& out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                         as_fftw(out.data()));
}

void Fft1::inverse(ComplexBuffer& in, RealBuffer& out) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(in.data()), out.data());
}

} // namespace lti::detail
