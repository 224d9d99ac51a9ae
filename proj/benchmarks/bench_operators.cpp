#include <lti/phantom.hpp>
#include <lti/shearlet.hpp>
#include <lti/solver.hpp>
#include <lti/tomo.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace lti;

namespace {

Image noise_image(std::size_t n) {
    std::mt19937_64 rng(n);
    std::normal_distribution<double> nd;
    Image img(n);
    for (double& v : img.values()) v = nd(rng);
    return img;
}

void BM_RadonForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const RadonOperator radon(n, ScanGeometry::for_image(n, deg_to_rad(50.0)));
    const Image f = noise_image(n);
    Sinogram y(radon.geometry());
    for (auto _ : state) {
        radon.forward(f.values(), y.values());
        benchmark::DoNotOptimize(y.values().data());
    }
}

void BM_RadonAdjoint(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const RadonOperator radon(n, ScanGeometry::for_image(n, deg_to_rad(50.0)));
    const Sinogram y = radon.forward(noise_image(n));
    Image f(n);
    for (auto _ : state) {
        radon.adjoint(y.values(), f.values());
        benchmark::DoNotOptimize(f.values().data());
    }
}

void BM_ShearletForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const Image f = noise_image(n);
    CoefficientTensor c = sys.make_tensor();
    for (auto _ : state) {
        sys.forward(f.values(), c.values());
        benchmark::DoNotOptimize(c.values().data());
    }
    state.counters["subbands"] = static_cast<double>(sys.subband_count());
}

void BM_ShearletAdjoint(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const CoefficientTensor c = sys.forward(noise_image(n));
    Image f(n);
    for (auto _ : state) {
        sys.adjoint(c.values(), f.values());
        benchmark::DoNotOptimize(f.values().data());
    }
}

// One outer ADMM iteration on the circle problem, inner CG included.
void BM_AdmmIteration(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ScanGeometry geometry = ScanGeometry::for_image(n, deg_to_rad(50.0));
    const RadonOperator radon(n, geometry);
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const Sinogram y = simulate_measurements(circle_renderer(0.25, 1.0), n, geometry, NoiseSpec{0.01, 1});
    AdmmParams p = admm_preset("ellipses50", sys.scale_count());
    p.iterations = 1;
    const ShearletAnalysis analysis(sys);
    for (auto _ : state) benchmark::DoNotOptimize(admm_solve(y, radon, analysis, p).image.values().data());
}

} // namespace

BENCHMARK(BM_RadonForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadonAdjoint)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShearletForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShearletAdjoint)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdmmIteration)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
