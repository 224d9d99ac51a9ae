// Computes the reference minimum of the disk problem in disk_problem.hpp
// with a primal-dual hybrid gradient method. The printed value is pasted
// into the acceptance suite; rerun only when the discretization changes.
//
//   min_{f >= 0}  ||SH f||_{1,w} + 1/2 ||A f - y||^2
//
// K = [SH; A], F(p, q) = ||p||_{1,w} + 1/2||q - y||^2, G = indicator(f >= 0).

#include "disk_problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

int main(int argc, char** argv) {
    const long iterations = argc > 1 ? std::atol(argv[1]) : 100000;
    lti::testing::DiskProblem p;
    const std::size_t pixels = p.n * p.n;
    const std::size_t rays = p.radon.ray_count();
    const lti::ShearletAnalysis sh(p.system);
    const auto w = sh.expand_weights(p.params.scale_weights);
    const std::size_t ncoef = w.values().size();
    const auto yv = p.y.values();

    // ||A||^2 by power iteration; ||SH|| = 1.
    std::vector<double> x(pixels), ax(pixels), tmp(rays);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (double& v : x) v = nd(rng);
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        const double nx = std::sqrt(dot(x, x));
        for (double& v : x) v /= nx;
        p.radon.forward(x, tmp);
        p.radon.adjoint(tmp, ax);
        lam = dot(x, ax);
        x = ax;
    }
    const double knorm = std::sqrt(1.0 + lam) * 1.01;
    const double tau = 1.0 / knorm;
    const double sigma = 1.0 / knorm;

    std::vector<double> f(pixels, 0.0), fbar(pixels, 0.0), fold(pixels);
    std::vector<double> dp(ncoef, 0.0), dq(rays, 0.0), kp(ncoef), kq(rays), kt(pixels), kt2(pixels);
    const auto wv = w.values();
    const auto objective = [&](const std::vector<double>& g) {
        lti::Image img(p.n);
        std::copy(g.begin(), g.end(), img.values().begin());
        return lti::objective(img, p.y, p.radon, sh, w);
    };

    for (long k = 0; k < iterations; ++k) {
        // dual ascent on both blocks
        sh.forward(fbar, kp);
        p.radon.forward(fbar, kq);
        for (std::size_t i = 0; i < ncoef; ++i) dp[i] = std::clamp(dp[i] + sigma * kp[i], -wv[i], wv[i]);
        for (std::size_t i = 0; i < rays; ++i) dq[i] = (dq[i] + sigma * (kq[i] - yv[i])) / (1.0 + sigma);
        // projected primal descent
        sh.adjoint(dp, kt);
        p.radon.adjoint(dq, kt2);
        fold = f;
        for (std::size_t i = 0; i < pixels; ++i) f[i] = std::max(f[i] - tau * (kt[i] + kt2[i]), 0.0);
        for (std::size_t i = 0; i < pixels; ++i) fbar[i] = 2.0 * f[i] - fold[i];
        if ((k + 1) % 10000 == 0) std::printf("iter %ld objective %.12e\n", k + 1, objective(f));
    }
    std::printf("reference minimum %.12e\n", objective(f));
    return 0;
}
