#include <doctest.h>

#include "disk_problem.hpp"
#include "helpers.hpp"

#include <lti/error.hpp>
#include <lti/metrics.hpp>
#include <lti/phantom.hpp>
#include <lti/solver.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>

using namespace lti;
using lti::testing::dot;
using lti::testing::norm;
using lti::testing::random_image;

TEST_CASE("shrink") {
    CHECK(shrink(3.0, 1.0) == 2.0);
    CHECK(shrink(-3.0, 1.0) == -2.0);
    CHECK(shrink(-0.5, 1.0) == 0.0);
    CHECK(shrink(0.0, 0.0) == 0.0);
    CHECK(shrink(0.0, 2.0) == 0.0);
}

TEST_CASE("soft_threshold on tensors") {
    CoefficientTensor a(2, 2, std::size_t{1}), b(2, 2, std::size_t{1}, 1.0);
    a(0, 0, 0) = 3.0;
    a(0, 0, 1) = -0.5;
    a(0, 1, 0) = -4.0;
    const auto out = soft_threshold(a, b);
    CHECK(out(0, 0, 0) == 2.0);
    CHECK(out(0, 0, 1) == 0.0);
    CHECK(out(0, 1, 0) == -3.0);
    CHECK(out(0, 1, 1) == 0.0);
    b(0, 1, 1) = -1.0;
    CHECK_THROWS_AS(soft_threshold(a, b), ArgumentError);
    CHECK_THROWS_AS(soft_threshold(a, CoefficientTensor(2, 2, std::size_t{2})), ConfigError);
}

TEST_CASE("cg: identity converges in one step") {
    const LinearMap id = [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
    const auto rhs = lti::testing::random_vector(50, 1);
    const auto res = cg_solve(id, rhs, std::vector<double>(50, 0.0), 1e-10, 10);
    CHECK(res.iterations == 1);
    CHECK(res.status == CgStatus::Converged);
    for (std::size_t i = 0; i < rhs.size(); ++i) CHECK(res.x[i] == doctest::Approx(rhs[i]));
}

TEST_CASE("cg: diagonal operator") {
    const auto d = lti::testing::random_vector(40, 2);
    const LinearMap diag = [&d](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = (1.0 + d[i] * d[i]) * x[i];
    };
    const auto rhs = lti::testing::random_vector(40, 3);
    const double tol = 1e-8;
    const auto res = cg_solve(diag, rhs, std::vector<double>(40, 0.0), tol, 200);
    std::vector<double> exact(40);
    for (std::size_t i = 0; i < 40; ++i) exact[i] = rhs[i] / (1.0 + d[i] * d[i]);
    CHECK(lti::testing::rel_diff(res.x, exact) <= 10 * tol);
}

TEST_CASE("cg: random SPD system against a dense solve") {
    const Eigen::Index n = 16;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    const auto raw = lti::testing::random_vector(static_cast<std::size_t>(n * n), 5);
    for (Eigen::Index i = 0; i < n * n; ++i) b.data()[i] = raw[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd m = b.transpose() * b + Eigen::MatrixXd::Identity(n, n);
    const auto rhs = lti::testing::random_vector(static_cast<std::size_t>(n), 6);
    const Eigen::VectorXd exact = m.llt().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n));
    const LinearMap op = [&m](std::span<const double> x, std::span<double> y) {
        Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
            m * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    };
    const double tol = 1e-4;
    const auto res = cg_solve(op, rhs, std::vector<double>(rhs.size(), 0.0), tol, 100);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(res.x.data(), n);
    CHECK((x - exact).norm() / exact.norm() <= 10 * tol);
}

TEST_CASE("cg: non-finite operator reports breakdown") {
    const LinearMap bad = [](std::span<const double>, std::span<double> y) {
        for (double& v : y) v = std::numeric_limits<double>::quiet_NaN();
    };
    const auto res = cg_solve(bad, std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}, 1e-6, 10);
    CHECK(res.status == CgStatus::Breakdown);
    CHECK_THROWS_AS(cg_solve(bad, Image(2, 1.0), Image(2), 1e-6, 10), NumericalError);
}

TEST_CASE("expand_weights") {
    const ShearletSystem sys(64, ShearletSystem::default_levels(64));
    const std::vector<double> ones(sys.scale_count() + 1, 1.0);
    const auto w1 = expand_weights(ones, sys);
    CHECK(std::all_of(w1.values().begin(), w1.values().end(), [](double v) { return v == 1.0; }));

    const auto preset = admm_preset("ellipses50", sys.scale_count());
    REQUIRE(preset.scale_weights.size() == sys.scale_count() + 1);
    const auto w = expand_weights(preset.scale_weights, sys);
    for (std::size_t s = 0; s < sys.subband_count(); ++s) {
        const auto& idx = sys.subbands()[s];
        const double expect = idx.is_lowpass() ? 0.0 : std::pow(3.0, idx.scale) / 400.0;
        const auto slab = w.subband(s);
        CHECK(std::all_of(slab.begin(), slab.end(), [expect](double v) { return v == expect; }));
    }
    CHECK_THROWS_AS(expand_weights(std::vector<double>{1.0}, sys), ConfigError);
}

TEST_CASE("presets") {
    const auto e = admm_preset("ellipses50", 3);
    CHECK(e.rho0 == 0.02);
    CHECK(e.rho1 == 0.1);
    CHECK(e.rho2 == 1.0);
    CHECK(e.iterations == 50);
    CHECK(e.scale_weights == std::vector<double>{0.0, 1.0 / 400, 3.0 / 400, 9.0 / 400});
    const auto m75 = admm_preset("mayo75", 2);
    CHECK(m75.rho0 == 0.08);
    CHECK(m75.rho1 == 0.5);
    CHECK(m75.scale_weights[2] == 2.0 / 72);
    CHECK(admm_preset("mayo60", 1).rho0 == 0.5);
    CHECK(admm_preset("lotus60", 2).scale_weights[2] == 2.0 / 40);
    CHECK_THROWS_AS(admm_preset("nope", 2), ConfigError);
    CHECK(admm_preset_names().size() >= 4);
    CHECK(tv_preset("ellipses50").scale_weights.size() == 1);
}

TEST_CASE("params validation") {
    AdmmParams p;
    p.rho0 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdmmParams{};
    p.iterations = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = AdmmParams{};
    p.scale_weights = {-1.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("analysis operators are adjoint to their transposes") {
    const std::size_t n = 32;
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const ShearletAnalysis sh(sys);
    const GradientAnalysis grad(n);
    for (const AnalysisOperator* op : {static_cast<const AnalysisOperator*>(&sh), static_cast<const AnalysisOperator*>(&grad)}) {
        const Image f = random_image(n, 1);
        auto c = op->make_tensor();
        const auto cv = lti::testing::random_vector(c.values().size(), 2);
        std::copy(cv.begin(), cv.end(), c.values().begin());
        auto lf = op->make_tensor();
        op->forward(f.values(), lf.values());
        std::vector<double> ltc(n * n);
        op->adjoint(c.values(), ltc);
        CHECK(std::abs(dot(lf.values(), c.values()) - dot(f.values(), ltc)) <= 1e-10 * norm(f.values()) * norm(c.values()));
    }
    // gradient of a constant image vanishes
    auto g = grad.make_tensor();
    grad.forward(Image(n, 3.0).values(), g.values());
    CHECK(std::all_of(g.values().begin(), g.values().end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("objective") {
    lti::testing::DiskProblem p;
    const ShearletAnalysis sh(p.system);
    const Sinogram zero(p.geometry);
    CHECK(objective(Image(p.n), zero, p.radon, sh, p.params) == 0.0);
    const double half_y2 = 0.5 * dot(p.y.values(), p.y.values());
    CHECK(objective(Image(p.n), p.y, p.radon, sh, p.params) == doctest::Approx(half_y2).epsilon(1e-14));
    Image neg(p.n);
    neg(3, 3) = -1.0;
    CHECK(std::isinf(objective(neg, p.y, p.radon, sh, p.params)));
}

TEST_CASE("admm: zero data gives the zero image") {
    lti::testing::DiskProblem p;
    const ShearletAnalysis sh(p.system);
    p.params.iterations = 5;
    const auto r = admm_solve(Sinogram(p.geometry), p.radon, sh, p.params);
    CHECK(std::all_of(r.image.values().begin(), r.image.values().end(), [](double v) { return v == 0.0; }));
    CHECK(r.state.objective_history.size() == 5);
}

TEST_CASE("admm: first f-update matches a dense solve of the normal equations") {
    lti::testing::DiskProblem p;
    const ShearletAnalysis sh(p.system);
    const std::size_t pixels = p.n * p.n, rays = p.radon.ray_count();
    Eigen::MatrixXd a(rays, pixels);
    std::vector<double> e(pixels, 0.0), col(rays);
    for (std::size_t j = 0; j < pixels; ++j) {
        e[j] = 1.0;
        p.radon.forward(e, col);
        a.col(static_cast<Eigen::Index>(j)) = Eigen::Map<Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(rays));
        e[j] = 0.0;
    }
    AdmmParams params = p.params;
    params.iterations = 1;
    params.cg_tolerance = 1e-12;
    params.cg_max_iterations = 500;
    const Eigen::MatrixXd m = params.rho0 * a.transpose() * a +
                              (params.rho1 + params.rho2) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(pixels));

    // the normal operator is exactly rho0 A^T A + (rho1 + rho2) I
    const auto op = make_normal_operator(p.radon, sh, params);
    const Image x = random_image(p.n, 12);
    std::vector<double> mx(pixels);
    op(x.values(), mx);
    const Eigen::VectorXd ref = m * Eigen::Map<const Eigen::VectorXd>(x.values().data(), static_cast<Eigen::Index>(pixels));
    double worst = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) worst = std::max(worst, std::abs(mx[i] - ref[static_cast<Eigen::Index>(i)]));
    CHECK(worst <= 1e-9 * ref.cwiseAbs().maxCoeff());

    // with z = u = 0 the first right-hand side is rho0 A^T y
    const Eigen::VectorXd aty = a.transpose() * Eigen::Map<const Eigen::VectorXd>(p.y.values().data(), static_cast<Eigen::Index>(rays));
    const Eigen::VectorXd f1 = m.ldlt().solve(params.rho0 * aty);
    const auto r = admm_solve(p.y, p.radon, sh, params);
    const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(r.state.f.values().data(), static_cast<Eigen::Index>(pixels));
    CHECK((got - f1).norm() / f1.norm() <= 1e-8);
}

TEST_CASE("admm: primal residual and objective on the disk problem") {
    lti::testing::DiskProblem p;
    const ShearletAnalysis sh(p.system);
    p.params.iterations = 200;
    const auto r = admm_solve(p.y, p.radon, sh, p.params);
    CHECK(r.state.primal_residual_history.back() < 1e-3 * norm(r.state.f.values()));
    for (double v : r.state.objective_history) CHECK(std::isfinite(v));
    CHECK(r.state.objective_history.back() < r.state.objective_history.front());
    CHECK(std::all_of(r.image.values().begin(), r.image.values().end(), [](double v) { return v >= 0.0; }));
}

TEST_CASE("admm: jointly scaling data and weights scales the image") {
    lti::testing::DiskProblem p;
    const ShearletAnalysis sh(p.system);
    p.params.iterations = 30;
    // a power of two scales every floating point operation exactly
    const double c = 4.0;
    Sinogram cy = p.y;
    for (double& v : cy.values()) v *= c;
    AdmmParams cp = p.params;
    for (double& w : cp.scale_weights) w *= c;
    const auto a = admm_solve(p.y, p.radon, sh, p.params);
    const auto b = admm_solve(cy, p.radon, sh, cp);
    Image scaled = a.image;
    for (double& v : scaled.values()) v *= c;
    CHECK(lti::testing::rel_diff(b.image.values(), scaled.values()) <= 1e-12);
}

TEST_CASE("admm: l1 and TV beat FBP on limited-angle ellipses") {
    const std::size_t n = 128;
    const auto g = ScanGeometry::for_image(n, deg_to_rad(50.0));
    const RadonOperator radon(n, g);
    const ShearletSystem sys(n, ShearletSystem::default_levels(n));
    const ShearletAnalysis sh(sys);
    const GradientAnalysis grad(n);
    DatasetConfig dc;
    dc.image_size = n;
    dc.train = dc.validation = 0;
    dc.test = 3;
    dc.seed = 99;
    const auto split = make_dataset(dc);
    for (const auto& entry : split.test) {
        const Image truth = split.render(entry);
        const Sinogram y = simulate_measurements(split.renderer(entry), n, g, NoiseSpec{0.01, entry.seed});
        const double re_fbp = relative_error(fbp(y, FilterKind::RamLak, n), truth);
        const double re_l1 = relative_error(admm_solve(y, radon, sh, admm_preset("ellipses50", sys.scale_count())).image, truth);
        const double re_tv = relative_error(admm_solve(y, radon, grad, tv_preset("ellipses50")).image, truth);
        MESSAGE("FBP " << re_fbp << "  l1 " << re_l1 << "  TV " << re_tv);
        CHECK(re_l1 < re_fbp);
        CHECK(re_tv < re_fbp);
    }
}

TEST_CASE("admm: mismatched inputs are configuration errors") {
    lti::testing::DiskProblem p;
    const ShearletSystem other(64, {0});
    const ShearletAnalysis sh(other);
    CHECK_THROWS_AS(admm_solve(p.y, p.radon, sh, p.params), ConfigError);
    const GradientAnalysis grad(p.n);
    CHECK_THROWS_AS(admm_solve(Sinogram(ScanGeometry::for_image(p.n, 0.5)), p.radon, grad, tv_preset("ellipses50")), ConfigError);
}
