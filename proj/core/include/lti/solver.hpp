#pragma once

#include <lti/image.hpp>
#include <lti/shearlet.hpp>
#include <lti/tomo.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lti {

/// Hyperparameters of the ADMM scheme for
///   min_{f >= 0} ||L f||_{1,w} + 1/2 ||A f - y||^2.
struct AdmmParams {
    double rho0 = 0.02;
    double rho1 = 0.1;
    double rho2 = 1.0;
    /// Shearlets: lowpass weight followed by one weight per scale (coarse
    /// to fine). Gradient: a single weight, or one per direction.
    std::vector<double> scale_weights;
    std::size_t iterations = 50;
    double cg_tolerance = 1e-4;
    std::size_t cg_max_iterations = 30;

    void validate() const;
};

/// Named hyperparameter rows. "ellipses50": rho0 0.02, rho1 0.1, w_j = 3^j/400;
/// "mayo60": 0.5, 0.1, 2^j/400; "mayo75": 0.08, 0.5, 2^j/72; "lotus60":
/// 0.01, 0.1, 2^j/40; "disk": 0.02, 0.1, 3^j/20 (circle phantom at n = 256).
/// The lowpass weight is 0. `scale_count` sets how many
/// w_j are generated (j = 0 is the coarsest scale).
AdmmParams admm_preset(std::string_view name, std::size_t scale_count);
std::vector<std::string> admm_preset_names();

/// Total-variation parameters sharing the preset's rho values, with a
/// single gradient weight.
AdmmParams tv_preset(std::string_view name);

/// Sparsifying map L with its adjoint and Gram operator L^T L.
class AnalysisOperator {
public:
    virtual ~AnalysisOperator() = default;

    virtual std::size_t image_size() const noexcept = 0;
    virtual CoefficientTensor make_tensor() const = 0;
    virtual void forward(std::span<const double> image, std::span<double> coeffs) const = 0;
    virtual void adjoint(std::span<const double> coeffs, std::span<double> image) const = 0;
    /// True when L^T L is the identity (Parseval frames).
    virtual bool is_tight() const noexcept = 0;
    /// out = L^T L x.
    virtual void gram(std::span<const double> x, std::span<double> out) const;
    virtual CoefficientTensor expand_weights(std::span<const double> scale_weights) const = 0;
};

/// Shearlet analysis; the system must outlive this object.
class ShearletAnalysis final : public AnalysisOperator {
public:
    explicit ShearletAnalysis(const ShearletSystem& system) : system_(system) {}

    std::size_t image_size() const noexcept override { return system_.size(); }
    CoefficientTensor make_tensor() const override { return system_.make_tensor(); }
    void forward(std::span<const double> image, std::span<double> coeffs) const override {
        system_.forward(image, coeffs);
    }
    void adjoint(std::span<const double> coeffs, std::span<double> image) const override {
        system_.adjoint(coeffs, image);
    }
    bool is_tight() const noexcept override { return true; }
    void gram(std::span<const double> x, std::span<double> out) const override;
    CoefficientTensor expand_weights(std::span<const double> scale_weights) const override;

    const ShearletSystem& system() const noexcept { return system_; }

private:
    const ShearletSystem& system_;
};

/// Forward differences along columns (channel 0) and rows (channel 1),
/// zero across the last column/row (symmetric boundary). Anisotropic TV is
/// the l1 norm of its output.
class GradientAnalysis final : public AnalysisOperator {
public:
    explicit GradientAnalysis(std::size_t n) : n_(n) {}

    std::size_t image_size() const noexcept override { return n_; }
    CoefficientTensor make_tensor() const override { return CoefficientTensor(n_, n_, std::size_t{2}); }
    void forward(std::span<const double> image, std::span<double> coeffs) const override;
    void adjoint(std::span<const double> coeffs, std::span<double> image) const override;
    bool is_tight() const noexcept override { return false; }
    CoefficientTensor expand_weights(std::span<const double> scale_weights) const override;

private:
    std::size_t n_;
};

/// Per-coefficient weights: every coefficient of scale j gets w_j, the
/// lowpass gets scale_weights[0].
CoefficientTensor expand_weights(std::span<const double> scale_weights, const ShearletSystem& system);

/// Elementwise max(|a| - b, 0) * sign(a). Throws ArgumentError on b < 0.
CoefficientTensor soft_threshold(const CoefficientTensor& a, const CoefficientTensor& b);
void soft_threshold(std::span<const double> a, std::span<const double> b, double scale,
                    std::span<double> out);
inline double shrink(double a, double b) noexcept {
    const double m = std::abs(a) - b;
    return (a == 0.0 || m <= 0.0) ? 0.0 : (a > 0.0 ? m : -m);
}

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

enum class CgStatus { Converged, MaxIterations, Breakdown };

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    CgStatus status = CgStatus::Converged;
};

/// Conjugate gradients for a symmetric positive definite map. Stops when
/// ||b - Ax|| <= tol ||b|| or after max_iter steps and returns the iterate
/// with the smallest residual. A non-finite residual ends the run with
/// status Breakdown and the best finite iterate.
CgResult cg_solve(const LinearMap& op, std::span<const double> rhs, std::span<const double> warm_start,
                  double tol, std::size_t max_iter);
Image cg_solve(const LinearMap& op, const Image& rhs, const Image& warm_start, double tol,
               std::size_t max_iter);

/// x -> rho0 A^T A x + rho1 L^T L x + rho2 x (L^T L = I for tight frames).
LinearMap make_normal_operator(const RadonOperator& radon, const AnalysisOperator& analysis,
                               const AdmmParams& params);

struct SolverState {
    Image f;
    CoefficientTensor z_coeffs; ///< Pi_1 z
    Image z_image;              ///< Pi_2 z
    CoefficientTensor u_coeffs; ///< Pi_1 u (scaled dual)
    Image u_image;              ///< Pi_2 u
    std::vector<double> objective_history;
    std::vector<double> primal_residual_history;
    std::size_t cg_iterations = 0;
    std::size_t cg_warnings = 0; ///< inner solves that hit max_iter or broke down
};

struct AdmmResult {
    Image image; ///< max(f^K, 0)
    SolverState state;
};

/// ADMM with initialization f = A^T y, z = 0, u = 0 and a fixed number of
/// outer iterations. The objective of max(f^k, 0) is recorded every
/// iteration; a non-finite value aborts with NumericalError.
AdmmResult admm_solve(const Sinogram& y, const RadonOperator& radon, const AnalysisOperator& analysis,
                      const AdmmParams& params);
AdmmResult admm_solve(const Sinogram& y, const ScanGeometry& geometry, const AnalysisOperator& analysis,
                      const AdmmParams& params);

/// ||L f||_{1,w} + 1/2 ||A f - y||^2, or +inf if some f < -1e-12.
double objective(const Image& f, const Sinogram& y, const RadonOperator& radon,
                 const AnalysisOperator& analysis, const CoefficientTensor& weights);
double objective(const Image& f, const Sinogram& y, const RadonOperator& radon,
                 const AnalysisOperator& analysis, const AdmmParams& params);

} // namespace lti
