#pragma once

#include <lti/config.hpp>
#include <lti/error.hpp>
#include <lti/image.hpp>
#include <lti/metrics.hpp>
#include <lti/shearlet.hpp>
#include <lti/solver.hpp>
#include <lti/tomo.hpp>
#include <lti/visibility.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lti {

struct Step1Result {
    Image f_star;
    CoefficientTensor coeffs; ///< SH(f*)
    SolverState state;
};

/// l1-shearlet reconstruction followed by the forward transform.
Step1Result step1(const Sinogram& y, const RadonOperator& radon, const ShearletSystem& system,
                  const AdmmParams& params);

/// Estimates invisible coefficients from a tensor whose visibility flags
/// are set. Implementations may return anything of the right shape; step2
/// masks the result.
class Inferencer {
public:
    virtual ~Inferencer() = default;
    virtual std::string name() const = 0;
    virtual CoefficientTensor infer(const CoefficientTensor& coeffs) const = 0;
};

class ZeroInferencer final : public Inferencer {
public:
    std::string name() const override { return "zero"; }
    CoefficientTensor infer(const CoefficientTensor& coeffs) const override;
};

/// Returns SH(truth): the best any inferencer could do.
class OracleInferencer final : public Inferencer {
public:
    OracleInferencer(const ShearletSystem& system, Image truth);
    std::string name() const override { return "oracle"; }
    CoefficientTensor infer(const CoefficientTensor& coeffs) const override;

private:
    const ShearletSystem& system_;
    CoefficientTensor truth_coeffs_;
};

enum class InferenceErrc { SpawnFailed, NonzeroExit, MalformedOutput, Timeout };

class InferenceError : public Error {
public:
    InferenceError(InferenceErrc code, const std::string& what) : Error(what), code_(code) {}
    InferenceErrc code() const noexcept { return code_; }

private:
    InferenceErrc code_;
};

struct ExternalCommand {
    /// Run through /bin/sh -c after replacing {in} and {out} with quoted paths.
    std::string command_template;
    /// LTI_EXCHANGE_DIR, when set, takes precedence.
    std::filesystem::path exchange_dir;
    std::chrono::milliseconds timeout{std::chrono::minutes(10)};
    bool keep_files = false;
};

std::filesystem::path resolve_exchange_dir(const std::filesystem::path& configured);

/// Writes the input tensor to the exchange directory, runs the command and
/// reads the output tensor back.
class ExternalInferencer final : public Inferencer {
public:
    explicit ExternalInferencer(ExternalCommand command);
    std::string name() const override { return "external"; }
    CoefficientTensor infer(const CoefficientTensor& coeffs) const override;

private:
    ExternalCommand command_;
};

/// F = inferencer(coeffs with mask flags), zeroed on the visible subbands.
CoefficientTensor step2(const CoefficientTensor& coeffs, const VisibilityMask& mask, const Inferencer& inferencer);

/// Entrywise selection of the two disjointly supported tensors. Throws
/// ContractError if both are nonzero at the same position.
CoefficientTensor combine(const CoefficientTensor& coeffs_vis, const CoefficientTensor& invisible);

/// SH^T(combine(coeffs_vis, F)).
Image step3(const CoefficientTensor& coeffs_vis, const CoefficientTensor& invisible, const ShearletSystem& system);

/// SH^T(SH(f_fbp)_vis + SH(truth)_inv).
Image fbp_oracle_replace(const Image& f_fbp, const Image& truth, const ShearletSystem& system,
                         const VisibilityMask& mask);

Image clip_nonnegative(const Image& image);

struct LtiResult {
    Image f_star;
    CoefficientTensor coeffs;
    CoefficientTensor coeffs_vis;
    CoefficientTensor invisible;
    Image raw;     ///< SH^T output as is
    Image clipped; ///< max(raw, 0)
    SolverState state;
};

LtiResult run_lti(const Sinogram& y, const RadonOperator& radon, const ShearletSystem& system,
                  const VisibilityMask& mask, const AdmmParams& params, const Inferencer& inferencer);

struct OracleExperimentConfig {
    std::size_t image_size = 256;
    double radius_frac = 0.25;
    double value = 1.0;
    double missing_wedge_deg = 80.0;
    NoiseSpec noise{0.01, 7};
    unsigned oversample = 2;
    std::string preset = "disk";
    std::size_t iterations = 50;
    /// Replaces the preset (and iterations) when set.
    std::optional<AdmmParams> params;
    VisibilityRule rule = VisibilityRule::WedgeSupport;
};

struct OracleExperimentResult {
    Image truth;
    Image fbp;
    Image f_star;
    Image oracle;         ///< step3 with F = SH(truth)_inv
    Image fbp_replaced;   ///< fbp_oracle_replace
    double re_fbp = 0.0;
    double re_f_star = 0.0;
    double re_oracle = 0.0;
    double re_fbp_replaced = 0.0;
    double invisible_norm_f_star = 0.0; ///< ||SH(f*)_inv||
    double invisible_norm_truth = 0.0;  ///< ||SH(truth)_inv||
    std::size_t visible_subbands = 0;
    std::size_t subbands = 0;
};

/// Disk phantom, simulated noisy limited-angle data, FBP and l1 baselines
/// and the two oracle replacements.
OracleExperimentResult oracle_experiment(const OracleExperimentConfig& config);

/// Keys: image_size, missing_wedge_deg, angle_count, noise, noise_seed,
/// oversample, dataset_seed, train, validation, test, dataset_dir,
/// methods (fbp, l1-shearlet, tv, lti), preset, iterations,
/// visibility_rule, inferencer (zero, oracle, external),
/// external_command, exchange_dir, timeout_s, output_csv.
/// "lti" contributes two rows: raw and clipped.
MetricTable run_experiment(const Config& config);

/// Max |coefficient| across scales for every orientation (lowpass first),
/// tiled row-major into a square grid.
Image orientation_mosaic(const CoefficientTensor& coeffs, const ShearletSystem& system);

/// 8-bit binary PGM, linearly mapped from [min, max].
void write_pgm(const Image& image, const std::filesystem::path& path);

} // namespace lti
