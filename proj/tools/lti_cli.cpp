// lti: command line front end for simulation, reconstruction and evaluation.

#include <lti/config.hpp>
#include <lti/error.hpp>
#include <lti/metrics.hpp>
#include <lti/phantom.hpp>
#include <lti/pipeline.hpp>
#include <lti/tensorio.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>

namespace fs = std::filesystem;
using namespace lti;

namespace {

// Acquisition shared by simulate and reconstruct: the detector layout is a
// function of n, so a sinogram file plus these options pins the geometry.
struct Acquisition {
    std::size_t size = 128;
    double missing_wedge = 80.0;
    std::size_t angles = 0;

    void add_to(CLI::App* app) {
        app->add_option("--size", size, "image side length n")->check(CLI::Range(8, 4096));
        app->add_option("--missing-wedge", missing_wedge, "missing wedge in degrees")->check(CLI::Range(0.0, 179.0));
        app->add_option("--angles", angles, "projection count (default: one per degree)");
    }
    ScanGeometry geometry() const {
        return ScanGeometry::for_image(size, deg_to_rad(0.5 * (180.0 - missing_wedge)), angles);
    }
};

Image load_image(const fs::path& path) {
    const TensorFile f = read_tensor(path);
    if (f.kind != TensorKind::Image) throw ConfigError(path.string() + ": expected an image tensor");
    return image_from(f);
}

struct SimulateOpts {
    Acquisition acq;
    std::string phantom = "circle";
    std::uint64_t phantom_seed = 1;
    double noise = 0.01;
    std::uint64_t seed = 7;
    unsigned oversample = 2;
    fs::path out, truth;
};

void simulate(const SimulateOpts& o) {
    const std::size_t n = o.acq.size;
    PhantomRenderer render;
    if (o.phantom == "circle") {
        render = circle_renderer(0.25, 1.0);
    } else {
        std::mt19937_64 rng(o.phantom_seed);
        const EllipseOptions opts;
        render = ellipse_renderer(random_ellipse_specs(n, rng, opts), n, opts.intensity);
    }
    const Sinogram y = simulate_measurements(render, n, o.acq.geometry(), NoiseSpec{o.noise, o.seed}, o.oversample);
    write_tensor(to_tensor_file(y), o.out);
    if (!o.truth.empty()) write_tensor(to_tensor_file(render(n)), o.truth);
    std::printf("wrote %s (%zu angles x %zu bins)\n", o.out.c_str(), y.angle_count(), y.detector_count());
}

struct ReconstructOpts {
    Acquisition acq;
    fs::path in, out, truth;
    std::string method = "l1-shearlet";
    std::string preset = "ellipses50";
    std::size_t iterations = 50;
    std::string rule = "wedge";
    std::string inferencer = "zero";
    std::string command;
    fs::path exchange_dir;
    bool clip = false;
};

void reconstruct(const ReconstructOpts& o) {
    const std::size_t n = o.acq.size;
    const ScanGeometry geometry = o.acq.geometry();
    const Sinogram y = sinogram_from(read_tensor(o.in), geometry);
    Image f;
    if (o.method == "fbp") {
        f = fbp(y, FilterKind::RamLak, n);
    } else if (o.method == "tv") {
        AdmmParams p = tv_preset(o.preset);
        p.iterations = o.iterations;
        f = admm_solve(y, geometry, GradientAnalysis(n), p).image;
    } else {
        const RadonOperator radon(n, geometry);
        const ShearletSystem system(n, ShearletSystem::default_levels(n));
        AdmmParams p = admm_preset(o.preset, system.scale_count());
        p.iterations = o.iterations;
        if (o.method == "l1-shearlet") {
            f = admm_solve(y, radon, ShearletAnalysis(system), p).image;
        } else {
            std::unique_ptr<Inferencer> inf;
            if (o.inferencer == "zero") {
                inf = std::make_unique<ZeroInferencer>();
            } else if (o.inferencer == "oracle") {
                if (o.truth.empty()) throw ConfigError("--inferencer oracle needs --truth");
                inf = std::make_unique<OracleInferencer>(system, load_image(o.truth));
            } else {
                ExternalCommand cmd;
                cmd.command_template = o.command;
                cmd.exchange_dir = o.exchange_dir;
                inf = std::make_unique<ExternalInferencer>(cmd);
            }
            const VisibilityMask mask = classify(system, parse_visibility_rule(o.rule), geometry.half_angle, &radon);
            const LtiResult r = run_lti(y, radon, system, mask, p, *inf);
            f = o.clip ? r.clipped : r.raw;
        }
    }
    write_tensor(to_tensor_file(f), o.out);
    std::printf("wrote %s (%s, %zu x %zu)\n", o.out.c_str(), o.method.c_str(), n, n);
}

void classify_visibility(const Acquisition& acq, const std::string& rule_name) {
    const std::size_t n = acq.size;
    const ScanGeometry geometry = acq.geometry();
    const ShearletSystem system(n, ShearletSystem::default_levels(n));
    const VisibilityRule rule = parse_visibility_rule(rule_name);
    std::unique_ptr<RadonOperator> radon;
    if (rule == VisibilityRule::Quantile) radon = std::make_unique<RadonOperator>(n, geometry);
    const VisibilityMask mask = classify(system, rule, geometry.half_angle, radon.get());
    std::printf("%-6s %5s %5s %4s %9s  %s\n", "index", "scale", "shear", "cone", "orient", "visible");
    for (std::size_t s = 0; s < system.subband_count(); ++s) {
        const SubbandIndex& idx = system.subbands()[s];
        if (idx.is_lowpass())
            std::printf("%-6zu %5s %5s %4s %9s  %s\n", s, "low", "-", "-", "-", mask.visible(s) ? "yes" : "no");
        else
            std::printf("%-6zu %5d %5d %4d %9.3f  %s\n", s, idx.scale, idx.shear, idx.cone,
                        rad_to_deg(system.orientation(idx)), mask.visible(s) ? "yes" : "no");
    }
    std::printf("%zu of %zu subbands visible (rule %s, phi %.1f deg)\n", mask.visible_count(), mask.size(),
                rule_name.c_str(), rad_to_deg(geometry.half_angle));
}

struct OracleOpts {
    OracleExperimentConfig cfg;
    fs::path out_dir;
};

void oracle(const OracleOpts& o) {
    const OracleExperimentResult r = oracle_experiment(o.cfg);
    std::printf("%-14s %8s\n", "image", "RE");
    std::printf("%-14s %8.4f\n", "fbp", r.re_fbp);
    std::printf("%-14s %8.4f\n", "f*", r.re_f_star);
    std::printf("%-14s %8.4f\n", "oracle", r.re_oracle);
    std::printf("%-14s %8.4f\n", "fbp-replaced", r.re_fbp_replaced);
    std::printf("invisible energy ratio %.4f, %zu of %zu subbands visible\n",
                r.invisible_norm_f_star / r.invisible_norm_truth, r.visible_subbands, r.subbands);
    if (o.out_dir.empty()) return;
    fs::create_directories(o.out_dir);
    write_pgm(r.truth, o.out_dir / "truth.pgm");
    write_pgm(r.fbp, o.out_dir / "fbp.pgm");
    write_pgm(r.f_star, o.out_dir / "f_star.pgm");
    write_pgm(r.oracle, o.out_dir / "oracle.pgm");
    write_pgm(r.fbp_replaced, o.out_dir / "fbp_replaced.pgm");
}

void metrics(const fs::path& recon, const fs::path& truth) {
    const MetricReport m = evaluate(load_image(recon), load_image(truth));
    std::printf("re %.6f\npsnr %s\nssim %.6f\n", m.re, format_psnr(m.psnr).c_str(), m.ssim);
}

void export_mosaic(const fs::path& in, const fs::path& out) {
    const TensorFile f = read_tensor(in);
    std::size_t n = f.height;
    CoefficientTensor coeffs;
    std::unique_ptr<ShearletSystem> system;
    if (f.kind == TensorKind::Image) {
        system = std::make_unique<ShearletSystem>(n, ShearletSystem::default_levels(n));
        coeffs = system->forward(image_from(f));
    } else if (f.kind == TensorKind::Coeffs) {
        system = std::make_unique<ShearletSystem>(n, ShearletSystem::default_levels(n));
        coeffs = coefficients_from(f);
        if (coeffs.subbands() != system->subbands())
            throw ConfigError(in.string() + ": subband layout does not match the default system");
    } else {
        throw ConfigError(in.string() + ": expected an image or coefficient tensor");
    }
    write_pgm(orientation_mosaic(coeffs, *system), out);
    std::printf("wrote %s\n", out.c_str());
}

void experiment(const fs::path& config_path) {
    const Config cfg = Config::load(config_path);
    const MetricTable table = run_experiment(cfg);
    std::cout << table.to_text();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limited-angle tomography with learned invisible shearlet coefficients"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate noisy limited-angle measurements");
    sim.acq.add_to(sim_cmd);
    sim_cmd->add_option("--phantom", sim.phantom)->check(CLI::IsMember({"circle", "ellipses"}));
    sim_cmd->add_option("--phantom-seed", sim.phantom_seed);
    sim_cmd->add_option("--noise", sim.noise, "noise std relative to mean |sinogram|")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", sim.seed, "noise seed");
    sim_cmd->add_option("--oversample", sim.oversample)->check(CLI::Range(1u, 8u));
    sim_cmd->add_option("--out", sim.out, "sinogram tensor")->required();
    sim_cmd->add_option("--truth", sim.truth, "also write the phantom image");

    ReconstructOpts rec;
    auto* rec_cmd = app.add_subcommand("reconstruct", "reconstruct an image from a sinogram tensor");
    rec.acq.add_to(rec_cmd);
    rec_cmd->add_option("--in", rec.in, "sinogram tensor")->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--out", rec.out, "image tensor")->required();
    rec_cmd->add_option("--method", rec.method)->check(CLI::IsMember({"fbp", "l1-shearlet", "tv", "lti"}));
    rec_cmd->add_option("--preset", rec.preset)->check(CLI::IsMember(admm_preset_names()));
    rec_cmd->add_option("--iterations", rec.iterations)->check(CLI::PositiveNumber);
    rec_cmd->add_option("--rule", rec.rule, "visibility rule")->check(CLI::IsMember({"wedge", "orientation", "quantile"}));
    rec_cmd->add_option("--inferencer", rec.inferencer)->check(CLI::IsMember({"zero", "oracle", "external"}));
    rec_cmd->add_option("--truth", rec.truth, "image tensor for the oracle inferencer");
    rec_cmd->add_option("--command", rec.command, "external command, with {in} and {out}");
    rec_cmd->add_option("--exchange-dir", rec.exchange_dir);
    rec_cmd->add_flag("--clip", rec.clip, "clip the lti output at zero");

    Acquisition vis_acq;
    std::string vis_rule = "wedge";
    auto* vis_cmd = app.add_subcommand("classify-visibility", "list subbands with their visibility");
    vis_acq.add_to(vis_cmd);
    vis_cmd->add_option("--rule", vis_rule)->check(CLI::IsMember({"wedge", "orientation", "quantile"}));

    OracleOpts orc;
    auto* orc_cmd = app.add_subcommand("oracle-experiment", "disk phantom with oracle invisible coefficients");
    orc_cmd->add_option("--size", orc.cfg.image_size)->check(CLI::Range(16, 1024));
    orc_cmd->add_option("--missing-wedge", orc.cfg.missing_wedge_deg)->check(CLI::Range(0.0, 179.0));
    orc_cmd->add_option("--preset", orc.cfg.preset)->check(CLI::IsMember(admm_preset_names()));
    orc_cmd->add_option("--iterations", orc.cfg.iterations)->check(CLI::PositiveNumber);
    orc_cmd->add_option("--out-dir", orc.out_dir, "write PGM images here");

    fs::path recon_path, truth_path;
    auto* met_cmd = app.add_subcommand("metrics", "RE, PSNR and SSIM of an image against the truth");
    met_cmd->add_option("--recon", recon_path)->required()->check(CLI::ExistingFile);
    met_cmd->add_option("--truth", truth_path)->required()->check(CLI::ExistingFile);

    fs::path mosaic_in, mosaic_out;
    auto* mos_cmd = app.add_subcommand("export-mosaic", "per-orientation coefficient magnitudes as a PGM");
    mos_cmd->add_option("--in", mosaic_in, "image or coefficient tensor")->required()->check(CLI::ExistingFile);
    mos_cmd->add_option("--out", mosaic_out)->required();

    fs::path config_path;
    auto* exp_cmd = app.add_subcommand("experiment", "run a key = value experiment file");
    exp_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) simulate(sim);
        else if (*rec_cmd) reconstruct(rec);
        else if (*vis_cmd) classify_visibility(vis_acq, vis_rule);
        else if (*orc_cmd) oracle(orc);
        else if (*met_cmd) metrics(recon_path, truth_path);
        else if (*mos_cmd) export_mosaic(mosaic_in, mosaic_out);
        else if (*exp_cmd) experiment(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lti: %s\n", e.what());
        return 1;
    }
    return 0;
}
