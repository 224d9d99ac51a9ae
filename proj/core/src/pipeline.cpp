#include <lti/pipeline.hpp>

#include <lti/error.hpp>
#include <lti/phantom.hpp>
#include <lti/tensorio.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace lti {

Step1Result step1(const Sinogram& y, const RadonOperator& radon, const ShearletSystem& system,
                  const AdmmParams& params) {
    const ShearletAnalysis analysis(system);
    auto solved = admm_solve(y, radon, analysis, params);
    Step1Result out;
    out.f_star = std::move(solved.image);
    out.coeffs = system.forward(out.f_star);
    out.state = std::move(solved.state);
    return out;
}

// -- inferencers ------------------------------------------------------------

CoefficientTensor ZeroInferencer::infer(const CoefficientTensor& coeffs) const {
    return CoefficientTensor(coeffs.height(), coeffs.width(), coeffs.subbands());
}

OracleInferencer::OracleInferencer(const ShearletSystem& system, Image truth)
    : system_(system), truth_coeffs_(system.forward(truth)) {}

CoefficientTensor OracleInferencer::infer(const CoefficientTensor& coeffs) const {
    if (!coeffs.same_shape(truth_coeffs_)) throw ConfigError("oracle inferencer: tensor shape mismatch");
    return truth_coeffs_;
}

std::filesystem::path resolve_exchange_dir(const std::filesystem::path& configured) {
    if (const char* env = std::getenv("LTI_EXCHANGE_DIR"); env != nullptr && *env != '\0') return env;
    if (!configured.empty()) return configured;
    return std::filesystem::temp_directory_path() / "lti-exchange";
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

std::string substitute(std::string text, const std::string& key, const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
        text.replace(pos, key.size(), value);
    return text;
}

// Runs `command` through the shell in its own process group. Returns the
// exit status or throws on spawn failure and timeout.
int run_shell(const std::string& command, std::chrono::milliseconds timeout) {
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, "/bin/sh", nullptr, &attr, argv, environ);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw InferenceError(InferenceErrc::SpawnFailed, std::string("cannot start /bin/sh: ") + std::strerror(rc));

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto pause = std::chrono::milliseconds(1);
    int status = 0;
    while (true) {
        const pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0 && errno != EINTR)
            throw InferenceError(InferenceErrc::SpawnFailed, std::string("waitpid: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            throw InferenceError(InferenceErrc::Timeout,
                                 "inference command exceeded " + std::to_string(timeout.count()) + " ms");
        }
        std::this_thread::sleep_for(pause);
        pause = std::min(pause * 2, std::chrono::milliseconds(50));
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

std::atomic<unsigned> exchange_counter{0};

} // namespace

ExternalInferencer::ExternalInferencer(ExternalCommand command) : command_(std::move(command)) {
    if (command_.command_template.empty()) throw ConfigError("external inferencer: empty command");
    if (command_.timeout.count() <= 0) throw ConfigError("external inferencer: timeout must be positive");
}

CoefficientTensor ExternalInferencer::infer(const CoefficientTensor& coeffs) const {
    const auto dir = resolve_exchange_dir(command_.exchange_dir);
    std::filesystem::create_directories(dir);
    const std::string stem = "lti-" + std::to_string(::getpid()) + "-" + std::to_string(exchange_counter++);
    const auto in_path = dir / (stem + "-in.lti");
    const auto out_path = dir / (stem + "-out.lti");
    std::filesystem::remove(out_path);
    write_tensor(to_tensor_file(coeffs), in_path);

    std::string cmd = substitute(command_.command_template, "{in}", shell_quote(in_path.string()));
    cmd = substitute(cmd, "{out}", shell_quote(out_path.string()));

    const auto cleanup = [&] {
        if (command_.keep_files) return;
        std::error_code ec;
        std::filesystem::remove(in_path, ec);
        std::filesystem::remove(out_path, ec);
    };
    try {
        const int code = run_shell(cmd, command_.timeout);
        if (code != 0)
            throw InferenceError(InferenceErrc::NonzeroExit, "inference command exited with status " + std::to_string(code));
        CoefficientTensor out;
        try {
            out = coefficients_from(read_tensor(out_path));
        } catch (const TensorIoError& e) {
            throw InferenceError(InferenceErrc::MalformedOutput, std::string("unreadable inference output: ") + e.what());
        }
        if (!out.same_shape(coeffs))
            throw InferenceError(InferenceErrc::MalformedOutput, "inference output has the wrong dimensions");
        for (double v : out.values())
            if (!std::isfinite(v)) throw InferenceError(InferenceErrc::MalformedOutput, "inference output is not finite");
        cleanup();
        return out;
    } catch (...) {
        cleanup();
        throw;
    }
}

// -- steps ------------------------------------------------------------------

CoefficientTensor step2(const CoefficientTensor& coeffs, const VisibilityMask& mask, const Inferencer& inferencer) {
    if (mask.size() != coeffs.subband_count()) throw ConfigError("step2: mask does not match the tensor");
    CoefficientTensor input = coeffs;
    input.set_visibility(mask.flags());
    const CoefficientTensor raw = inferencer.infer(input);
    if (!raw.same_shape(coeffs)) throw ConfigError("step2: inferencer returned the wrong shape");
    CoefficientTensor shaped(coeffs.height(), coeffs.width(), coeffs.subbands());
    std::copy(raw.values().begin(), raw.values().end(), shaped.values().begin());
    return mask_restrict(shaped, mask, Keep::Invisible);
}

CoefficientTensor combine(const CoefficientTensor& coeffs_vis, const CoefficientTensor& invisible) {
    if (!coeffs_vis.same_shape(invisible)) throw ConfigError("step3: tensor shapes differ");
    CoefficientTensor out(coeffs_vis.height(), coeffs_vis.width(), coeffs_vis.subbands());
    const auto a = coeffs_vis.values();
    const auto b = invisible.values();
    auto o = out.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != 0.0 && b[i] != 0.0)
            throw ContractError("step3: visible and invisible tensors overlap at subband " +
                                std::to_string(i / coeffs_vis.subband_size()));
        o[i] = b[i] != 0.0 ? b[i] : a[i];
    }
    return out;
}

Image step3(const CoefficientTensor& coeffs_vis, const CoefficientTensor& invisible, const ShearletSystem& system) {
    return system.adjoint(combine(coeffs_vis, invisible));
}

Image fbp_oracle_replace(const Image& f_fbp, const Image& truth, const ShearletSystem& system,
                         const VisibilityMask& mask) {
    if (f_fbp.size() != system.size() || truth.size() != system.size())
        throw ConfigError("fbp_oracle_replace: image size does not match the system");
    const auto vis = mask_restrict(system.forward(f_fbp), mask, Keep::Visible);
    const auto inv = mask_restrict(system.forward(truth), mask, Keep::Invisible);
    return system.adjoint(combine(vis, inv));
}

Image clip_nonnegative(const Image& image) {
    Image out = image;
    for (double& v : out.values()) v = std::max(v, 0.0);
    return out;
}

LtiResult run_lti(const Sinogram& y, const RadonOperator& radon, const ShearletSystem& system,
                  const VisibilityMask& mask, const AdmmParams& params, const Inferencer& inferencer) {
    auto s1 = step1(y, radon, system, params);
    LtiResult out;
    out.coeffs_vis = mask_restrict(s1.coeffs, mask, Keep::Visible);
    out.invisible = step2(s1.coeffs, mask, inferencer);
    out.raw = step3(out.coeffs_vis, out.invisible, system);
    out.clipped = clip_nonnegative(out.raw);
    out.f_star = std::move(s1.f_star);
    out.coeffs = std::move(s1.coeffs);
    out.state = std::move(s1.state);
    return out;
}

// -- experiments ------------------------------------------------------------

namespace {

double invisible_norm(const CoefficientTensor& coeffs, const VisibilityMask& mask) {
    double acc = 0.0;
    for (std::size_t s = 0; s < coeffs.subband_count(); ++s) {
        if (mask.visible(s)) continue;
        for (double v : coeffs.subband(s)) acc += v * v;
    }
    return std::sqrt(acc);
}

double half_angle_from_wedge(double missing_wedge_deg) {
    if (!(missing_wedge_deg >= 0.0 && missing_wedge_deg < 180.0))
        throw ConfigError("missing wedge must be in [0, 180) degrees");
    return deg_to_rad(0.5 * (180.0 - missing_wedge_deg));
}

} // namespace

OracleExperimentResult oracle_experiment(const OracleExperimentConfig& config) {
    const std::size_t n = config.image_size;
    const double phi = half_angle_from_wedge(config.missing_wedge_deg);
    const ScanGeometry geometry = ScanGeometry::for_image(n, phi);
    const RadonOperator radon(n, geometry);
    const ShearletSystem system(n, ShearletSystem::default_levels(n));
    const VisibilityMask mask = classify(system, config.rule, phi, &radon);

    OracleExperimentResult r;
    r.truth = make_circle(n, config.radius_frac, config.value);
    const Sinogram y =
        simulate_measurements(circle_renderer(config.radius_frac, config.value), n, geometry, config.noise, config.oversample);
    r.fbp = fbp(y, FilterKind::RamLak, n);

    AdmmParams params;
    if (config.params) {
        params = *config.params;
    } else {
        params = admm_preset(config.preset, system.scale_count());
        params.iterations = config.iterations;
    }
    auto s1 = step1(y, radon, system, params);
    r.f_star = std::move(s1.f_star);

    const OracleInferencer oracle(system, r.truth);
    const auto vis = mask_restrict(s1.coeffs, mask, Keep::Visible);
    const auto inv = step2(s1.coeffs, mask, oracle);
    r.oracle = step3(vis, inv, system);
    r.fbp_replaced = fbp_oracle_replace(r.fbp, r.truth, system, mask);

    r.re_fbp = relative_error(r.fbp, r.truth);
    r.re_f_star = relative_error(r.f_star, r.truth);
    r.re_oracle = relative_error(r.oracle, r.truth);
    r.re_fbp_replaced = relative_error(r.fbp_replaced, r.truth);
    r.invisible_norm_f_star = invisible_norm(s1.coeffs, mask);
    r.invisible_norm_truth = invisible_norm(system.forward(r.truth), mask);
    r.visible_subbands = mask.visible_count();
    r.subbands = mask.size();
    return r;
}

MetricTable run_experiment(const Config& config) {
    config.require_known({"image_size", "missing_wedge_deg", "angle_count", "noise", "noise_seed", "oversample",
                          "dataset_seed", "train", "validation", "test", "dataset_dir", "methods", "preset",
                          "iterations", "visibility_rule", "inferencer", "external_command", "exchange_dir",
                          "timeout_s", "output_csv"});
    const std::size_t n = config.get_uint("image_size", 128);
    const double phi = half_angle_from_wedge(config.get_double("missing_wedge_deg", 80.0));
    const ScanGeometry geometry = ScanGeometry::for_image(n, phi, config.get_uint("angle_count", 0));
    const NoiseSpec noise{config.get_double("noise", 0.01), config.get_uint("noise_seed", 0)};
    const auto oversample = static_cast<unsigned>(config.get_uint("oversample", 2));
    const std::string preset = config.get("preset", "ellipses50");
    const std::size_t iterations = config.get_uint("iterations", 50);
    const auto methods = config.has("methods") ? config.get_list("methods") : std::vector<std::string>{"fbp", "l1-shearlet"};
    for (const auto& m : methods)
        if (m != "fbp" && m != "l1-shearlet" && m != "tv" && m != "lti")
            throw ConfigError("unknown method '" + m + "'");

    // Test images with their high-resolution renderers.
    std::vector<Image> truths;
    std::vector<PhantomRenderer> renderers;
    if (config.has("dataset_dir")) {
        const std::filesystem::path dir = config.get("dataset_dir");
        const auto manifest = dir / "manifest.txt";
        if (!std::filesystem::exists(manifest)) throw ConfigError("dataset manifest not found: " + manifest.string());
        for (const auto& line : read_manifest(manifest)) {
            if (line.split != "test") continue;
            if (!std::filesystem::exists(dir / line.path)) throw ConfigError("dataset image not found: " + (dir / line.path).string());
            truths.push_back(image_from(read_tensor(dir / line.path)));
            if (truths.back().size() != n) throw ConfigError("dataset image size does not match image_size");
            renderers.emplace_back();
        }
    } else {
        DatasetConfig dc;
        dc.image_size = n;
        dc.seed = config.get_uint("dataset_seed", 0);
        dc.train = config.get_uint("train", 0);
        dc.validation = config.get_uint("validation", 0);
        dc.test = config.get_uint("test", 20);
        const DatasetSplit split = make_dataset(dc);
        for (const auto& e : split.test) {
            truths.push_back(split.render(e));
            renderers.push_back(split.renderer(e));
        }
    }
    if (truths.empty()) throw UndefinedMetricError("empty test split: nothing to report");

    const RadonOperator radon(n, geometry);
    const ShearletSystem system(n, ShearletSystem::default_levels(n));
    AdmmParams l1 = admm_preset(preset, system.scale_count());
    l1.iterations = iterations;
    AdmmParams tv = tv_preset(preset);
    tv.iterations = iterations;

    const bool wants_lti = std::find(methods.begin(), methods.end(), "lti") != methods.end();
    std::unique_ptr<VisibilityMask> mask;
    std::unique_ptr<Inferencer> shared_inferencer;
    const std::string inferencer_kind = config.get("inferencer", "zero");
    if (wants_lti) {
        mask = std::make_unique<VisibilityMask>(
            classify(system, parse_visibility_rule(config.get("visibility_rule", "wedge")), phi, &radon));
        if (inferencer_kind == "zero") {
            shared_inferencer = std::make_unique<ZeroInferencer>();
        } else if (inferencer_kind == "external") {
            ExternalCommand cmd;
            cmd.command_template = config.get("external_command");
            cmd.exchange_dir = config.get("exchange_dir", "");
            cmd.timeout = std::chrono::milliseconds(
                static_cast<std::int64_t>(1000.0 * config.get_double("timeout_s", 600.0)));
            shared_inferencer = std::make_unique<ExternalInferencer>(std::move(cmd));
        } else if (inferencer_kind != "oracle") {
            throw ConfigError("unknown inferencer '" + inferencer_kind + "'");
        }
    }

    MetricTable table;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        NoiseSpec image_noise = noise;
        image_noise.seed = splitmix64(noise.seed + i);
        const Sinogram y = renderers[i] ? simulate_measurements(renderers[i], n, geometry, image_noise, oversample)
                                        : simulate_measurements(truths[i], geometry, image_noise, oversample);
        std::optional<Step1Result> s1;
        for (const auto& m : methods) {
            if (m == "fbp") {
                table.add(m, evaluate(fbp(y, FilterKind::RamLak, n), truths[i]));
            } else if (m == "tv") {
                const GradientAnalysis grad(n);
                table.add(m, evaluate(admm_solve(y, radon, grad, tv).image, truths[i]));
            } else {
                if (!s1) s1 = step1(y, radon, system, l1);
                if (m == "l1-shearlet") {
                    table.add(m, evaluate(s1->f_star, truths[i]));
                    continue;
                }
                std::unique_ptr<Inferencer> oracle;
                if (inferencer_kind == "oracle") oracle = std::make_unique<OracleInferencer>(system, truths[i]);
                const Inferencer& inf = oracle ? *oracle : *shared_inferencer;
                const auto vis = mask_restrict(s1->coeffs, *mask, Keep::Visible);
                const auto raw = step3(vis, step2(s1->coeffs, *mask, inf), system);
                table.add("lti", evaluate(raw, truths[i]));
                table.add("lti-clipped", evaluate(clip_nonnegative(raw), truths[i]));
            }
        }
    }
    if (config.has("output_csv")) {
        std::ofstream out(config.get("output_csv"));
        if (!out) throw ConfigError("cannot write " + config.get("output_csv"));
        out << table.to_csv();
    }
    return table;
}

// -- export -----------------------------------------------------------------

Image orientation_mosaic(const CoefficientTensor& coeffs, const ShearletSystem& system) {
    if (coeffs.subband_count() != system.subband_count() || coeffs.height() != system.size())
        throw ConfigError("mosaic: tensor does not match the system");
    const std::size_t n = system.size();
    // Orientations rounded to 1e-9 rad so equal directions across scales merge.
    std::map<long long, std::vector<std::size_t>> groups;
    std::vector<std::size_t> lowpass;
    const auto& idx = system.subbands();
    for (std::size_t s = 0; s < idx.size(); ++s) {
        if (idx[s].is_lowpass()) {
            lowpass.push_back(s);
            continue;
        }
        groups[std::llround(system.orientation(idx[s]) * 1e9)].push_back(s);
    }
    std::vector<std::vector<std::size_t>> tiles;
    tiles.push_back(lowpass);
    for (auto& [key, members] : groups) tiles.push_back(members);
    std::size_t grid = 1;
    while (grid * grid < tiles.size()) ++grid;

    Image out(grid * n);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const std::size_t r0 = (t / grid) * n;
        const std::size_t c0 = (t % grid) * n;
        for (std::size_t s : tiles[t]) {
            const auto band = coeffs.subband(s);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    out(r0 + r, c0 + c) = std::max(out(r0 + r, c0 + c), std::abs(band[r * n + c]));
        }
    }
    return out;
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
    const auto v = image.values();
    if (v.empty()) throw ConfigError("pgm: empty image");
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "P5\n" << image.size() << ' ' << image.size() << "\n255\n";
    for (double x : v) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (x - *lo) / span))));
    if (!out) throw ConfigError("short write to " + path.string());
}

} // namespace lti
