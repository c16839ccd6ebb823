#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdf/baselines.hpp"
#include "mdf/denoise.hpp"
#include "mdf/errors.hpp"
#include "mdf/forward_model.hpp"
#include "mdf/image_io.hpp"
#include "mdf/metrics.hpp"
#include "mdf/patch_library.hpp"
#include "mdf/pnp.hpp"
#include "mdf/synthbench.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Bad configs and schema violations exit with kExitConfig; anything that
// fails while computing or touching files exits with kExitRuntime.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

const json& require_field(const json& j, const std::string& scope, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError("config missing field '" + (scope.empty() ? key : scope + "." + key) + "'");
    }
    return j.at(key);
}

double require_number(const json& j, const std::string& scope, const char* key) {
    const json& v = require_field(j, scope, key);
    if (!v.is_number()) {
        throw ConfigError("config field '" + scope + "." + key + "' must be a number");
    }
    return v.get<double>();
}

std::int64_t require_integer(const json& j, const std::string& scope, const char* key) {
    const json& v = require_field(j, scope, key);
    if (!v.is_number_integer()) {
        throw ConfigError("config field '" + scope + "." + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

// ---- manifest ---------------------------------------------------------------

struct Manifest {
    fs::path dir;
    json raw;

    fs::path resolve(const std::string& rel) const { return dir / rel; }
    bool is_sr() const { return raw.at("mode").get<std::string>() == "sr"; }
};

Manifest load_manifest(const fs::path& path) {
    Manifest m;
    m.raw = load_json_config(path);
    m.dir = path.parent_path();
    for (const char* key : {"mode", "sigma_w", "measurements", "library_image",
                            "ground_truth", "counts"}) {
        require_field(m.raw, "manifest", key);
    }
    const std::string mode = m.raw.at("mode").get<std::string>();
    if (mode != "sr" && mode != "sparse") {
        throw ConfigError("manifest field 'mode' must be \"sr\" or \"sparse\"");
    }
    if (mode == "sr") {
        require_field(m.raw, "manifest", "factor");
    } else {
        require_field(m.raw, "manifest", "mask");
    }
    return m;
}

mdf::MeasurementSet manifest_measurements(const Manifest& m) {
    mdf::MeasurementSet meas;
    meas.y = mdf::load_image(m.resolve(m.raw.at("measurements").get<std::string>()).string(),
                             mdf::ImageFormat::raw_f64);
    meas.sigma_w = m.raw.at("sigma_w").get<double>();
    if (m.is_sr()) {
        meas.model = mdf::SuperResolutionModel{m.raw.at("factor").get<int>()};
    } else {
        mdf::SparseSampleModel model;
        model.mask = mdf::load_mask(m.resolve(m.raw.at("mask").get<std::string>()).string());
        meas.model = std::move(model);
    }
    meas.validate();
    return meas;
}

mdf::Image manifest_ground_truth(const Manifest& m) {
    return mdf::load_image(m.resolve(m.raw.at("ground_truth").get<std::string>()).string(),
                           mdf::ImageFormat::raw_f64);
}

// Ground truth only exists for simulated acquisitions.
std::optional<mdf::Image> try_ground_truth(const Manifest& m) {
    if (!m.raw.at("ground_truth").is_string()) return std::nullopt;
    const fs::path path = m.resolve(m.raw.at("ground_truth").get<std::string>());
    if (!fs::exists(path)) return std::nullopt;
    return mdf::load_image(path.string(), mdf::ImageFormat::raw_f64);
}

void fill_acquisition(mdf::ReconstructionReport& report, const Manifest& m) {
    const json& counts = m.raw.at("counts");
    const auto stats = mdf::acquisition_stats(counts.at("n_recon").get<std::int64_t>(),
                                              counts.at("m_low").get<std::int64_t>(),
                                              counts.at("m_high").get<std::int64_t>());
    report.rho = stats.rho;
    report.speedup = stats.speedup;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    bool pgm = false;
};

void cmd_simulate(const SimulateArgs& args) {
    const json cfg = load_json_config(args.config_path);

    const json& scene_cfg = require_field(cfg, "", "scene");
    mdf::LatticeSceneConfig scene;
    scene.width = static_cast<int>(require_integer(scene_cfg, "scene", "width"));
    scene.height = static_cast<int>(require_integer(scene_cfg, "scene", "height"));
    scene.spot_spacing = require_number(scene_cfg, "scene", "spot_spacing");
    scene.spot_sigma = require_number(scene_cfg, "scene", "spot_sigma");
    scene.amplitude = require_number(scene_cfg, "scene", "amplitude");
    scene.jitter = require_number(scene_cfg, "scene", "jitter");
    scene.background = require_number(scene_cfg, "scene", "background");
    scene.seed = static_cast<std::uint64_t>(require_integer(scene_cfg, "scene", "seed"));

    const json& mode_cfg = require_field(cfg, "", "mode");
    const std::string mode = require_field(mode_cfg, "mode", "type").get<std::string>();
    mdf::ExperimentMode exp_mode;
    if (mode == "sr") {
        exp_mode = mdf::SrMode{static_cast<int>(require_integer(mode_cfg, "mode", "factor"))};
    } else if (mode == "sparse") {
        exp_mode = mdf::SparseMode{
            require_number(mode_cfg, "mode", "fraction"),
            static_cast<std::uint64_t>(require_integer(mode_cfg, "mode", "seed"))};
    } else {
        throw ConfigError("config field 'mode.type' must be \"sr\" or \"sparse\"");
    }

    const json& region_cfg = require_field(cfg, "", "library_region");
    mdf::Rect region;
    region.x = static_cast<int>(require_integer(region_cfg, "library_region", "x"));
    region.y = static_cast<int>(require_integer(region_cfg, "library_region", "y"));
    region.width = static_cast<int>(require_integer(region_cfg, "library_region", "width"));
    region.height = static_cast<int>(require_integer(region_cfg, "library_region", "height"));

    const double sigma_w = cfg.value("sigma_w", 0.0);
    const auto noise_seed = static_cast<std::uint64_t>(cfg.value("noise_seed", 0));

    const mdf::Image scene_img = mdf::gen_lattice_scene(scene);
    const mdf::Experiment exp = mdf::gen_experiment(scene_img, exp_mode, region, sigma_w, noise_seed);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    mdf::save_image(exp.ground_truth, (out / "ground_truth.f64").string(), mdf::ImageFormat::raw_f64);
    mdf::save_image(exp.library_image, (out / "library_image.f64").string(), mdf::ImageFormat::raw_f64);
    mdf::save_image(exp.measurements.y, (out / "measurements.f64").string(), mdf::ImageFormat::raw_f64);
    if (args.pgm) {
        mdf::save_image(exp.ground_truth, (out / "ground_truth.pgm").string(), mdf::ImageFormat::pgm8);
        mdf::save_image(exp.library_image, (out / "library_image.pgm").string(), mdf::ImageFormat::pgm8);
    }

    json manifest;
    manifest["config"] = cfg;
    manifest["sigma_w"] = sigma_w;
    manifest["ground_truth"] = "ground_truth.f64";
    manifest["measurements"] = "measurements.f64";
    manifest["library_image"] = "library_image.f64";
    manifest["library_region"] = {{"x", region.x},
                                  {"y", region.y},
                                  {"width", region.width},
                                  {"height", region.height}};
    if (const auto* sr = std::get_if<mdf::SrMode>(&exp_mode)) {
        manifest["mode"] = "sr";
        manifest["factor"] = sr->factor;
        if (args.pgm) {
            mdf::save_image(exp.measurements.y, (out / "measurements.pgm").string(),
                            mdf::ImageFormat::pgm8);
        }
    } else {
        const auto& sp = std::get<mdf::SparseMode>(exp_mode);
        manifest["mode"] = "sparse";
        manifest["fraction"] = sp.fraction;
        manifest["sample_seed"] = sp.seed;
        manifest["mask"] = "mask.json";
        mdf::save_mask(std::get<mdf::SparseSampleModel>(exp.measurements.model).mask,
                       (out / "mask.json").string());
    }
    manifest["counts"] = {{"n_recon", static_cast<std::int64_t>(exp.ground_truth.size())},
                          {"m_low", exp.m_low},
                          {"m_high", exp.m_high}};

    std::ofstream mout(out / "manifest.json");
    if (!mout) throw mdf::io_error("cannot write manifest.json");
    mout << manifest.dump(2) << "\n";

    std::cout << "simulated " << manifest["mode"].get<std::string>() << " experiment: "
              << exp.ground_truth.width << "x" << exp.ground_truth.height << " scene, m_low="
              << exp.m_low << ", m_high=" << exp.m_high << " -> " << out.string() << "\n";
}

// ---- build-library ----------------------------------------------------------

struct BuildLibraryArgs {
    std::vector<std::string> images;
    std::string out_path;
    int patch_size = 7;
    int stride = 2;
    std::int64_t max_patches = 20000;
    std::uint64_t seed = 1;
};

void cmd_build_library(const BuildLibraryArgs& args) {
    std::vector<mdf::Image> images;
    images.reserve(args.images.size());
    for (const auto& p : args.images) images.push_back(mdf::load_image(p));
    mdf::PatchLibrary lib = mdf::build_library(images, args.patch_size, args.stride,
                                               args.max_patches, args.seed);
    for (std::size_t i = 0; i < args.images.size() && i < lib.source_meta.size(); ++i) {
        lib.source_meta[i] = args.images[i] + " " + lib.source_meta[i];
    }
    mdf::save_library(lib, args.out_path);
    std::cout << "library: " << lib.count() << " patches of " << lib.patch_size << "x"
              << lib.patch_size << " -> " << args.out_path << "\n";
}

// ---- reconstruct ------------------------------------------------------------

struct ReconstructArgs {
    std::string manifest_path;
    std::string method = "mdf";
    std::string out_dir;  // defaults to the manifest directory
    std::string label;
    bool beta_given = false;
    double beta = 0.5;
    std::string sigma_lambda = "auto";
    int max_iters = 100;
    double tol = 1e-4;
    int patch_size = 7;
    int stride = 2;
    std::int64_t max_patches = 20000;
    std::uint64_t lib_seed = 1;
    std::string library_path;
    int search_radius = 5;
    int sinkhorn_iters = 10;
    bool timing = false;
    bool pgm = false;
};

std::optional<double> parse_sigma_lambda(const std::string& s) {
    if (s == "auto") return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--sigma-lambda must be a number or \"auto\", got '" + s + "'");
    }
}

mdf::Image baseline_for(const mdf::MeasurementSet& meas) {
    if (meas.is_super_resolution()) {
        return mdf::bicubic_interpolate(meas.y,
                                        std::get<mdf::SuperResolutionModel>(meas.model).factor);
    }
    return mdf::shepard_interpolate(meas);
}

struct PnPRun {
    mdf::Image image;
    mdf::ReconstructionReport report;
};

PnPRun run_pnp_method(const Manifest& manifest, const ReconstructArgs& args) {
    if (!args.beta_given) {
        throw ConfigError("method '" + args.method +
                          "' requires --beta (use sweep-beta to pick a value)");
    }
    const mdf::MeasurementSet meas = manifest_measurements(manifest);
    const mdf::Image init = baseline_for(meas);

    mdf::PnPConfig cfg;
    cfg.beta = args.beta;
    cfg.sigma_lambda = parse_sigma_lambda(args.sigma_lambda);
    cfg.max_iters = args.max_iters;
    cfg.residual_tol = args.tol;

    mdf::Denoiser prior;
    std::string prior_name;
    std::int64_t library_patches = 0;
    mdf::PatchLibrary lib;
    if (args.method == "mdf") {
        if (!args.library_path.empty()) {
            lib = mdf::load_library(args.library_path);
            if (lib.patch_size != args.patch_size) {
                std::fprintf(stderr, "note: using patch size %d from %s\n", lib.patch_size,
                             args.library_path.c_str());
            }
        } else {
            const mdf::Image lib_img = mdf::load_image(
                manifest.resolve(manifest.raw.at("library_image").get<std::string>()).string(),
                mdf::ImageFormat::raw_f64);
            lib = mdf::build_library({lib_img}, args.patch_size, args.stride, args.max_patches,
                                     args.lib_seed);
        }
        library_patches = lib.count();
        prior = mdf::make_lbnlm_denoiser(lib);
        prior_name = "lbnlm";
    } else if (args.method == "nlm-sym") {
        mdf::NlmConfig ncfg;
        ncfg.patch_size = args.patch_size;
        ncfg.search_radius = args.search_radius;
        ncfg.symmetrize = true;
        ncfg.sinkhorn_iters = args.sinkhorn_iters;
        prior = mdf::make_internal_nlm_denoiser(ncfg);
        prior_name = "nlm-sym (DSG-NLM-approx)";
    } else {
        throw ConfigError("unknown P&P method '" + args.method + "'");
    }

    PnPRun run;
    auto [img, report] = mdf::pnp_reconstruct(meas, prior, cfg, init);
    run.image = std::move(img);
    run.report = std::move(report);
    run.report.method = args.method;
    run.report.prior = prior_name;
    run.report.library_patches = library_patches;
    return run;
}

void cmd_reconstruct(const ReconstructArgs& args) {
    const Manifest manifest = load_manifest(args.manifest_path);
    fs::path out_dir = args.out_dir.empty() ? manifest.dir : fs::path(args.out_dir);
    if (out_dir.empty()) out_dir = ".";
    fs::create_directories(out_dir);

    PnPRun run;
    if (args.method == "cubic") {
        const mdf::MeasurementSet meas = manifest_measurements(manifest);
        if (!meas.is_super_resolution()) {
            throw ConfigError("method 'cubic' requires a super-resolution manifest");
        }
        run.image = mdf::bicubic_interpolate(
            meas.y, std::get<mdf::SuperResolutionModel>(meas.model).factor);
        run.report.method = "cubic";
        run.report.prior = "none";
    } else if (args.method == "shepard") {
        const mdf::MeasurementSet meas = manifest_measurements(manifest);
        if (meas.is_super_resolution()) {
            throw ConfigError("method 'shepard' requires a sparse-sampling manifest");
        }
        run.image = mdf::shepard_interpolate(meas);
        run.report.method = "shepard";
        run.report.prior = "none";
    } else if (args.method == "mdf" || args.method == "nlm-sym") {
        run = run_pnp_method(manifest, args);
    } else {
        throw ConfigError("unknown method '" + args.method +
                          "' (expected mdf, cubic, shepard, or nlm-sym)");
    }

    if (const auto gt = try_ground_truth(manifest)) {
        run.report.rmse_percent = mdf::rmse_percent(run.image, *gt);
    }
    fill_acquisition(run.report, manifest);

    const std::string tag = args.label.empty() ? args.method : args.label;
    const fs::path img_path = out_dir / ("recon_" + tag + ".f64");
    mdf::save_image(run.image, img_path.string(), mdf::ImageFormat::raw_f64);
    if (args.pgm) {
        mdf::save_image(run.image, (out_dir / ("recon_" + tag + ".pgm")).string(),
                        mdf::ImageFormat::pgm8);
    }
    mdf::write_report(run.report, (out_dir / ("report_" + tag + ".json")).string(), args.timing);
    if (!run.report.residual_history.empty()) {
        mdf::write_residual_csv(run.report, (out_dir / ("residuals_" + tag + ".csv")).string());
    }

    std::cout << args.method << ": ";
    if (run.report.rmse_percent) {
        std::cout << "rmse=" << *run.report.rmse_percent << "% ";
    }
    std::cout << "iterations=" << run.report.iterations
              << " final_residual=" << run.report.final_residual;
    if (args.timing) std::cout << " wall_time=" << run.report.wall_time_s << "s";
    std::cout << " -> " << img_path.string() << "\n";
}

// ---- denoise ----------------------------------------------------------------

struct DenoiseArgs {
    std::string input;
    std::string output;
    std::string prior = "lbnlm";
    double sigma_n = 10.0;
    std::string library_path;
    std::string library_image;
    int patch_size = 7;
    int stride = 2;
    std::int64_t max_patches = 20000;
    std::uint64_t lib_seed = 1;
    int search_radius = 5;
    int sinkhorn_iters = 10;
};

void cmd_denoise(const DenoiseArgs& args) {
    const mdf::Image input = mdf::load_image(args.input);
    mdf::Image out;
    if (args.prior == "lbnlm") {
        mdf::PatchLibrary lib;
        if (!args.library_path.empty()) {
            lib = mdf::load_library(args.library_path);
        } else if (!args.library_image.empty()) {
            lib = mdf::build_library({mdf::load_image(args.library_image)}, args.patch_size,
                                     args.stride, args.max_patches, args.lib_seed);
        } else {
            throw ConfigError("prior 'lbnlm' needs --library or --library-image");
        }
        out = mdf::lbnlm_denoise(input, lib, args.sigma_n);
    } else if (args.prior == "nlm" || args.prior == "nlm-sym") {
        mdf::NlmConfig cfg;
        cfg.sigma_n = args.sigma_n;
        cfg.patch_size = args.patch_size;
        cfg.search_radius = args.search_radius;
        cfg.symmetrize = args.prior == "nlm-sym";
        cfg.sinkhorn_iters = args.sinkhorn_iters;
        out = mdf::internal_nlm_denoise(input, cfg);
    } else {
        throw ConfigError("unknown prior '" + args.prior + "' (expected lbnlm, nlm, or nlm-sym)");
    }
    mdf::save_image(out, args.output, mdf::ImageFormat::autodetect);
    std::cout << "denoised " << args.input << " -> " << args.output << "\n";
}

// ---- invert -----------------------------------------------------------------

struct InvertArgs {
    std::string manifest_path;
    std::string input;
    std::string output;
    double sigma_lambda = 1.0;
};

void cmd_invert(const InvertArgs& args) {
    const Manifest manifest = load_manifest(args.manifest_path);
    const mdf::MeasurementSet meas = manifest_measurements(manifest);
    const mdf::Image x_tilde = mdf::load_image(args.input);
    const mdf::Image out = mdf::apply_inversion(x_tilde, meas, args.sigma_lambda);
    mdf::save_image(out, args.output, mdf::ImageFormat::autodetect);
    std::cout << "inverted " << args.input << " -> " << args.output << "\n";
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string manifest_path;
    std::string image_path;
    std::string label;
    std::string results_csv;
    std::string residuals_csv;
    std::string svg_path;
};

void cmd_evaluate(const EvaluateArgs& args) {
    const Manifest manifest = load_manifest(args.manifest_path);
    const mdf::Image gt = manifest_ground_truth(manifest);
    const mdf::Image img = mdf::load_image(args.image_path);
    const double rmse = mdf::rmse_percent(img, gt);

    const json& counts = manifest.raw.at("counts");
    const auto stats = mdf::acquisition_stats(counts.at("n_recon").get<std::int64_t>(),
                                              counts.at("m_low").get<std::int64_t>(),
                                              counts.at("m_high").get<std::int64_t>());

    const std::string label = args.label.empty() ? fs::path(args.image_path).stem().string()
                                                 : args.label;
    json result;
    result["label"] = label;
    result["image"] = args.image_path;
    result["rmse_percent"] = rmse;
    result["rho"] = stats.rho;
    result["speedup"] = stats.speedup;
    std::cout << result.dump(2) << "\n";

    if (!args.results_csv.empty()) {
        const bool fresh = !fs::exists(args.results_csv) || fs::file_size(args.results_csv) == 0;
        std::ofstream out(args.results_csv, std::ios::app);
        if (!out) throw mdf::io_error("cannot open " + args.results_csv + " for append");
        if (fresh) out << "label,image,rmse_percent,rho,speedup\n";
        char line[512];
        std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%.17g\n", label.c_str(),
                      args.image_path.c_str(), rmse, stats.rho, stats.speedup);
        out << line;
    }

    if (!args.svg_path.empty()) {
        if (args.residuals_csv.empty()) {
            throw ConfigError("--svg needs --residuals with the residual CSV to plot");
        }
        std::ifstream in(args.residuals_csv);
        if (!in) throw mdf::io_error("cannot open " + args.residuals_csv);
        std::vector<double> residuals;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) continue;
            residuals.push_back(std::stod(line.substr(c2 + 1)));
        }
        mdf::write_residual_svg(residuals, args.svg_path, "P&P convergence: " + label);
    }
}

// ---- sweep-beta -------------------------------------------------------------

struct SweepArgs {
    ReconstructArgs base;
    std::vector<double> betas;
};

void cmd_sweep_beta(const SweepArgs& args) {
    if (args.betas.empty()) throw ConfigError("--betas list is empty");
    const Manifest manifest = load_manifest(args.base.manifest_path);
    fs::path out_dir = args.base.out_dir.empty() ? manifest.dir : fs::path(args.base.out_dir);
    if (out_dir.empty()) out_dir = ".";
    fs::create_directories(out_dir);
    const mdf::Image gt = manifest_ground_truth(manifest);

    double best_beta = args.betas.front();
    double best_rmse = std::numeric_limits<double>::infinity();
    std::ofstream csv(out_dir / "sweep_beta.csv");
    if (!csv) throw mdf::io_error("cannot write sweep_beta.csv");
    csv << "beta,rmse_percent,final_residual,iterations\n";
    for (double beta : args.betas) {
        ReconstructArgs rargs = args.base;
        rargs.beta = beta;
        rargs.beta_given = true;
        const PnPRun run = run_pnp_method(manifest, rargs);
        const double rmse = mdf::rmse_percent(run.image, gt);
        char line[160];
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%d\n", beta, rmse,
                      run.report.final_residual, run.report.iterations);
        csv << line;
        std::cout << "beta=" << beta << " rmse=" << rmse << "%\n";
        if (rmse < best_rmse) {
            best_rmse = rmse;
            best_beta = beta;
        }
    }

    json best;
    best["best_beta"] = best_beta;
    best["best_rmse_percent"] = best_rmse;
    best["method"] = args.base.method;
    std::ofstream jout(out_dir / "sweep_beta.json");
    if (!jout) throw mdf::io_error("cannot write sweep_beta.json");
    jout << best.dump(2) << "\n";
    std::cout << "best beta=" << best_beta << " (rmse=" << best_rmse << "%)\n";
}

void add_pnp_options(CLI::App* sub, ReconstructArgs& args) {
    sub->add_option("--beta", args.beta, "regularization weight");
    sub->add_option("--sigma-lambda", args.sigma_lambda,
                    "augmented Lagrangian parameter, or 'auto' to estimate from the baseline");
    sub->add_option("--iters", args.max_iters, "maximum P&P iterations");
    sub->add_option("--tol", args.tol, "stopping residual");
    sub->add_option("--patch-size", args.patch_size, "patch side length (odd)");
    sub->add_option("--stride", args.stride, "library extraction stride");
    sub->add_option("--max-patches", args.max_patches, "library size cap");
    sub->add_option("--lib-seed", args.lib_seed, "library subsampling seed");
    sub->add_option("--library", args.library_path, "prebuilt patch library (skips building)");
    sub->add_option("--search-radius", args.search_radius, "nlm-sym search window radius");
    sub->add_option("--sinkhorn-iters", args.sinkhorn_iters, "nlm-sym symmetrization sweeps");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-resolution data fusion reconstruction toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic experiment from a config");
    simulate->add_option("--config", sim.config_path, "experiment config JSON")->required();
    simulate->add_option("--out", sim.out_dir, "output directory")->required();
    simulate->add_flag("--pgm", sim.pgm, "also write PGM previews");
    simulate->callback([&] { cmd_simulate(sim); });

    BuildLibraryArgs bl;
    auto* build = app.add_subcommand("build-library", "extract a patch library from images");
    build->add_option("--image", bl.images, "high-resolution source image (repeatable)")->required();
    build->add_option("--out", bl.out_path, "library output path")->required();
    build->add_option("--patch-size", bl.patch_size, "patch side length (odd)");
    build->add_option("--stride", bl.stride, "grid stride");
    build->add_option("--max-patches", bl.max_patches, "library size cap");
    build->add_option("--seed", bl.seed, "subsampling seed");
    build->callback([&] { cmd_build_library(bl); });

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "run a reconstruction method on a manifest");
    reconstruct->add_option("--manifest", rec.manifest_path, "experiment manifest")->required();
    reconstruct->add_option("--method", rec.method, "mdf | cubic | shepard | nlm-sym");
    reconstruct->add_option("--out", rec.out_dir, "output directory (default: manifest dir)");
    reconstruct->add_option("--label", rec.label, "output file tag (default: method)");
    reconstruct->add_flag("--timing", rec.timing, "include wall time in the report JSON");
    reconstruct->add_flag("--pgm", rec.pgm, "also write a PGM preview");
    add_pnp_options(reconstruct, rec);
    reconstruct->callback([&] {
        rec.beta_given = reconstruct->count("--beta") > 0;
        cmd_reconstruct(rec);
    });

    DenoiseArgs den;
    auto* denoise = app.add_subcommand("denoise", "apply a denoiser to an image");
    denoise->add_option("--input", den.input, "input image")->required();
    denoise->add_option("--output", den.output, "output image")->required();
    denoise->add_option("--prior", den.prior, "lbnlm | nlm | nlm-sym");
    denoise->add_option("--sigma-n", den.sigma_n, "assumed noise standard deviation");
    denoise->add_option("--library", den.library_path, "prebuilt patch library");
    denoise->add_option("--library-image", den.library_image, "build the library from this image");
    denoise->add_option("--patch-size", den.patch_size, "patch side length (odd)");
    denoise->add_option("--stride", den.stride, "library extraction stride");
    denoise->add_option("--max-patches", den.max_patches, "library size cap");
    denoise->add_option("--lib-seed", den.lib_seed, "library subsampling seed");
    denoise->add_option("--search-radius", den.search_radius, "nlm search window radius");
    denoise->add_option("--sinkhorn-iters", den.sinkhorn_iters, "nlm-sym symmetrization sweeps");
    denoise->callback([&] { cmd_denoise(den); });

    InvertArgs inv;
    auto* invert = app.add_subcommand("invert", "apply the forward-model inversion operator once");
    invert->add_option("--manifest", inv.manifest_path, "experiment manifest")->required();
    invert->add_option("--input", inv.input, "candidate image")->required();
    invert->add_option("--output", inv.output, "output image")->required();
    invert->add_option("--sigma-lambda", inv.sigma_lambda, "proximal weight");
    invert->callback([&] { cmd_invert(inv); });

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a reconstruction against the ground truth");
    evaluate->add_option("--manifest", ev.manifest_path, "experiment manifest")->required();
    evaluate->add_option("--image", ev.image_path, "reconstruction to score")->required();
    evaluate->add_option("--label", ev.label, "row label for the results CSV");
    evaluate->add_option("--results-csv", ev.results_csv, "append one result row to this CSV");
    evaluate->add_option("--residuals", ev.residuals_csv, "residual CSV to plot");
    evaluate->add_option("--svg", ev.svg_path, "write a residual-curve SVG here");
    evaluate->callback([&] { cmd_evaluate(ev); });

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep-beta", "grid-search beta by reconstruction error");
    sweep_cmd->add_option("--manifest", sweep.base.manifest_path, "experiment manifest")->required();
    sweep_cmd->add_option("--betas", sweep.betas, "beta values to try")->required()->delimiter(',');
    sweep_cmd->add_option("--method", sweep.base.method, "mdf | nlm-sym");
    sweep_cmd->add_option("--out", sweep.base.out_dir, "output directory (default: manifest dir)");
    add_pnp_options(sweep_cmd, sweep.base);
    sweep_cmd->callback([&] { cmd_sweep_beta(sweep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
