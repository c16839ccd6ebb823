#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdf/image.hpp"
#include "mdf/measurement.hpp"
#include "mdf/patch_library.hpp"
#include "mdf/denoise.hpp"

namespace mdf {

// A denoiser handle H(v; sigma_n). The loop passes its own sigma_n each call.
using Denoiser = std::function<Image(const Image&, double)>;

Denoiser make_identity_denoiser();
Denoiser make_lbnlm_denoiser(const PatchLibrary& lib);
Denoiser make_internal_nlm_denoiser(NlmConfig cfg);  // cfg.sigma_n is overridden per call

struct PnPConfig {
    double beta = 0.5;
    std::optional<double> sigma_lambda;  // empty: estimate from the initializer
    std::optional<double> sigma_w;       // empty: use the measurement set's value
    int max_iters = 100;
    double residual_tol = 1e-4;
    bool record_history = true;
};

// Per-iteration view for instrumentation; references are valid only during
// the observer call.
struct IterationTrace {
    int k = 0;
    double sigma_lambda = 0.0;
    double sigma_n = 0.0;
    double residual_running = 0.0;  // ||x^ - v^|| / ||x^(k)||
    const Image& x_tilde;
    const Image& x_hat;
    const Image& v_hat;
    const Image& u;
};
using IterationObserver = std::function<void(const IterationTrace&)>;

struct ReconstructionReport {
    std::string method;
    std::string prior;
    // residuals ||x^(k) - v^(k)|| / ||x^(final)||, one entry per iteration
    std::vector<double> residual_history;
    // stopping-rule residuals ||x^(k) - v^(k)|| / ||x^(k)||
    std::vector<double> residual_history_running;
    double final_residual = 0.0;
    int iterations = 0;
    bool non_monotone_residual = false;
    std::optional<double> rmse_percent;
    double rho = 0.0;      // filled by the caller from acquisition counts
    double speedup = 0.0;  // filled by the caller from acquisition counts
    double wall_time_s = 0.0;
    // config echo
    double beta = 0.0;
    double sigma_lambda = 0.0;
    double sigma_n = 0.0;
    double sigma_w = 0.0;
    int max_iters = 0;
    double residual_tol = 0.0;
    std::int64_t library_patches = 0;
};

// sigma_lambda^2 = mean over pixels of the variance in a 7 x 7 window
// (reflect-101 borders), floored at 1.
double estimate_sigma_lambda(const Image& baseline);

// ||x^ - v^||_2 / ||x_ref||_2. Throws on zero reference norm.
double normalized_residual(const Image& x_hat, const Image& v_hat, const Image& x_ref);

// The plug-and-play loop:
//   x~ <- v^ - u;  x^ <- F(x~; sigma_lambda);  v~ <- x^ + u;
//   v^ <- H(v~; sigma_n);  u <- u + (x^ - v^)
// with v^ initialized to `init`, u to zero, and sigma_n = sqrt(beta) *
// sigma_lambda. Runs until the running residual drops below residual_tol or
// max_iters is reached; the reported history is renormalized post hoc by the
// final ||x^||. Non-finite state aborts with a diagnostic.
std::pair<Image, ReconstructionReport> pnp_reconstruct(
    const MeasurementSet& meas, const Denoiser& prior, const PnPConfig& cfg,
    const Image& init, const IterationObserver& observer = {});

// Report serialization. Timing is nondeterministic, so it is only included
// when include_timing is set; everything else round-trips bit-identically
// between runs.
std::string report_to_json(const ReconstructionReport& report, bool include_timing);
void write_report(const ReconstructionReport& report, const std::string& path,
                  bool include_timing);

// CSV columns: k, r_running, r_final_norm.
void write_residual_csv(const ReconstructionReport& report, const std::string& path);

}  // namespace mdf
