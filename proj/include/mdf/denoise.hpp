#pragma once

#include <span>
#include <vector>

#include "mdf/image.hpp"
#include "mdf/patch_library.hpp"

namespace mdf {

// Configuration for the internal-patch NLM denoiser. With symmetrize the
// row-normalized weight matrix additionally undergoes sinkhorn_iters
// alternating column/row normalization sweeps (each sweep normalizes
// columns, then rows, so the matrix always leaves with unit row sums).
struct NlmConfig {
    double sigma_n = 1.0;
    int patch_size = 7;
    int search_radius = 5;
    bool symmetrize = false;
    int sinkhorn_iters = 10;
};

// Library weights for one patch:
//   w_r = exp(-||P_s - L_r||^2 / (2 N_p^2 sigma_n^2)),  then sum-normalized.
// The largest exponent is subtracted before exponentiation, so the row can
// never underflow to all zeros.
std::vector<double> lbnlm_weights(std::span<const double> patch,
                                  const PatchLibrary& lib, double sigma_n);

// Library-based non-local means: every output pixel is the weighted mean of
// the library center pixels, with the patch around the pixel extracted under
// reflect-101 borders. Output values lie in [min z_r, max z_r].
Image lbnlm_denoise(const Image& v, const PatchLibrary& lib, double sigma_n);

// Conventional NLM restricted to patches centered inside a square search
// window, with optional Sinkhorn symmetrization of the weight matrix.
Image internal_nlm_denoise(const Image& v, const NlmConfig& cfg);

}  // namespace mdf
