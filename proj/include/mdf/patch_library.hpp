#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdf/image.hpp"

namespace mdf {

// N_l flattened high-resolution patches of size N_p x N_p plus their center
// pixels; the material-specific prior model. Immutable once built.
struct PatchLibrary {
    int patch_size = 0;            // N_p, odd
    std::vector<double> patches;   // N_l * N_p^2, row-major per patch
    std::vector<double> centers;   // N_l center pixels z_r
    std::vector<std::string> source_meta;

    std::int64_t count() const { return static_cast<std::int64_t>(centers.size()); }
    int values_per_patch() const { return patch_size * patch_size; }
    const double* patch(std::int64_t r) const {
        return patches.data() + r * values_per_patch();
    }

    void validate() const;
};

// reflect-101 border index: -1 -> 1, -2 -> 2, n -> n-2, ...
int reflect_index(int i, int n);

// Row-major N_p x N_p patch centered at (cx, cy); out-of-bounds coordinates
// reflected across the border. out must hold N_p^2 values.
void extract_patch(const Image& img, int cx, int cy, int patch_size, double* out);
std::vector<double> extract_patch(const Image& img, int cx, int cy, int patch_size);

// Patch centers on a stride-spaced interior grid starting at offset
// (N_p-1)/2 over each image, in image order then row-major grid order.
// If the total exceeds max_patches, a seeded uniform sub-sample of exactly
// max_patches is kept (original order preserved).
PatchLibrary build_library(const std::vector<Image>& images, int patch_size,
                           int stride, std::optional<std::int64_t> max_patches,
                           std::uint64_t seed);

// Serialization: raw-f64 blob of the patch data at `path` plus JSON header
// <path>.json with {"patch_size", "count", "provenance"}.
void save_library(const PatchLibrary& lib, const std::string& path);
PatchLibrary load_library(const std::string& path);

}  // namespace mdf
