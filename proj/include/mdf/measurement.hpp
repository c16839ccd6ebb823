#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "mdf/image.hpp"

namespace mdf {

// Sparse sampling pattern: M distinct pixel indices, strictly increasing.
// The implied M x N matrix has exactly one 1 per row, at most one per column.
struct SamplingMask {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> measured;

    std::int64_t count() const { return static_cast<std::int64_t>(measured.size()); }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

struct SuperResolutionModel {
    int factor = 2;  // L >= 2
};

struct SparseSampleModel {
    SamplingMask mask;
};

// Observed data y plus forward-model descriptor and noise level.
// For super-resolution y is the low-resolution image; for sparse sampling
// y is a 1 x M row of values ordered like mask.measured.
struct MeasurementSet {
    Image y;
    std::variant<SuperResolutionModel, SparseSampleModel> model;
    double sigma_w = 0.0;

    bool is_super_resolution() const {
        return std::holds_alternative<SuperResolutionModel>(model);
    }
    void validate() const;
    int target_width() const;
    int target_height() const;
};

// Mean over each L x L block; output (W/L) x (H/L). Dimensions must divide.
Image block_downsample(const Image& x, int factor);

// Each source pixel copied into its L x L block; output (W*L) x (H*L).
// block_downsample(replicate_upsample(y, L), L) == y exactly.
Image replicate_upsample(const Image& y, int factor);

// Draws round(fraction * N) distinct pixel indices uniformly without
// replacement (xoshiro256++ stream of `seed`) and copies the values of x.
MeasurementSet sample_sparse(const Image& x, double fraction, std::uint64_t seed);

}  // namespace mdf
