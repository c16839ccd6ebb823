#pragma once

#include <cstdint>
#include <variant>

#include "mdf/image.hpp"
#include "mdf/measurement.hpp"

namespace mdf {

// Jittered hexagonal lattice of isotropic Gaussian spots over a constant
// background, clipped to [0, 255]. Deterministic under the seed. Stands in
// for atomic-resolution micrographs at desk scale.
struct LatticeSceneConfig {
    int width = 256;
    int height = 256;
    double spot_spacing = 12.0;  // lattice constant, pixels
    double spot_sigma = 2.0;     // Gaussian sigma, pixels
    double amplitude = 150.0;
    double jitter = 0.0;         // uniform per-spot offset in [-jitter, jitter]
    double background = 20.0;
    std::uint64_t seed = 0;
};

Image gen_lattice_scene(const LatticeSceneConfig& cfg);

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

struct SrMode {
    int factor = 4;
};
struct SparseMode {
    double fraction = 0.05;
    std::uint64_t seed = 0;
};
using ExperimentMode = std::variant<SrMode, SparseMode>;

// One simulated acquisition: measurements over the full field of view, the
// full-resolution crop that feeds the patch library, and the ground truth.
// m_low / m_high are the pixel counts for the acquisition statistics.
struct Experiment {
    Image ground_truth;
    MeasurementSet measurements;
    Image library_image;
    Rect library_region;
    std::int64_t m_low = 0;
    std::int64_t m_high = 0;
};

// sigma_w > 0 adds i.i.d. Gaussian noise (seeded) to the measured values.
// The library crop may overlap the evaluation field; the acquisition scheme
// images one sample, so the overlap is intentional.
Experiment gen_experiment(const Image& scene, const ExperimentMode& mode,
                          const Rect& library_region, double sigma_w,
                          std::uint64_t noise_seed);

Image crop(const Image& img, const Rect& region);

}  // namespace mdf
