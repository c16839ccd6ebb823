#include "mdf/synthbench.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mdf/rng.hpp"

namespace mdf {

Image crop(const Image& img, const Rect& region) {
    if (region.width < 1 || region.height < 1 || region.x < 0 || region.y < 0 ||
        region.x + region.width > img.width || region.y + region.height > img.height) {
        throw std::invalid_argument("crop region out of bounds");
    }
    Image out(region.width, region.height);
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) {
            out.at(x, y) = img.at(region.x + x, region.y + y);
        }
    }
    return out;
}

Image gen_lattice_scene(const LatticeSceneConfig& cfg) {
    check_dims(cfg.width, cfg.height);
    if (!(cfg.spot_spacing > 0.0)) throw std::invalid_argument("spot spacing must be positive");
    if (!(cfg.spot_sigma > 0.0)) throw std::invalid_argument("spot sigma must be positive");
    if (cfg.jitter < 0.0) throw std::invalid_argument("jitter must be nonnegative");
    if (cfg.amplitude < 0.0) throw std::invalid_argument("amplitude must be nonnegative");
    if (cfg.spot_spacing <= 2.0 * cfg.spot_sigma) {
        std::fprintf(stderr,
                     "warning: spot spacing %.3g <= 2 * sigma %.3g; spots will overlap heavily\n",
                     cfg.spot_spacing, cfg.spot_sigma);
    }

    Image img(cfg.width, cfg.height, cfg.background);

    // Hexagonal lattice anchored at the image center; odd rows shifted by half
    // a lattice constant. Gaussians are evaluated out to 6 sigma, so dropped
    // tails are below 2e-8 of the amplitude.
    const double row_step = cfg.spot_spacing * std::sqrt(3.0) / 2.0;
    const double cx0 = (cfg.width - 1) / 2.0;
    const double cy0 = (cfg.height - 1) / 2.0;
    const int eval_radius = static_cast<int>(std::ceil(6.0 * cfg.spot_sigma));
    const double margin = eval_radius + cfg.jitter;
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.spot_sigma * cfg.spot_sigma);

    const auto i_min = static_cast<std::int64_t>(std::ceil((-margin - cy0) / row_step));
    const auto i_max = static_cast<std::int64_t>(std::floor((cfg.height - 1 + margin - cy0) / row_step));

    Xoshiro256pp rng(cfg.seed);
    for (std::int64_t i = i_min; i <= i_max; ++i) {
        const double sy0 = cy0 + static_cast<double>(i) * row_step;
        const double offset = (i & 1) ? cfg.spot_spacing / 2.0 : 0.0;
        const auto j_min = static_cast<std::int64_t>(
            std::ceil((-margin - cx0 - offset) / cfg.spot_spacing));
        const auto j_max = static_cast<std::int64_t>(
            std::floor((cfg.width - 1 + margin - cx0 - offset) / cfg.spot_spacing));
        for (std::int64_t j = j_min; j <= j_max; ++j) {
            const double jx = cfg.jitter > 0.0 ? rng.uniform(-cfg.jitter, cfg.jitter) : 0.0;
            const double jy = cfg.jitter > 0.0 ? rng.uniform(-cfg.jitter, cfg.jitter) : 0.0;
            const double sx = cx0 + offset + static_cast<double>(j) * cfg.spot_spacing + jx;
            const double sy = sy0 + jy;

            const int px0 = std::max(0, static_cast<int>(std::floor(sx)) - eval_radius);
            const int px1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(sx)) + eval_radius);
            const int py0 = std::max(0, static_cast<int>(std::floor(sy)) - eval_radius);
            const int py1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(sy)) + eval_radius);
            for (int py = py0; py <= py1; ++py) {
                const double dy = py - sy;
                for (int px = px0; px <= px1; ++px) {
                    const double dx = px - sx;
                    img.at(px, py) += cfg.amplitude * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
                }
            }
        }
    }

    for (double& v : img.pixels) {
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
    }
    return img;
}

Experiment gen_experiment(const Image& scene, const ExperimentMode& mode,
                          const Rect& library_region, double sigma_w,
                          std::uint64_t noise_seed) {
    if (sigma_w < 0.0) throw std::invalid_argument("sigma_w must be nonnegative");

    Experiment exp;
    exp.ground_truth = scene;
    exp.library_image = crop(scene, library_region);
    exp.library_region = library_region;
    exp.m_high = static_cast<std::int64_t>(library_region.width) * library_region.height;

    if (const auto* sr = std::get_if<SrMode>(&mode)) {
        MeasurementSet m;
        m.y = block_downsample(scene, sr->factor);
        m.model = SuperResolutionModel{sr->factor};
        m.sigma_w = sigma_w;
        exp.m_low = static_cast<std::int64_t>(m.y.size());
        exp.measurements = std::move(m);
    } else {
        const auto& sp = std::get<SparseMode>(mode);
        exp.measurements = sample_sparse(scene, sp.fraction, sp.seed);
        exp.measurements.sigma_w = sigma_w;
        exp.m_low = std::get<SparseSampleModel>(exp.measurements.model).mask.count();
    }

    if (sigma_w > 0.0) {
        Xoshiro256pp rng(noise_seed);
        for (double& v : exp.measurements.y.pixels) v += rng.gaussian(sigma_w);
    }
    return exp;
}

}  // namespace mdf
