#include "mdf/forward_model.hpp"

#include <stdexcept>
#include <string>
#include <variant>

namespace mdf {

namespace {

void check_sr_dims(const Image& x_tilde, const Image& y, int factor) {
    if (x_tilde.width != y.width * factor || x_tilde.height != y.height * factor) {
        throw std::invalid_argument("candidate image " + std::to_string(x_tilde.width) + "x" +
                                    std::to_string(x_tilde.height) +
                                    " inconsistent with measurements at factor " +
                                    std::to_string(factor));
    }
}

}  // namespace

Image sr_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda) {
    const auto* sr = std::get_if<SuperResolutionModel>(&m.model);
    if (!sr) throw std::invalid_argument("measurement set is not a super-resolution model");
    if (!(sigma_lambda > 0.0)) throw std::invalid_argument("sigma_lambda must be positive");
    const int L = sr->factor;
    check_sr_dims(x_tilde, m.y, L);

    // Per-block correction weight. sigma_w = 0: replace each block mean by the
    // measured value (weight 1). sigma_w > 0: the quadratic's exact minimizer
    // shifts each block uniformly by c/(1+c) of the mean residual, where
    // c = sigma_lambda^2 / (L^2 sigma_w^2); the block normal matrix is a
    // rank-one perturbation of the identity, so this is the full solve.
    double gain = 1.0;
    if (m.sigma_w > 0.0) {
        const double c = (sigma_lambda * sigma_lambda) /
                         (static_cast<double>(L) * L * m.sigma_w * m.sigma_w);
        gain = c / (1.0 + c);
    }

    Image out(x_tilde.width, x_tilde.height);
    const double inv_block = 1.0 / (static_cast<double>(L) * L);
    for (int by = 0; by < m.y.height; ++by) {
        for (int bx = 0; bx < m.y.width; ++bx) {
            double mean = 0.0;
            for (int dy = 0; dy < L; ++dy) {
                const double* row = &x_tilde.pixels[static_cast<std::size_t>(by * L + dy) * x_tilde.width +
                                                    static_cast<std::size_t>(bx) * L];
                for (int dx = 0; dx < L; ++dx) mean += row[dx];
            }
            mean *= inv_block;
            const double shift = gain * (m.y.at(bx, by) - mean);
            for (int dy = 0; dy < L; ++dy) {
                const std::size_t base =
                    static_cast<std::size_t>(by * L + dy) * x_tilde.width +
                    static_cast<std::size_t>(bx) * L;
                for (int dx = 0; dx < L; ++dx) {
                    const double v = x_tilde.pixels[base + dx] + shift;
                    out.pixels[base + dx] = v < 0.0 ? 0.0 : v;
                }
            }
        }
    }
    return out;
}

Image sparse_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda) {
    const auto* sparse = std::get_if<SparseSampleModel>(&m.model);
    if (!sparse) throw std::invalid_argument("measurement set is not a sparse-sampling model");
    if (!(sigma_lambda > 0.0)) throw std::invalid_argument("sigma_lambda must be positive");
    const SamplingMask& mask = sparse->mask;
    if (x_tilde.width != mask.width || x_tilde.height != mask.height) {
        throw std::invalid_argument("candidate image does not match the sampling mask dimensions");
    }
    const std::int64_t n = static_cast<std::int64_t>(x_tilde.size());

    Image out = x_tilde;
    clip_nonnegative(out);
    if (m.sigma_w == 0.0) {
        for (std::size_t i = 0; i < mask.measured.size(); ++i) {
            const std::int64_t idx = mask.measured[i];
            if (idx < 0 || idx >= n) throw std::invalid_argument("mask index out of range");
            const double v = m.y.pixels[i];
            out.pixels[idx] = v < 0.0 ? 0.0 : v;
        }
    } else {
        const double wy = 1.0 / (m.sigma_w * m.sigma_w);
        const double wx = 1.0 / (sigma_lambda * sigma_lambda);
        const double inv = 1.0 / (wy + wx);
        for (std::size_t i = 0; i < mask.measured.size(); ++i) {
            const std::int64_t idx = mask.measured[i];
            if (idx < 0 || idx >= n) throw std::invalid_argument("mask index out of range");
            const double v = (m.y.pixels[i] * wy + x_tilde.pixels[idx] * wx) * inv;
            out.pixels[idx] = v < 0.0 ? 0.0 : v;
        }
    }
    return out;
}

Image apply_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda) {
    if (m.is_super_resolution()) return sr_inversion(x_tilde, m, sigma_lambda);
    return sparse_inversion(x_tilde, m, sigma_lambda);
}

}  // namespace mdf
