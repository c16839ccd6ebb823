#include "mdf/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mdf/parallel.hpp"

namespace mdf {

namespace {

// Neumaier-compensated accumulator. Keeps weighted reductions stable enough
// that reordering the library changes results by less than 1e-12.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

double squared_distance(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void check_sigma(double sigma_n) {
    if (!(sigma_n > 0.0)) throw std::invalid_argument("sigma_n must be positive");
}

}  // namespace

std::vector<double> lbnlm_weights(std::span<const double> patch,
                                  const PatchLibrary& lib, double sigma_n) {
    check_sigma(sigma_n);
    const int np2 = lib.values_per_patch();
    if (static_cast<int>(patch.size()) != np2) {
        throw std::invalid_argument("patch length does not match the library patch size");
    }
    const auto n = lib.count();
    std::vector<double> weights(n);

    double min_d2 = std::numeric_limits<double>::infinity();
    for (std::int64_t r = 0; r < n; ++r) {
        weights[r] = squared_distance(patch.data(), lib.patch(r), np2);
        min_d2 = std::min(min_d2, weights[r]);
    }

    // exp is shifted by the smallest distance; the best-matching patch
    // contributes exp(0) = 1, so the row cannot underflow to zero.
    const double inv_denom = 1.0 / (2.0 * static_cast<double>(np2) * sigma_n * sigma_n);
    CompensatedSum total;
    for (std::int64_t r = 0; r < n; ++r) {
        weights[r] = std::exp(-(weights[r] - min_d2) * inv_denom);
        total.add(weights[r]);
    }
    const double inv_total = 1.0 / total.value();
    for (double& w : weights) w *= inv_total;
    return weights;
}

Image lbnlm_denoise(const Image& v, const PatchLibrary& lib, double sigma_n) {
    check_sigma(sigma_n);
    lib.validate();
    check_dims(v.width, v.height);

    const int np = lib.patch_size;
    const int np2 = np * np;
    const auto n = lib.count();
    const double inv_denom = 1.0 / (2.0 * static_cast<double>(np2) * sigma_n * sigma_n);

    Image out(v.width, v.height);
    parallel_for(0, v.height, [&](int y0, int y1) {
        std::vector<double> patch(np2);
        std::vector<double> d2(n);
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < v.width; ++x) {
                extract_patch(v, x, y, np, patch.data());

                double min_d2 = std::numeric_limits<double>::infinity();
                for (std::int64_t r = 0; r < n; ++r) {
                    d2[r] = squared_distance(patch.data(), lib.patch(r), np2);
                    min_d2 = std::min(min_d2, d2[r]);
                }

                CompensatedSum wsum;
                CompensatedSum zsum;
                for (std::int64_t r = 0; r < n; ++r) {
                    const double w = std::exp(-(d2[r] - min_d2) * inv_denom);
                    wsum.add(w);
                    zsum.add(w * lib.centers[r]);
                }
                out.at(x, y) = zsum.value() / wsum.value();
            }
        }
    });
    return out;
}

Image internal_nlm_denoise(const Image& v, const NlmConfig& cfg) {
    check_sigma(cfg.sigma_n);
    if (cfg.patch_size < 1 || cfg.patch_size % 2 == 0) {
        throw std::invalid_argument("patch size must be odd and positive");
    }
    if (cfg.search_radius < 1) throw std::invalid_argument("search radius must be >= 1");
    if (cfg.sinkhorn_iters < 0) throw std::invalid_argument("sinkhorn_iters must be >= 0");
    check_dims(v.width, v.height);

    const int w = v.width;
    const int h = v.height;
    const auto n = static_cast<std::size_t>(v.size());
    const int radius = cfg.search_radius;
    const int side = 2 * radius + 1;
    const std::size_t window = static_cast<std::size_t>(side) * side;
    const int np = cfg.patch_size;
    const int np2 = np * np;
    const double inv_denom = 1.0 / (2.0 * static_cast<double>(np2) * cfg.sigma_n * cfg.sigma_n);

    // Weight matrix in window-slot layout: slot (dy, dx) of pixel s holds
    // w_{s, s+offset}. Slots whose target falls outside the image stay zero.
    std::vector<double> weights(n * window);

    parallel_for(0, h, [&](int y0, int y1) {
        std::vector<double> center_patch(np2);
        std::vector<double> other_patch(np2);
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                extract_patch(v, x, y, np, center_patch.data());
                double* row = &weights[(static_cast<std::size_t>(y) * w + x) * window];
                double row_sum = 0.0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int ty = y + dy;
                    if (ty < 0 || ty >= h) continue;
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int tx = x + dx;
                        if (tx < 0 || tx >= w) continue;
                        extract_patch(v, tx, ty, np, other_patch.data());
                        const double d2 =
                            squared_distance(center_patch.data(), other_patch.data(), np2);
                        const double wgt = std::exp(-d2 * inv_denom);
                        row[(dy + radius) * side + (dx + radius)] = wgt;
                        row_sum += wgt;
                    }
                }
                const double inv = 1.0 / row_sum;  // self-weight exp(0) keeps the sum > 0
                for (std::size_t i = 0; i < window; ++i) row[i] *= inv;
            }
        }
    });

    if (cfg.symmetrize) {
        // Sinkhorn sweeps toward a doubly stochastic matrix. Each sweep
        // divides by column sums, then by row sums, so row sums end at 1.
        std::vector<double> col_sum(n);
        for (int it = 0; it < cfg.sinkhorn_iters; ++it) {
            std::fill(col_sum.begin(), col_sum.end(), 0.0);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double* row = &weights[(static_cast<std::size_t>(y) * w + x) * window];
                    for (int dy = std::max(-radius, -y); dy <= std::min(radius, h - 1 - y); ++dy) {
                        for (int dx = std::max(-radius, -x); dx <= std::min(radius, w - 1 - x); ++dx) {
                            col_sum[static_cast<std::size_t>(y + dy) * w + (x + dx)] +=
                                row[(dy + radius) * side + (dx + radius)];
                        }
                    }
                }
            }
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    double* row = &weights[(static_cast<std::size_t>(y) * w + x) * window];
                    double row_sum = 0.0;
                    for (int dy = std::max(-radius, -y); dy <= std::min(radius, h - 1 - y); ++dy) {
                        for (int dx = std::max(-radius, -x); dx <= std::min(radius, w - 1 - x); ++dx) {
                            double& wgt = row[(dy + radius) * side + (dx + radius)];
                            wgt /= col_sum[static_cast<std::size_t>(y + dy) * w + (x + dx)];
                            row_sum += wgt;
                        }
                    }
                    const double inv = 1.0 / row_sum;
                    for (std::size_t i = 0; i < window; ++i) row[i] *= inv;
                }
            }
        }
    }

    Image out(w, h);
    parallel_for(0, h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const double* row = &weights[(static_cast<std::size_t>(y) * w + x) * window];
                CompensatedSum acc;
                for (int dy = std::max(-radius, -y); dy <= std::min(radius, h - 1 - y); ++dy) {
                    for (int dx = std::max(-radius, -x); dx <= std::min(radius, w - 1 - x); ++dx) {
                        acc.add(row[(dy + radius) * side + (dx + radius)] * v.at(x + dx, y + dy));
                    }
                }
                out.at(x, y) = acc.value();
            }
        }
    });
    return out;
}

}  // namespace mdf
