#include "mdf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mdf/parallel.hpp"

namespace mdf {

namespace {

// Cubic convolution kernel, a = -0.5 (Catmull-Rom-like).
double cubic_kernel(double s) {
    constexpr double a = -0.5;
    s = std::abs(s);
    if (s < 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
    if (s < 2.0) return (((s - 5.0) * s + 8.0) * s - 4.0) * a;
    return 0.0;
}

int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

struct Taps {
    int index[4];
    double weight[4];
};

// Output pixel i samples the low-resolution grid at (i + 0.5) / L - 0.5,
// which puts source pixel k at the center of its L x L destination block.
std::vector<Taps> make_axis_taps(int out_size, int src_size, int factor) {
    std::vector<Taps> taps(out_size);
    for (int i = 0; i < out_size; ++i) {
        const double u = (i + 0.5) / factor - 0.5;
        const double base = std::floor(u);
        const double t = u - base;
        const int i0 = static_cast<int>(base);
        for (int k = 0; k < 4; ++k) {
            taps[i].index[k] = clamp_index(i0 - 1 + k, src_size);
            taps[i].weight[k] = cubic_kernel(t - static_cast<double>(k - 1));
        }
    }
    return taps;
}

}  // namespace

Image bicubic_interpolate(const Image& y, int factor) {
    if (factor < 2) throw std::invalid_argument("super-resolution factor must be >= 2");
    check_dims(static_cast<std::int64_t>(y.width) * factor,
               static_cast<std::int64_t>(y.height) * factor);

    Image out(y.width * factor, y.height * factor);
    const auto xtaps = make_axis_taps(out.width, y.width, factor);
    const auto ytaps = make_axis_taps(out.height, y.height, factor);

    parallel_for(0, out.height, [&](int y0, int y1) {
        for (int oy = y0; oy < y1; ++oy) {
            const Taps& ty = ytaps[oy];
            for (int ox = 0; ox < out.width; ++ox) {
                const Taps& tx = xtaps[ox];
                double acc = 0.0;
                for (int ky = 0; ky < 4; ++ky) {
                    const double* row = &y.pixels[static_cast<std::size_t>(ty.index[ky]) * y.width];
                    for (int kx = 0; kx < 4; ++kx) {
                        acc += ty.weight[ky] * tx.weight[kx] * row[tx.index[kx]];
                    }
                }
                out.at(ox, oy) = acc < 0.0 ? 0.0 : acc;
            }
        }
    });
    return out;
}

namespace {

struct Candidate {
    double d2;
    std::int64_t index;  // position in mask.measured

    bool operator<(const Candidate& other) const {
        return d2 != other.d2 ? d2 < other.d2 : index < other.index;
    }
};

// Uniform grid bucket index over the measured points.
struct BucketGrid {
    int cell = 1;
    int cols = 0;
    int rows = 0;
    std::vector<std::vector<std::int64_t>> buckets;

    BucketGrid(const SamplingMask& mask) {
        const double n = static_cast<double>(mask.width) * mask.height;
        const double m = static_cast<double>(mask.count());
        // ~2 measured points per cell on average
        cell = std::max(1, static_cast<int>(std::floor(std::sqrt(2.0 * n / m))));
        cols = (mask.width + cell - 1) / cell;
        rows = (mask.height + cell - 1) / cell;
        buckets.resize(static_cast<std::size_t>(cols) * rows);
        for (std::int64_t i = 0; i < mask.count(); ++i) {
            const std::int64_t idx = mask.measured[i];
            const int px = static_cast<int>(idx % mask.width);
            const int py = static_cast<int>(idx / mask.width);
            buckets[static_cast<std::size_t>(py / cell) * cols + px / cell].push_back(i);
        }
    }
};

}  // namespace

Image shepard_interpolate(const MeasurementSet& m) {
    const auto* sparse = std::get_if<SparseSampleModel>(&m.model);
    if (!sparse) throw std::invalid_argument("shepard interpolation needs a sparse-sampling model");
    m.validate();
    const SamplingMask& mask = sparse->mask;
    const int w = mask.width;
    const int h = mask.height;
    const auto k_want = static_cast<std::size_t>(
        std::min<std::int64_t>(kShepardNeighbors, mask.count()));

    // measured-pixel lookup: position in mask.measured, or -1
    std::vector<std::int64_t> measured_at(static_cast<std::size_t>(w) * h, -1);
    for (std::int64_t i = 0; i < mask.count(); ++i) measured_at[mask.measured[i]] = i;

    const BucketGrid grid(mask);
    Image out(w, h);

    parallel_for(0, h, [&](int row0, int row1) {
        std::vector<Candidate> candidates;
        for (int py = row0; py < row1; ++py) {
            for (int px = 0; px < w; ++px) {
                const std::size_t lin = static_cast<std::size_t>(py) * w + px;
                if (measured_at[lin] >= 0) {
                    out.pixels[lin] = m.y.pixels[measured_at[lin]];
                    continue;
                }

                // expand square rings of cells until the k-th best distance
                // cannot be beaten by anything in the next ring
                candidates.clear();
                const int cx = px / grid.cell;
                const int cy = py / grid.cell;
                const int max_ring = std::max(grid.cols, grid.rows);
                for (int ring = 0; ring <= max_ring; ++ring) {
                    if (candidates.size() >= k_want) {
                        std::nth_element(candidates.begin(), candidates.begin() + (k_want - 1),
                                         candidates.end());
                        const double kth = candidates[k_want - 1].d2;
                        // closest possible point in ring r is (r-1) cells away
                        const double reach = static_cast<double>(ring - 1) * grid.cell;
                        if (reach > 0.0 && reach * reach > kth) break;
                    }
                    bool any_cell = false;
                    for (int by = cy - ring; by <= cy + ring; ++by) {
                        if (by < 0 || by >= grid.rows) continue;
                        for (int bx = cx - ring; bx <= cx + ring; ++bx) {
                            if (bx < 0 || bx >= grid.cols) continue;
                            if (std::max(std::abs(bx - cx), std::abs(by - cy)) != ring) continue;
                            any_cell = true;
                            for (std::int64_t i : grid.buckets[static_cast<std::size_t>(by) * grid.cols + bx]) {
                                const std::int64_t midx = mask.measured[i];
                                const double dx = static_cast<double>(midx % w) - px;
                                const double dy = static_cast<double>(midx / w) - py;
                                candidates.push_back({dx * dx + dy * dy, i});
                            }
                        }
                    }
                    if (!any_cell && candidates.size() >= k_want) break;
                }

                const std::size_t k = std::min(k_want, candidates.size());
                std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
                double wsum = 0.0;
                double vsum = 0.0;
                for (std::size_t i = 0; i < k; ++i) {
                    const double wgt = 1.0 / candidates[i].d2;  // d2 > 0 for unmeasured pixels
                    wsum += wgt;
                    vsum += wgt * m.y.pixels[candidates[i].index];
                }
                out.pixels[lin] = vsum / wsum;
            }
        }
    });
    return out;
}

}  // namespace mdf
