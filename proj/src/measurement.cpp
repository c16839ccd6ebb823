#include "mdf/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mdf/rng.hpp"

namespace mdf {

void SamplingMask::validate() const {
    check_dims(width, height);
    const std::int64_t n = static_cast<std::int64_t>(width) * height;
    if (measured.empty()) throw std::invalid_argument("sampling mask has no measured pixels");
    if (count() > n) throw std::invalid_argument("sampling mask has more indices than pixels");
    std::int64_t prev = -1;
    for (std::int64_t idx : measured) {
        if (idx <= prev) throw std::invalid_argument("mask indices must be strictly increasing");
        if (idx >= n) throw std::invalid_argument("mask index out of range");
        prev = idx;
    }
}

void MeasurementSet::validate() const {
    if (sigma_w < 0.0) throw std::invalid_argument("sigma_w must be nonnegative");
    if (!y.all_finite()) throw std::invalid_argument("measurement values must be finite");
    if (const auto* sr = std::get_if<SuperResolutionModel>(&model)) {
        if (sr->factor < 2) throw std::invalid_argument("super-resolution factor must be >= 2");
        check_dims(y.width, y.height);
    } else {
        const auto& sparse = std::get<SparseSampleModel>(model);
        sparse.mask.validate();
        if (static_cast<std::int64_t>(y.size()) != sparse.mask.count()) {
            throw std::invalid_argument("sparse value count does not match mask");
        }
    }
}

int MeasurementSet::target_width() const {
    if (const auto* sr = std::get_if<SuperResolutionModel>(&model)) {
        return y.width * sr->factor;
    }
    return std::get<SparseSampleModel>(model).mask.width;
}

int MeasurementSet::target_height() const {
    if (const auto* sr = std::get_if<SuperResolutionModel>(&model)) {
        return y.height * sr->factor;
    }
    return std::get<SparseSampleModel>(model).mask.height;
}

Image block_downsample(const Image& x, int factor) {
    if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
    if (x.width % factor != 0 || x.height % factor != 0) {
        throw std::invalid_argument("image dimensions " + std::to_string(x.width) + "x" +
                                    std::to_string(x.height) + " not divisible by " +
                                    std::to_string(factor));
    }
    Image out(x.width / factor, x.height / factor);
    const double block_n = static_cast<double>(factor) * factor;
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            double acc = 0.0;
            bool uniform = true;
            const double first = x.pixels[static_cast<std::size_t>(oy) * factor * x.width +
                                          static_cast<std::size_t>(ox) * factor];
            for (int dy = 0; dy < factor; ++dy) {
                const double* row = &x.pixels[static_cast<std::size_t>(oy * factor + dy) * x.width +
                                              static_cast<std::size_t>(ox) * factor];
                for (int dx = 0; dx < factor; ++dx) {
                    acc += row[dx];
                    uniform = uniform && row[dx] == first;
                }
            }
            // a uniform block's mean is its value, bit for bit; summing and
            // dividing would round and break the upsample/downsample identity
            out.at(ox, oy) = uniform ? first : acc / block_n;
        }
    }
    return out;
}

Image replicate_upsample(const Image& y, int factor) {
    if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
    check_dims(static_cast<std::int64_t>(y.width) * factor,
               static_cast<std::int64_t>(y.height) * factor);
    Image out(y.width * factor, y.height * factor);
    for (int oy = 0; oy < out.height; ++oy) {
        const double* src = &y.pixels[static_cast<std::size_t>(oy / factor) * y.width];
        double* dst = &out.pixels[static_cast<std::size_t>(oy) * out.width];
        for (int ox = 0; ox < out.width; ++ox) dst[ox] = src[ox / factor];
    }
    return out;
}

MeasurementSet sample_sparse(const Image& x, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("sampling fraction must lie in (0, 1]");
    }
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const auto m = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(n)));
    if (m < 1) throw std::invalid_argument("sampling fraction selects zero pixels");

    // partial Fisher-Yates over the index range, then restore ascending order
    std::vector<std::int64_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::int64_t{0});
    Xoshiro256pp rng(seed);
    for (std::int64_t i = 0; i < m; ++i) {
        const auto j = i + static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(m);
    std::sort(indices.begin(), indices.end());

    MeasurementSet out;
    out.y = Image(static_cast<int>(m), 1);
    for (std::int64_t i = 0; i < m; ++i) out.y.pixels[i] = x.pixels[indices[i]];
    SparseSampleModel model;
    model.mask.width = x.width;
    model.mask.height = x.height;
    model.mask.measured = std::move(indices);
    out.model = std::move(model);
    return out;
}

}  // namespace mdf
