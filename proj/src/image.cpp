#include "mdf/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdf {

Image::Image(int w, int h, double fill) {
    check_dims(w, h);
    width = w;
    height = h;
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

bool Image::all_finite() const {
    for (double v : pixels) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void check_dims(std::int64_t w, std::int64_t h) {
    if (w <= 0 || h <= 0) {
        throw std::invalid_argument("image dimensions must be positive, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    }
    // keep linear indices well inside int32 range
    if (w > (1 << 24) || h > (1 << 24) || w * h > (std::int64_t{1} << 31) - 1) {
        throw std::invalid_argument("image dimension overflow: " + std::to_string(w) +
                                    "x" + std::to_string(h));
    }
}

double l2_norm(const Image& img) {
    double acc = 0.0;
    for (double v : img.pixels) acc += v * v;
    return std::sqrt(acc);
}

void clip_nonnegative(Image& img) {
    for (double& v : img.pixels) {
        if (v < 0.0) v = 0.0;
    }
}

}  // namespace mdf
