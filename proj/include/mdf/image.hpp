#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mdf {

// Row-major grid of real-valued intensities, nominal range [0, 255].
// The single currency of every operation in the toolkit.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0);

    std::size_t size() const { return pixels.size(); }

    double& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    double at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool all_finite() const;
    bool same_dims(const Image& other) const {
        return width == other.width && height == other.height;
    }
};

// Throws std::invalid_argument unless 0 < w, 0 < h and w*h fits comfortably
// in memory and in a 32-bit signed index space.
void check_dims(std::int64_t w, std::int64_t h);

double l2_norm(const Image& img);

// max(v, 0) applied per pixel, in place.
void clip_nonnegative(Image& img);

}  // namespace mdf
