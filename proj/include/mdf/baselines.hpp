#pragma once

#include "mdf/image.hpp"
#include "mdf/measurement.hpp"

namespace mdf {

// Bicubic convolution upsampling (kernel parameter a = -0.5), sample
// positions aligned so each low-resolution pixel sits at the center of its
// L x L block. Borders are edge-clamped; the output is clipped at zero.
Image bicubic_interpolate(const Image& y, int factor);

// Shepard inverse-distance interpolation of a sparsely sampled image:
// measured pixels keep their values exactly, every other pixel is the
// 1/d^2-weighted mean of its 16 nearest measured pixels.
Image shepard_interpolate(const MeasurementSet& m);

inline constexpr int kShepardNeighbors = 16;

}  // namespace mdf
