#pragma once

#include <string>

#include "mdf/image.hpp"
#include "mdf/measurement.hpp"

namespace mdf {

enum class ImageFormat {
    pgm8,     // PGM P5, maxval 255
    pgm16,    // PGM P5, maxval 65535, big-endian samples
    raw_f64,  // little-endian doubles, row-major, sidecar JSON <path>.json
    autodetect,
};

// Loads an image onto the [0, 255] real scale regardless of file bit depth
// (16-bit samples are scaled by 255/65535). autodetect picks the format from
// the file contents (PGM magic + maxval) or the .f64 extension.
// Throws io_error / format_error with a message naming the defect.
Image load_image(const std::string& path, ImageFormat format = ImageFormat::autodetect);

// PGM output clips to [0, 255] and rounds half-to-even; raw_f64 is lossless.
// Non-finite pixel values are an error, never silently clipped.
void save_image(const Image& img, const std::string& path, ImageFormat format);

// Mask file: JSON {"width": W, "height": H, "indices": [...]}.
SamplingMask load_mask(const std::string& path);
void save_mask(const SamplingMask& mask, const std::string& path);

}  // namespace mdf
