#pragma once

#include <cstdint>

#include "mdf/image.hpp"

namespace mdf {

// 100 * ||a - b||_2 / (sqrt(N) * 255): RMSE as a percentage of the 8-bit
// dynamic range.
double rmse_percent(const Image& a, const Image& b);

struct AcquisitionStats {
    double rho = 0.0;      // high-res pixels measured / low-res pixels measured
    double speedup = 0.0;  // reconstructed pixels / total pixels measured
};

AcquisitionStats acquisition_stats(std::int64_t n_recon, std::int64_t m_low,
                                   std::int64_t m_high);

}  // namespace mdf
