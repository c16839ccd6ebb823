#include "mdf/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mdf {

double rmse_percent(const Image& a, const Image& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("rmse_percent: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    const auto n = static_cast<double>(a.size());
    return 100.0 * std::sqrt(acc / n) / 255.0;
}

AcquisitionStats acquisition_stats(std::int64_t n_recon, std::int64_t m_low,
                                   std::int64_t m_high) {
    if (n_recon <= 0) throw std::invalid_argument("reconstructed pixel count must be positive");
    if (m_low <= 0) throw std::invalid_argument("low-resolution pixel count must be positive");
    if (m_high < 0) throw std::invalid_argument("high-resolution pixel count must be nonnegative");
    if (m_low + m_high > n_recon) {
        throw std::invalid_argument("measured pixel count exceeds reconstructed pixel count");
    }
    AcquisitionStats stats;
    stats.rho = static_cast<double>(m_high) / static_cast<double>(m_low);
    stats.speedup = static_cast<double>(n_recon) / static_cast<double>(m_low + m_high);
    return stats;
}

}  // namespace mdf
