#include "mdf/rng.hpp"

#include <cmath>

namespace mdf {

double Xoshiro256pp::gaussian(double sigma) {
    // u1 in (0, 1] so the log is finite
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace mdf
