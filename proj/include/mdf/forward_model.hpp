#pragma once

#include "mdf/image.hpp"
#include "mdf/measurement.hpp"

namespace mdf {

// Proximal map of the super-resolution data term,
//   argmin_x (1/2 sigma_w^2) ||y - D x||^2 + (1/2 sigma_lambda^2) ||x - x~||^2,
// clipped at zero, where D is the L x L block mean. For sigma_w = 0 this is
// the projection [x~ + U(y - D x~)]_+ with U the block replication, which
// satisfies D(F(x~)) == y exactly while no clipping is active. For
// sigma_w > 0 the quadratic separates per block and is solved in closed form
// (the block normal matrix is identity plus a rank-one all-ones term).
Image sr_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda);

// Sparse-sampling counterpart. sigma_w = 0: measured pixels take their
// measured values, unmeasured pixels pass through. sigma_w > 0: measured
// pixels take the precision-weighted mean
//   (y/sigma_w^2 + x~/sigma_lambda^2) / (1/sigma_w^2 + 1/sigma_lambda^2).
// Everything is clipped at zero.
Image sparse_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda);

// Dispatch on the measurement model.
Image apply_inversion(const Image& x_tilde, const MeasurementSet& m, double sigma_lambda);

}  // namespace mdf
