#pragma once

#include <utility>

#include "tcca/directions.hpp"
#include "tcca/tensor.hpp"
#include "tcca/types.hpp"

namespace tcca {

struct CcaSolution {
  Vector u;
  Vector v;
  double rho = 0.0;
};

/// Sample correlation of the projections u'x_t and v'y_t, computed from raw
/// (uncentered) second moments:
///   (1/n) sum <u,x_t><v,y_t> / sqrt((1/n) sum <u,x_t>^2 (1/n) sum <v,y_t>^2).
/// Rows of the stacked matrices are vectorized samples. Throws
/// DegenerateProjectionError when either projection is identically zero.
double sample_correlation(const Vector& u_vec, const Vector& v_vec, const Matrix& x_stacked,
                          const Matrix& y_stacked);
double sample_correlation(const RankOneDirections& u, const RankOneDirections& v,
                          const DataTensor& x, const DataTensor& y);
double sample_correlation(const DenseTensor& u, const DenseTensor& v, const DataTensor& x,
                          const DataTensor& y);

/// |1 - (1/n) sum <u,x_t>^2| and the y-side analogue.
std::pair<double, double> constraint_residual(const Vector& u_vec, const Vector& v_vec,
                                              const Matrix& x_stacked, const Matrix& y_stacked);
std::pair<double, double> constraint_residual(const RankOneDirections& u,
                                              const RankOneDirections& v, const DataTensor& x,
                                              const DataTensor& y);

/// Classical vector CCA via whitened SVD: u = (Sxx + ridge I)^{-1/2} ubar
/// where (ubar, vbar) is the top singular pair of the whitened
/// cross-covariance. rho is the corresponding singular value (always >= 0).
/// `center` subtracts empirical means first; disable it to match the raw
/// second-moment correlation above.
CcaSolution cca_1d(const Matrix& x_rows, const Matrix& y_rows, double ridge = 0.0,
                   bool center = true);
CcaSolution cca_1d(const DataTensor& x, const DataTensor& y, double ridge = 0.0,
                   bool center = true);

}  // namespace tcca
