#pragma once

#include <utility>

#include "tcca/tensor.hpp"
#include "tcca/types.hpp"

namespace tcca {

/// Covariances of one mode of 2-mode data after contracting the other mode
/// with fixed vectors. `mode` names the side these covariances update.
struct ModeCovariances {
  Matrix sxx;
  Matrix syy;
  Matrix sxy;
  double ridge = 0.0;
  Index mode = 0;
};

/// Sample mode covariances: for mode 0,
///   sxx = (1/n) sum (x_t u_other)(x_t u_other)',
///   sxy = (1/n) sum (x_t u_other)(y_t v_other)',
/// and with transposed samples for mode 1.
ModeCovariances mode_covariances(const DataTensor& x, const DataTensor& y, const Vector& u_other,
                                 const Vector& v_other, Index mode, double ridge = 0.0);

/// Same computation on pre-stacked samples (rows = vectorized samples);
/// avoids restacking when covariances are rebuilt every power step.
ModeCovariances mode_covariances_stacked(const Matrix& x_stacked, const Matrix& y_stacked,
                                         const std::vector<Index>& dims_x,
                                         const std::vector<Index>& dims_y, const Vector& u_other,
                                         const Vector& v_other, Index mode, double ridge = 0.0);

/// One power step in the (sxx + ridge I) metric:
///   u' = normalize((sxx + ridge I)^{-1} sxy v),
///   v' = normalize((syy + ridge I)^{-1} sxy' u),
/// both right-hand sides use the incoming (u, v). Normalization puts the
/// output at unit norm in the regularized metric. Throws RankDeficientError
/// when ridge == 0 and a metric is singular.
std::pair<Vector, Vector> power_step(const ModeCovariances& cov, const Vector& u,
                                     const Vector& v);

struct MetricAngle {
  double cos_theta = 0.0;
  double sin_theta = 0.0;
};

/// Angle between vectors in the inner product induced by `metric`; cosine is
/// clamped to [-1, 1]. Throws DegenerateProjectionError when either vector
/// has (near-)zero metric norm.
MetricAngle metric_angle(const Vector& w1, const Vector& w2, const Matrix& metric);

}  // namespace tcca
