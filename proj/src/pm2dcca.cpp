#include "tcca/pm2dcca.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "tcca/errors.hpp"
#include "tcca/hopm.hpp"

namespace tcca {

namespace {

// Projections (x_t u_other) for every sample, as rows: contract the mode we
// are NOT updating.
Matrix contracted_samples(const Matrix& stacked, const std::vector<Index>& dims,
                          const Vector& other, Index update_mode) {
  const Index keep = update_mode;
  const Index drop = 1 - update_mode;
  std::vector<Matrix> blocks(2);
  blocks[static_cast<std::size_t>(drop)] = other;
  return stacked * contraction_kernel(blocks, keep, dims[static_cast<std::size_t>(keep)]);
}

Vector metric_solve(const Matrix& s, double ridge, const Vector& rhs) {
  Matrix h = s;
  h.diagonal().array() += ridge;
  Eigen::LDLT<Matrix> ldlt(h);
  const Vector d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || dmax <= 0.0 ||
      (ridge == 0.0 && d.minCoeff() < 1e-12 * dmax))
    throw RankDeficientError("power_step: singular metric and ridge is 0");
  return ldlt.solve(rhs);
}

Vector metric_normalize(const Vector& raw, const Matrix& s, double ridge) {
  const double q = raw.dot(s * raw) + ridge * raw.squaredNorm();
  if (q <= 0.0 || !std::isfinite(q))
    throw DegenerateProjectionError("power_step: zero metric norm after update");
  return raw / std::sqrt(q);
}

}  // namespace

ModeCovariances mode_covariances(const DataTensor& x, const DataTensor& y, const Vector& u_other,
                                 const Vector& v_other, Index mode, double ridge) {
  if (x.sample_order() != 2 || y.sample_order() != 2)
    throw InputError("mode_covariances: samples must be 2-mode");
  return mode_covariances_stacked(x.stacked(), y.stacked(), x.sample_dims(), y.sample_dims(),
                                  u_other, v_other, mode, ridge);
}

ModeCovariances mode_covariances_stacked(const Matrix& x_stacked, const Matrix& y_stacked,
                                         const std::vector<Index>& dims_x,
                                         const std::vector<Index>& dims_y, const Vector& u_other,
                                         const Vector& v_other, Index mode, double ridge) {
  if (dims_x.size() != 2 || dims_y.size() != 2)
    throw InputError("mode_covariances: samples must be 2-mode");
  if (mode != 0 && mode != 1) throw InputError("mode_covariances: mode must be 0 or 1");
  if (u_other.size() != dims_x[static_cast<std::size_t>(1 - mode)] ||
      v_other.size() != dims_y[static_cast<std::size_t>(1 - mode)])
    throw InputError("mode_covariances: contraction vector length mismatch");
  if (x_stacked.rows() != y_stacked.rows())
    throw InputError("mode_covariances: sample counts differ");
  const double n_inv = 1.0 / static_cast<double>(x_stacked.rows());
  const Matrix a = contracted_samples(x_stacked, dims_x, u_other, mode);
  const Matrix b = contracted_samples(y_stacked, dims_y, v_other, mode);
  ModeCovariances cov;
  cov.sxx = n_inv * (a.transpose() * a);
  cov.syy = n_inv * (b.transpose() * b);
  cov.sxy = n_inv * (a.transpose() * b);
  cov.ridge = ridge;
  cov.mode = mode;
  return cov;
}

std::pair<Vector, Vector> power_step(const ModeCovariances& cov, const Vector& u,
                                     const Vector& v) {
  if (u.size() != cov.sxx.rows() || v.size() != cov.syy.rows())
    throw InputError("power_step: vector lengths do not match covariances");
  const Vector u_raw = metric_solve(cov.sxx, cov.ridge, cov.sxy * v);
  const Vector v_raw = metric_solve(cov.syy, cov.ridge, cov.sxy.transpose() * u);
  return {metric_normalize(u_raw, cov.sxx, cov.ridge),
          metric_normalize(v_raw, cov.syy, cov.ridge)};
}

MetricAngle metric_angle(const Vector& w1, const Vector& w2, const Matrix& metric) {
  const double q1 = w1.dot(metric * w1);
  const double q2 = w2.dot(metric * w2);
  if (q1 <= 0.0 || q2 <= 0.0)
    throw DegenerateProjectionError("metric_angle: zero metric-norm input");
  double c = w1.dot(metric * w2) / std::sqrt(q1 * q2);
  c = std::min(1.0, std::max(-1.0, c));
  return {c, std::sqrt(std::max(0.0, 1.0 - c * c))};
}

}  // namespace tcca
