#include "tcca/cca.hpp"

#include <cmath>

#include "tcca/errors.hpp"
#include "tcca/linalg.hpp"

namespace tcca {

std::vector<Index> RankOneDirections::dims() const {
  std::vector<Index> d;
  d.reserve(factors.size());
  for (const auto& f : factors) d.push_back(f.size());
  return d;
}

Vector RankOneDirections::composite_vec() const {
  Matrix k = Matrix::Ones(1, 1);
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) k = kronecker(k, *it);
  return k.col(0);
}

double sample_correlation(const Vector& u_vec, const Vector& v_vec, const Matrix& x_stacked,
                          const Matrix& y_stacked) {
  if (u_vec.size() != x_stacked.cols() || v_vec.size() != y_stacked.cols())
    throw InputError("sample_correlation: direction length does not match sample size");
  if (x_stacked.rows() != y_stacked.rows())
    throw InputError("sample_correlation: sample counts differ");
  const Vector xs = x_stacked * u_vec;
  const Vector ys = y_stacked * v_vec;
  const double sx = xs.squaredNorm();
  const double sy = ys.squaredNorm();
  if (sx == 0.0 || sy == 0.0)
    throw DegenerateProjectionError("sample_correlation: zero-variance projection");
  return xs.dot(ys) / std::sqrt(sx * sy);
}

double sample_correlation(const RankOneDirections& u, const RankOneDirections& v,
                          const DataTensor& x, const DataTensor& y) {
  return sample_correlation(u.composite_vec(), v.composite_vec(), x.stacked(), y.stacked());
}

double sample_correlation(const DenseTensor& u, const DenseTensor& v, const DataTensor& x,
                          const DataTensor& y) {
  return sample_correlation(vectorize(u), vectorize(v), x.stacked(), y.stacked());
}

std::pair<double, double> constraint_residual(const Vector& u_vec, const Vector& v_vec,
                                              const Matrix& x_stacked, const Matrix& y_stacked) {
  const double n = static_cast<double>(x_stacked.rows());
  const double sx = (x_stacked * u_vec).squaredNorm() / n;
  const double sy = (y_stacked * v_vec).squaredNorm() / n;
  return {std::abs(1.0 - sx), std::abs(1.0 - sy)};
}

std::pair<double, double> constraint_residual(const RankOneDirections& u,
                                              const RankOneDirections& v, const DataTensor& x,
                                              const DataTensor& y) {
  return constraint_residual(u.composite_vec(), v.composite_vec(), x.stacked(), y.stacked());
}

CcaSolution cca_1d(const Matrix& x_rows, const Matrix& y_rows, double ridge, bool center) {
  if (x_rows.rows() != y_rows.rows()) throw InputError("cca_1d: sample counts differ");
  const Index n = x_rows.rows();
  if (n < 2) throw InputError("cca_1d: need at least 2 samples");
  Matrix xc = x_rows;
  Matrix yc = y_rows;
  if (center) {
    xc.rowwise() -= x_rows.colwise().mean();
    yc.rowwise() -= y_rows.colwise().mean();
  }
  const double n_inv = 1.0 / static_cast<double>(n);
  const Matrix sxx = n_inv * (xc.transpose() * xc);
  const Matrix syy = n_inv * (yc.transpose() * yc);
  const Matrix sxy = n_inv * (xc.transpose() * yc);
  const Matrix rx = spd_inv_sqrt(sxx, ridge);
  const Matrix ry = spd_inv_sqrt(syy, ridge);
  const Rank1 top = best_rank1(rx * sxy * ry);
  return {rx * top.u, ry * top.v, top.sigma};
}

CcaSolution cca_1d(const DataTensor& x, const DataTensor& y, double ridge, bool center) {
  return cca_1d(x.stacked(), y.stacked(), ridge, center);
}

}  // namespace tcca
