#include "tcca/synth.hpp"

#include <Eigen/QR>
#include <cmath>

#include "tcca/errors.hpp"
#include "tcca/linalg.hpp"

namespace tcca {

namespace {

void check_orthonormal(const Matrix& m, const char* name) {
  const double dev = (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).norm();
  if (dev > 1e-8)
    throw InputError(std::string("model loading ") + name + " is not column-orthonormal");
}

double draw(const P2dccaModel& model, Rng& rng, std::normal_distribution<double>& normal) {
  return model.sampler ? model.sampler(rng) : normal(rng);
}

}  // namespace

double P2dccaModel::signal_level() const {
  return signal_mask.array().square().maxCoeff();
}

void P2dccaModel::validate() const {
  if (signal_mask.rows() != signal_mask.cols() || noise_mask.rows() != noise_mask.cols() ||
      signal_mask.rows() != noise_mask.rows())
    throw InputError("masks must be square and equally sized");
  const Index kk = k();
  if (x_left.cols() != kk || x_right.cols() != kk || y_left.cols() != kk || y_right.cols() != kk)
    throw InputError("loadings must have k columns");
  check_orthonormal(x_left, "x_left");
  check_orthonormal(x_right, "x_right");
  check_orthonormal(y_left, "y_left");
  check_orthonormal(y_right, "y_right");
  const Matrix var =
      (signal_mask.array().square() + noise_mask.array().square()).matrix();
  if ((var.array() - 1.0).abs().maxCoeff() > 1e-8)
    throw InputError("mask variances must satisfy signal^2 + noise^2 == 1 entrywise");
}

Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  if (rows < cols) throw InputError("random_orthonormal: rows must be >= cols");
  Rng rng(seed);
  const Matrix g = standard_normal_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  // Fix the sign ambiguity so the result is deterministic.
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

P2dccaModel default_p2dcca_model(double lambda, std::uint64_t seed) {
  if (lambda < 0.0 || lambda > 1.0) throw InputError("lambda must be in [0, 1]");
  P2dccaModel model;
  model.seed = seed;
  model.x_left = random_orthonormal(20, 2, sub_seed(seed, 1));
  model.x_right = random_orthonormal(15, 2, sub_seed(seed, 2));
  model.y_left = random_orthonormal(15, 2, sub_seed(seed, 3));
  model.y_right = random_orthonormal(20, 2, sub_seed(seed, 4));
  model.signal_mask = Matrix::Zero(2, 2);
  model.signal_mask(0, 0) = std::sqrt(lambda);
  model.noise_mask = Matrix::Ones(2, 2);
  model.noise_mask(0, 0) = std::sqrt(1.0 - lambda);
  model.validate();
  return model;
}

P2dccaModel two_signal_p2dcca_model(double theta1, double theta2, std::uint64_t seed) {
  if (!(theta1 > theta2 && theta2 > 0.0 && theta1 <= 1.0))
    throw InputError("need 1 >= theta1 > theta2 > 0");
  P2dccaModel model = default_p2dcca_model(theta1, seed);
  model.signal_mask(1, 1) = std::sqrt(theta2);
  model.noise_mask(1, 1) = std::sqrt(1.0 - theta2);
  model.validate();
  return model;
}

P2dccaModel custom_p2dcca_model(Index d1x, Index d2x, Index d1y, Index d2y,
                                const Matrix& signal_mask, std::uint64_t seed) {
  P2dccaModel model;
  model.seed = seed;
  const Index k = signal_mask.rows();
  model.x_left = random_orthonormal(d1x, k, sub_seed(seed, 1));
  model.x_right = random_orthonormal(d2x, k, sub_seed(seed, 2));
  model.y_left = random_orthonormal(d1y, k, sub_seed(seed, 3));
  model.y_right = random_orthonormal(d2y, k, sub_seed(seed, 4));
  model.signal_mask = signal_mask;
  model.noise_mask = (1.0 - signal_mask.array().square()).sqrt().matrix();
  model.validate();
  return model;
}

std::pair<DataTensor, DataTensor> generate(const P2dccaModel& model, Index n) {
  if (n < 1) throw InputError("generate: need n >= 1");
  model.validate();
  const Index kk = model.k();
  Rng rng(model.seed);
  std::normal_distribution<double> normal;
  std::vector<DenseTensor> xs, ys;
  xs.reserve(static_cast<std::size_t>(n));
  ys.reserve(static_cast<std::size_t>(n));
  Matrix c(kk, kk), ex(kk, kk), ey(kk, kk);
  for (Index t = 0; t < n; ++t) {
    for (Index j = 0; j < kk; ++j)
      for (Index i = 0; i < kk; ++i) c(i, j) = draw(model, rng, normal);
    for (Index j = 0; j < kk; ++j)
      for (Index i = 0; i < kk; ++i) ex(i, j) = draw(model, rng, normal);
    for (Index j = 0; j < kk; ++j)
      for (Index i = 0; i < kk; ++i) ey(i, j) = draw(model, rng, normal);
    const Matrix wx = model.signal_mask.cwiseProduct(c) + model.noise_mask.cwiseProduct(ex);
    const Matrix wy = model.signal_mask.cwiseProduct(c) + model.noise_mask.cwiseProduct(ey);
    const Matrix xt = model.x_left * wx * model.x_right.transpose();
    const Matrix yt = model.y_left * wy * model.y_right.transpose();
    xs.emplace_back(std::vector<Index>{xt.rows(), xt.cols()},
                    std::vector<double>(xt.data(), xt.data() + xt.size()));
    ys.emplace_back(std::vector<Index>{yt.rows(), yt.cols()},
                    std::vector<double>(yt.data(), yt.data() + yt.size()));
  }
  return {DataTensor::from_samples(xs), DataTensor::from_samples(ys)};
}

VecCovariances population_vec_covariances(const P2dccaModel& model) {
  model.validate();
  VecCovariances cov;
  cov.sxx = kronecker(model.x_right * model.x_right.transpose(),
                      model.x_left * model.x_left.transpose());
  cov.syy = kronecker(model.y_right * model.y_right.transpose(),
                      model.y_left * model.y_left.transpose());
  const Matrix theta = model.signal_mask.array().square().matrix();
  Vector theta_vec = Eigen::Map<const Vector>(theta.data(), theta.size());
  cov.sxy = kronecker(model.x_right, model.x_left) * theta_vec.asDiagonal() *
            kronecker(model.y_right, model.y_left).transpose();
  return cov;
}

ModeCovariances population_mode_covariances(const P2dccaModel& model, const Vector& u_other,
                                            const Vector& v_other, Index mode, double ridge) {
  model.validate();
  if (mode != 0 && mode != 1) throw InputError("mode must be 0 or 1");
  const Matrix theta = model.signal_mask.array().square().matrix();
  ModeCovariances cov;
  cov.mode = mode;
  cov.ridge = ridge;
  if (mode == 0) {
    const Vector a = model.x_right.transpose() * u_other;
    const Vector b = model.y_right.transpose() * v_other;
    cov.sxx = a.squaredNorm() * (model.x_left * model.x_left.transpose());
    cov.syy = b.squaredNorm() * (model.y_left * model.y_left.transpose());
    const Vector g = theta * a.cwiseProduct(b);
    cov.sxy = model.x_left * g.asDiagonal() * model.y_left.transpose();
  } else {
    const Vector a = model.x_left.transpose() * u_other;
    const Vector b = model.y_left.transpose() * v_other;
    cov.sxx = a.squaredNorm() * (model.x_right * model.x_right.transpose());
    cov.syy = b.squaredNorm() * (model.y_right * model.y_right.transpose());
    const Vector g = theta.transpose() * a.cwiseProduct(b);
    cov.sxy = model.x_right * g.asDiagonal() * model.y_right.transpose();
  }
  return cov;
}

PopulationOptimum population_optimum(const P2dccaModel& model) {
  const VecCovariances cov = population_vec_covariances(model);
  const Matrix rx = spd_inv_sqrt(cov.sxx);
  const Matrix ry = spd_inv_sqrt(cov.syy);
  const Rank1 top = best_rank1(rx * cov.sxy * ry);

  PopulationOptimum opt;
  opt.rho = top.sigma;
  opt.u_vec = rx * top.u;
  opt.v_vec = ry * top.v;

  const auto dx = model.dims_x();
  const auto dy = model.dims_y();
  const Rank1 fu = best_rank1(Eigen::Map<const Matrix>(opt.u_vec.data(), dx[0], dx[1]));
  const Rank1 fv = best_rank1(Eigen::Map<const Matrix>(opt.v_vec.data(), dy[0], dy[1]));
  opt.u1 = fu.u;
  opt.u2 = fu.v;
  opt.v1 = fv.u;
  opt.v2 = fv.v;
  return opt;
}

double error_metric(const std::vector<Vector>& truth, const std::vector<Vector>& estimate) {
  if (truth.size() != estimate.size()) throw InputError("error_metric: factor counts differ");
  double total = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const double tn = truth[j].norm();
    const double en = estimate[j].norm();
    if (tn == 0.0 || en == 0.0) throw InputError("error_metric: zero factor");
    const double c = truth[j].dot(estimate[j]) / (tn * en);
    total += 1.0 - c * c;
  }
  return total;
}

double error_metric(const PopulationOptimum& truth, const HopmState& estimate) {
  std::vector<Vector> t = truth.u_factors();
  const auto tv = truth.v_factors();
  t.insert(t.end(), tv.begin(), tv.end());
  std::vector<Vector> e = estimate.u.factors;
  e.insert(e.end(), estimate.v.factors.begin(), estimate.v.factors.end());
  return error_metric(t, e);
}

}  // namespace tcca
