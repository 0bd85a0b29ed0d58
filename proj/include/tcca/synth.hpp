#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "tcca/directions.hpp"
#include "tcca/hopm.hpp"
#include "tcca/pm2dcca.hpp"
#include "tcca/rng.hpp"
#include "tcca/tensor.hpp"

namespace tcca {

/// Generative model for paired matrix samples sharing a masked latent:
///   x_t = XL (S .* c_t + N .* e_xt) XR',   y_t = YL (S .* c_t + N .* e_yt) YR',
/// with column-orthonormal loadings, k x k masks S (signal) and N (noise)
/// satisfying S.^2 + N.^2 == 1 entrywise so the latent sum has unit variance,
/// and c, e_x, e_y filled with i.i.d. draws from `sampler` (standard normal
/// by default).
struct P2dccaModel {
  Matrix x_left;   // d1x x k
  Matrix x_right;  // d2x x k
  Matrix y_left;   // d1y x k
  Matrix y_right;  // d2y x k
  Matrix signal_mask;
  Matrix noise_mask;
  std::uint64_t seed = 0;
  std::function<double(Rng&)> sampler;  // null = standard normal

  Index k() const { return signal_mask.rows(); }
  std::vector<Index> dims_x() const { return {x_left.rows(), x_right.rows()}; }
  std::vector<Index> dims_y() const { return {y_left.rows(), y_right.rows()}; }

  /// Largest entry of signal_mask^2; equals the population optimal
  /// correlation.
  double signal_level() const;

  /// Checks loading orthonormality and the unit-variance mask constraint.
  void validate() const;
};

/// Column-orthonormal matrix from the QR of a standard normal draw,
/// deterministic per seed. Requires rows >= cols.
Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed);

/// The stock benchmark model: k = 2, x samples 20x15, y samples 15x20,
/// signal mask [[sqrt(lambda),0],[0,0]], noise mask [[sqrt(1-lambda),1],[1,1]].
P2dccaModel default_p2dcca_model(double lambda, std::uint64_t seed);

/// Same shapes but two latent signal components with variances theta1 >
/// theta2 > 0 on the mask diagonal.
P2dccaModel two_signal_p2dcca_model(double theta1, double theta2, std::uint64_t seed);

/// Arbitrary shapes and masks; loadings drawn orthonormal from the seed.
/// noise_mask is derived from signal_mask so the variance constraint holds.
P2dccaModel custom_p2dcca_model(Index d1x, Index d2x, Index d1y, Index d2y,
                                const Matrix& signal_mask, std::uint64_t seed);

std::pair<DataTensor, DataTensor> generate(const P2dccaModel& model, Index n);

struct VecCovariances {
  Matrix sxx;  // (XR XR') kron (XL XL')
  Matrix syy;
  Matrix sxy;  // kron(XR, XL) diag(vec(S.^2)) kron(YR, YL)'
};

/// Exact population covariances of the vectorized samples.
VecCovariances population_vec_covariances(const P2dccaModel& model);

/// Exact population analogue of mode_covariances at fixed contraction
/// vectors.
ModeCovariances population_mode_covariances(const P2dccaModel& model, const Vector& u_other,
                                            const Vector& v_other, Index mode,
                                            double ridge = 0.0);

struct PopulationOptimum {
  Vector u1, u2, v1, v2;  // unit factor vectors
  Vector u_vec, v_vec;    // composite directions, unit population variance
  double rho = 0.0;

  std::vector<Vector> u_factors() const { return {u1, u2}; }
  std::vector<Vector> v_factors() const { return {v1, v2}; }
};

/// Whitens the analytic covariances, takes the top singular pair, un-whitens,
/// and factors the resulting directions (exactly rank-1 when reshaped).
PopulationOptimum population_optimum(const P2dccaModel& model);

/// Sum over aligned factors of 1 - (t'e)^2 with both sides unit-normalized;
/// invariant to per-factor sign flips.
double error_metric(const std::vector<Vector>& truth, const std::vector<Vector>& estimate);
double error_metric(const PopulationOptimum& truth, const HopmState& estimate);

}  // namespace tcca
