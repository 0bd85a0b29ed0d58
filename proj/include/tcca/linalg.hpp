#pragma once

#include <optional>

#include "tcca/types.hpp"

namespace tcca {

/// Ridge least squares: f(u) = (1/2n) ||A u - b||^2 + (r/2) ||u||^2.
struct LeastSquaresProblem {
  Matrix design;   // n x d
  Vector target;   // n
  double ridge = 0.0;

  Index n() const { return design.rows(); }
  Index d() const { return design.cols(); }
  double objective(const Vector& u) const;
  Vector gradient(const Vector& u) const;
};

/// Solves the normal equations (A'A/n + r I) u = A'b/n.
/// Throws RankDeficientError when r == 0 and A'A is singular; callers that
/// want pseudo-inverse behavior should retry with a small relative ridge.
Vector ridge_solve_exact(const LeastSquaresProblem& p);

/// ridge_solve_exact with automatic fallback: on rank deficiency retries with
/// r = 1e-8 * trace(A'A/n)/d, which keeps the solution equivariant under
/// rescaling of A and b.
Vector ridge_solve_auto(const LeastSquaresProblem& p);

struct InexactOptions {
  std::optional<Vector> warm_start;
  /// When set, the returned iterate is walked back along the last descent
  /// step until its certified gap is ~eps, so the allowance is fully used.
  bool calibrate_gap = false;
  Index max_iterations = 1000000;
};

struct InexactSolution {
  Vector u;
  double gap_bound = 0.0;  // certified upper bound on f(u) - min f
  Index iterations = 0;
};

/// Gradient descent with fixed step 2/(sigma_min+sigma_max); stops once the
/// strong-convexity certificate ||grad f(u)||^2 / (2 sigma_min) drops to eps.
/// The certificate upper-bounds the true gap. Throws BudgetError (carrying
/// the best iterate and its gap bound) when the iteration budget runs out.
InexactSolution ridge_solve_inexact(const LeastSquaresProblem& p, double eps,
                                    const InexactOptions& opts = {});

struct Rank1 {
  double sigma = 0.0;
  Vector u;
  Vector v;
};

/// Top singular triple (sigma, u, v); sigma*u*v' is the closest rank-1 matrix
/// in Frobenius norm. Sign convention: the first nonzero entry of u is
/// positive. Throws ZeroInputError on an all-zero matrix.
Rank1 best_rank1(const Matrix& m);

/// Inverse square root of S + floor*I on its range: eigenvalues below a
/// relative cutoff are treated as zero. Eigenvalues below -1e-10 throw
/// NotPsdError; small negatives are clamped to zero.
Matrix spd_inv_sqrt(const Matrix& s, double floor = 0.0);

}  // namespace tcca
