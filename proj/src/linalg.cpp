#include "tcca/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "tcca/errors.hpp"

namespace tcca {

double LeastSquaresProblem::objective(const Vector& u) const {
  const double n_inv = 1.0 / static_cast<double>(n());
  return 0.5 * n_inv * (design * u - target).squaredNorm() + 0.5 * ridge * u.squaredNorm();
}

Vector LeastSquaresProblem::gradient(const Vector& u) const {
  const double n_inv = 1.0 / static_cast<double>(n());
  return n_inv * (design.transpose() * (design * u - target)) + ridge * u;
}

namespace {

Matrix normal_matrix(const LeastSquaresProblem& p) {
  const double n_inv = 1.0 / static_cast<double>(p.n());
  Matrix h = n_inv * (p.design.transpose() * p.design);
  if (p.ridge != 0.0) h.diagonal().array() += p.ridge;
  return h;
}

}  // namespace

Vector ridge_solve_exact(const LeastSquaresProblem& p) {
  const Matrix h = normal_matrix(p);
  const Vector g = p.design.transpose() * p.target / static_cast<double>(p.n());
  Eigen::LDLT<Matrix> ldlt(h);
  if (ldlt.info() != Eigen::Success)
    throw RankDeficientError("ridge_solve_exact: factorization failed");
  if (p.ridge == 0.0) {
    const Vector d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (dmax <= 0.0 || d.minCoeff() < 1e-12 * dmax)
      throw RankDeficientError("ridge_solve_exact: A'A is rank deficient and ridge is 0");
  }
  return ldlt.solve(g);
}

Vector ridge_solve_auto(const LeastSquaresProblem& p) {
  try {
    return ridge_solve_exact(p);
  } catch (const RankDeficientError&) {
    // Minimum-norm solution: eigenvalues below the relative cutoff are
    // treated as exact zeros, so no null-space noise survives the solve.
    const Matrix h = normal_matrix(p);
    const Vector g = p.design.transpose() * p.target / static_cast<double>(p.n());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success) throw;
    const Vector& lam = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
    if (cutoff <= 0.0) throw;
    Vector inv(lam.size());
    for (Index i = 0; i < lam.size(); ++i) inv[i] = lam[i] > cutoff ? 1.0 / lam[i] : 0.0;
    return eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * g));
  }
}

InexactSolution ridge_solve_inexact(const LeastSquaresProblem& p, double eps,
                                    const InexactOptions& opts) {
  if (eps <= 0.0) throw InputError("ridge_solve_inexact: eps must be > 0");
  const Matrix h = normal_matrix(p);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success)
    throw RankDeficientError("ridge_solve_inexact: eigendecomposition failed");
  const double sigma_max = eig.eigenvalues().maxCoeff();
  // Gradient descent never leaves the span of the gradient directions, so the
  // certificate may use the smallest curvature above the numerical rank
  // cutoff rather than the global minimum eigenvalue.
  double sigma_min = sigma_max;
  const double rank_cutoff = 1e-12 * std::max(sigma_max, 0.0);
  for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lam = eig.eigenvalues()[i];
    if (lam > rank_cutoff) sigma_min = std::min(sigma_min, lam);
  }
  if (sigma_max <= 0.0)
    throw RankDeficientError("ridge_solve_inexact: objective has no curvature");
  const double step = 2.0 / (sigma_min + sigma_max);
  const Vector g = p.design.transpose() * p.target / static_cast<double>(p.n());

  const auto cert = [&](const Vector& grad) { return grad.squaredNorm() / (2.0 * sigma_min); };

  Vector u = opts.warm_start ? *opts.warm_start : Vector::Zero(p.d());
  if (opts.warm_start && u.size() != p.d())
    throw InputError("ridge_solve_inexact: warm start has wrong size");
  Vector grad = h * u - g;
  double gap = cert(grad);
  if (gap <= eps) {
    // A zero cold start can certify on weak targets; step once so callers
    // never get an exactly-zero iterate. The certificate at the start still
    // bounds the gap because the descent step only lowers f.
    if (u.isZero() && grad.norm() > 0.0) return {(-step * grad).eval(), gap, 1};
    return {u, gap, 0};
  }

  Vector prev = u;
  double prev_gap = gap;
  for (Index it = 1; it <= opts.max_iterations; ++it) {
    prev = u;
    prev_gap = gap;
    u -= step * grad;
    grad = h * u - g;
    gap = cert(grad);
    if (gap <= eps) {
      if (opts.calibrate_gap && prev_gap > eps) {
        // Bisect along the segment [u, prev] for a certificate just under eps.
        Vector lo = u, hi = prev;
        for (int b = 0; b < 60; ++b) {
          const Vector mid = 0.5 * (lo + hi);
          const double mid_gap = cert(h * mid - g);
          if (mid_gap <= eps)
            lo = mid;
          else
            hi = mid;
        }
        u = lo;
        gap = cert(h * u - g);
      }
      return {u, gap, it};
    }
  }
  throw BudgetError("ridge_solve_inexact: budget exhausted", u, gap);
}

Rank1 best_rank1(const Matrix& m) {
  if ((m.array() == 0.0).all()) throw ZeroInputError("best_rank1: zero matrix");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Rank1 out{svd.singularValues()[0], svd.matrixU().col(0), svd.matrixV().col(0)};
  for (Index i = 0; i < out.u.size(); ++i) {
    if (out.u[i] != 0.0) {
      if (out.u[i] < 0.0) {
        out.u = -out.u;
        out.v = -out.v;
      }
      break;
    }
  }
  return out;
}

Matrix spd_inv_sqrt(const Matrix& s, double floor) {
  if (s.rows() != s.cols()) throw InputError("spd_inv_sqrt: matrix must be square");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NotPsdError("spd_inv_sqrt: eigendecomposition failed");
  Vector lam = eig.eigenvalues();
  if (lam.minCoeff() < -1e-10)
    throw NotPsdError("spd_inv_sqrt: eigenvalue " + std::to_string(lam.minCoeff()) +
                      " below -1e-10");
  lam.array() += floor;
  const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  Vector inv_sqrt(lam.size());
  for (Index i = 0; i < lam.size(); ++i)
    inv_sqrt[i] = lam[i] > cutoff ? 1.0 / std::sqrt(lam[i]) : 0.0;
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace tcca
