#include "tcca/hopm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "tcca/cca.hpp"
#include "tcca/errors.hpp"
#include "tcca/linalg.hpp"

namespace tcca {

namespace {

constexpr double kDegenerateNorm = 1e-14;

void check_factor_dims(const std::vector<Index>& data_dims, const RankOneDirections& dirs,
                       const char* side) {
  if (dirs.dims() != data_dims)
    throw InputError(std::string("factor dims do not match ") + side + " data dims");
}

double correlation_from_projections(const Vector& a, const Vector& b) {
  const double sa = a.squaredNorm();
  const double sb = b.squaredNorm();
  if (sa == 0.0 || sb == 0.0)
    throw DegenerateProjectionError("zero-variance projection inside sweep");
  return a.dot(b) / std::sqrt(sa * sb);
}

// Solves one inner least squares problem per cfg and returns the raw
// (unnormalized) solution; gap_out collects the certified gap (0 for exact).
Vector inner_solve(const Matrix& design, const Vector& target, double ridge,
                   const HopmConfig& cfg, Vector& warm, double& gap_out) {
  LeastSquaresProblem p{design, target, ridge};
  if (cfg.inner == InnerSolve::Exact) {
    gap_out = 0.0;
    return ridge_solve_auto(p);
  }
  InexactOptions opts;
  if (warm.size() == design.cols()) opts.warm_start = warm;
  opts.calibrate_gap = cfg.calibrate_inner_gap;
  const InexactSolution sol = ridge_solve_inexact(p, cfg.inner_eps, opts);
  gap_out = sol.gap_bound;
  warm = sol.u;
  return sol.u;
}

Vector normalize_factor(const Vector& raw, const Matrix& contracted, Index n,
                        Normalization mode, double& scale_out) {
  const double norm = raw.norm();
  if (norm < kDegenerateNorm)
    throw DegenerateProjectionError("pre-normalization factor collapsed below 1e-14");
  Vector out;
  if (mode == Normalization::DataMetric) {
    const double q = (contracted * raw).squaredNorm() / static_cast<double>(n);
    if (q < kDegenerateNorm * kDegenerateNorm)
      throw DegenerateProjectionError("data-metric norm collapsed");
    out = raw / std::sqrt(q);
    scale_out = 1.0;
  } else {
    out = raw / norm;
    const double q = (contracted * out).squaredNorm() / static_cast<double>(n);
    if (q < kDegenerateNorm * kDegenerateNorm)
      throw DegenerateProjectionError("data-metric norm collapsed");
    scale_out = 1.0 / std::sqrt(q);
  }
  return out;
}

}  // namespace

SweepContext::SweepContext(const DataTensor& x, const DataTensor& y)
    : x_stacked(x.stacked()),
      y_stacked(y.stacked()),
      dims_x(x.sample_dims()),
      dims_y(y.sample_dims()),
      warm_u(dims_x.size()),
      warm_v(dims_y.size()) {
  if (x.num_samples() != y.num_samples()) throw InputError("x and y sample counts differ");
}

Matrix contraction_kernel(const std::vector<Matrix>& blocks, Index skip, Index skip_dim) {
  if (skip < 0 || skip >= static_cast<Index>(blocks.size()))
    throw InputError("contraction_kernel: skip mode out of range");
  Matrix k = Matrix::Ones(1, 1);
  for (Index j = static_cast<Index>(blocks.size()) - 1; j >= 0; --j) {
    if (j == skip)
      k = kronecker(k, Matrix::Identity(skip_dim, skip_dim));
    else
      k = kronecker(k, blocks[static_cast<std::size_t>(j)]);
  }
  return k;
}

Matrix partial_contraction(const Matrix& stacked, const std::vector<Vector>& factors,
                           Index skip) {
  if (skip < 0 || skip >= static_cast<Index>(factors.size()))
    throw InputError("partial_contraction: skip mode out of range");
  std::vector<Matrix> blocks;
  blocks.reserve(factors.size());
  for (const auto& f : factors) blocks.push_back(f);
  const Index skip_dim = factors[static_cast<std::size_t>(skip)].size();
  return stacked * contraction_kernel(blocks, skip, skip_dim);
}

Matrix partial_contraction(const DataTensor& x, const RankOneDirections& dirs, Index skip) {
  check_factor_dims(x.sample_dims(), dirs, "x");
  return partial_contraction(x.stacked(), dirs.factors, skip);
}

double hopm_sweep(HopmState& state, SweepContext& ctx, const HopmConfig& cfg,
                  const HalfStepObserver& observer) {
  const Index m = state.u.order();
  const Index n = ctx.num_samples();
  double max_gap = 0.0;
  for (Index j = 0; j < m; ++j) {
    const Matrix xc = partial_contraction(ctx.x_stacked, state.u.factors, j);
    const Matrix yc = partial_contraction(ctx.y_stacked, state.v.factors, j);

    // U_j from the previous V_j.
    const Vector target_u = yc * state.v.factors[static_cast<std::size_t>(j)];
    double gap = 0.0;
    const Vector raw_u =
        inner_solve(xc, target_u, cfg.ridge_x, cfg, ctx.warm_u[static_cast<std::size_t>(j)], gap);
    max_gap = std::max(max_gap, gap);
    double scale_u = 1.0;
    const Vector u_new = normalize_factor(raw_u, xc, n, cfg.normalization, scale_u);
    state.u.factors[static_cast<std::size_t>(j)] = u_new;
    state.u.scale = scale_u;
    const double rho_lambda = correlation_from_projections(xc * u_new, target_u);
    state.lambda = 0.5 * (1.0 - rho_lambda);
    state.trace.half_rho.push_back(rho_lambda);
    if (observer) observer(j, 0, u_new);

    // V_j from the freshly updated U_j.
    const Vector target_v = xc * u_new;
    const Vector raw_v =
        inner_solve(yc, target_v, cfg.ridge_y, cfg, ctx.warm_v[static_cast<std::size_t>(j)], gap);
    max_gap = std::max(max_gap, gap);
    double scale_v = 1.0;
    const Vector v_new = normalize_factor(raw_v, yc, n, cfg.normalization, scale_v);
    state.v.factors[static_cast<std::size_t>(j)] = v_new;
    state.v.scale = scale_v;
    const double rho_mu = correlation_from_projections(yc * v_new, target_v);
    state.mu = 0.5 * (1.0 - rho_mu);
    state.trace.half_rho.push_back(rho_mu);
    if (observer) observer(j, 1, v_new);
  }
  return max_gap;
}

double diff_metric(const HopmState& prev, const HopmState& cur) {
  if (prev.u.order() != cur.u.order() || prev.v.order() != cur.v.order())
    throw InputError("diff_metric: factor counts differ");
  double d = 0.0;
  for (std::size_t j = 0; j < cur.u.factors.size(); ++j)
    d += (cur.u.factors[j] - prev.u.factors[j]).norm();
  for (std::size_t j = 0; j < cur.v.factors.size(); ++j)
    d += (cur.v.factors[j] - prev.v.factors[j]).norm();
  return d;
}

AssumptionReport check_assumptions(const DataTensor& x, const DataTensor& y,
                                   const std::pair<RankOneDirections, RankOneDirections>& init) {
  const Matrix xs = x.stacked();
  const Matrix ys = y.stacked();
  const double n_inv = 1.0 / static_cast<double>(xs.rows());

  AssumptionReport report;
  Eigen::SelfAdjointEigenSolver<Matrix> ex(n_inv * (xs.transpose() * xs));
  report.sigma_lx = ex.eigenvalues().minCoeff();
  report.sigma_ux = ex.eigenvalues().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> ey(n_inv * (ys.transpose() * ys));
  report.sigma_ly = ey.eigenvalues().minCoeff();
  report.sigma_uy = ey.eigenvalues().maxCoeff();

  report.rho0 =
      sample_correlation(init.first.composite_vec(), init.second.composite_vec(), xs, ys);
  report.sign_flip_needed = report.rho0 < 0.0;
  return report;
}

HopmState fit_tcca(const DataTensor& x, const DataTensor& y,
                   std::pair<RankOneDirections, RankOneDirections> init, const HopmConfig& cfg) {
  check_factor_dims(x.sample_dims(), init.first, "x");
  check_factor_dims(y.sample_dims(), init.second, "y");
  if (cfg.tol <= 0.0 || cfg.max_sweeps < 1) throw InputError("invalid stopping configuration");

  SweepContext ctx(x, y);
  const double rho0 = sample_correlation(init.first.composite_vec(), init.second.composite_vec(),
                                         ctx.x_stacked, ctx.y_stacked);
  if (rho0 < 0.0) init.second.factors[0] = -init.second.factors[0];

  HopmState state;
  state.u = std::move(init.first);
  state.v = std::move(init.second);

  HopmState prev = state;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    prev.u = state.u;
    prev.v = state.v;
    const double gap = hopm_sweep(state, ctx, cfg);
    const double d = diff_metric(prev, state);
    state.sweeps = sweep;
    state.trace.rho.push_back(1.0 - 2.0 * state.mu);
    state.trace.diff.push_back(d);
    state.trace.inner_gaps.push_back(gap);
    if (d < cfg.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace tcca
