#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "tcca/directions.hpp"
#include "tcca/tensor.hpp"
#include "tcca/types.hpp"

namespace tcca {

enum class Normalization { DataMetric, UnitSphere };
enum class InnerSolve { Exact, Inexact };

struct HopmConfig {
  double ridge_x = 0.0;
  double ridge_y = 0.0;
  double inner_eps = 1e-8;          // target gap for inexact inner solves
  Normalization normalization = Normalization::DataMetric;
  InnerSolve inner = InnerSolve::Exact;
  int max_sweeps = 500;
  double tol = 1e-8;                // stop when diff falls below this
  std::uint64_t seed = 0;           // used by callers that draw random inits
  bool calibrate_inner_gap = false; // make inexact solves land at inner_eps
};

struct ConvergenceTrace {
  std::vector<double> rho;        // rho_n(U_k, V_k) after each sweep
  std::vector<double> diff;       // sum of factor movements per sweep
  std::vector<double> inner_gaps; // max certified inner gap per sweep
  std::vector<double> half_rho;   // rho after every half-update, 2m per sweep
};

struct AssumptionReport {
  double sigma_lx = 0.0, sigma_ux = 0.0;
  double sigma_ly = 0.0, sigma_uy = 0.0;
  double rho0 = 0.0;        // initial correlation, before any sign fix
  bool sign_flip_needed = false;

  bool x_covariance_ok() const { return sigma_lx > 1e-12; }
  bool y_covariance_ok() const { return sigma_ly > 1e-12; }
  bool ok() const { return x_covariance_ok() && y_covariance_ok() && rho0 != 0.0; }
};

struct HopmState {
  RankOneDirections u;
  RankOneDirections v;
  double lambda = 0.0;  // 1 - 2*lambda == rho after the latest U half-update
  double mu = 0.0;      // 1 - 2*mu == rho after the latest V half-update
  ConvergenceTrace trace;
  bool converged = false;
  int sweeps = 0;
};

/// Precomputed per-fit data shared across sweeps, plus warm starts for the
/// inexact inner solver.
struct SweepContext {
  Matrix x_stacked;  // n x prod(dims_x), row t = vec(x_t)
  Matrix y_stacked;
  std::vector<Index> dims_x;
  std::vector<Index> dims_y;
  std::vector<Vector> warm_u;
  std::vector<Vector> warm_v;

  SweepContext(const DataTensor& x, const DataTensor& y);
  Index num_samples() const { return x_stacked.rows(); }
};

/// kron(B_{m-1}, ..., B_{skip+1}, I_{skip_dim}, B_{skip-1}, ..., B_0).
/// Multiplying the stacked sample matrix by this kernel contracts every mode
/// except `skip`.
Matrix contraction_kernel(const std::vector<Matrix>& blocks, Index skip, Index skip_dim);

/// Partial contraction: row t equals the contraction of sample t with every
/// factor except factors[skip]. Multiplying by factors[skip] recovers the
/// full inner products <U, x_t>.
Matrix partial_contraction(const Matrix& stacked, const std::vector<Vector>& factors, Index skip);
Matrix partial_contraction(const DataTensor& x, const RankOneDirections& dirs, Index skip);

/// Observer invoked after each half-update with (mode, side, factor);
/// side 0 = U, side 1 = V.
using HalfStepObserver = std::function<void(Index mode, int side, const Vector& factor)>;

/// One full sweep over modes j = 0..m-1: update U_j then V_j, each from the
/// mixed contraction of already-updated and not-yet-updated factors, then
/// normalize per cfg. Appends to trace.half_rho / inner gap bookkeeping is
/// returned as the max certified gap of the sweep's inner solves.
double hopm_sweep(HopmState& state, SweepContext& ctx, const HopmConfig& cfg,
                  const HalfStepObserver& observer = nullptr);

/// Sum over both sides and all modes of the factor movement between states.
double diff_metric(const HopmState& prev, const HopmState& cur);

/// Extreme eigenvalues of the vectorized second-moment matrices plus the
/// initial correlation. Report only; never throws on a violation.
AssumptionReport check_assumptions(const DataTensor& x, const DataTensor& y,
                                   const std::pair<RankOneDirections, RankOneDirections>& init);

/// Runs sweeps until the factor movement drops below cfg.tol or max_sweeps is
/// hit (state.converged records which). Flips the sign of one V factor first
/// when the initial correlation is negative.
HopmState fit_tcca(const DataTensor& x, const DataTensor& y,
                   std::pair<RankOneDirections, RankOneDirections> init, const HopmConfig& cfg);

}  // namespace tcca
