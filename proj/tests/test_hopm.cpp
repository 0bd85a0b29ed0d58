#include <doctest.h>

#include <cmath>

#include "tcca/cca.hpp"
#include "tcca/errors.hpp"
#include "tcca/experiments.hpp"
#include "tcca/hopm.hpp"
#include "tcca/init.hpp"
#include "tcca/pm2dcca.hpp"
#include "tcca/synth.hpp"
#include "test_helpers.hpp"

using namespace tcca;
using tcca::testing::random_tensor;

namespace {

DataTensor make_samples(const std::vector<Index>& sample_dims, Index n, Rng& rng) {
  std::vector<DenseTensor> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) samples.push_back(random_tensor(sample_dims, rng));
  return DataTensor::from_samples(samples);
}

}  // namespace

TEST_CASE("partial contraction with one mode returns the sample matrix") {
  Rng rng(101);
  const DataTensor x = make_samples({5}, 7, rng);
  RankOneDirections dirs{{Vector::Ones(5)}, 1.0};
  const Matrix pc = partial_contraction(x, dirs, 0);
  CHECK((pc - x.stacked()).norm() == 0.0);
}

TEST_CASE("partial contraction with a basis vector picks matrix columns") {
  Rng rng(103);
  const DataTensor x = make_samples({4, 3}, 6, rng);
  RankOneDirections dirs{{Vector::Ones(4), Vector::Unit(3, 0)}, 1.0};
  const Matrix pc = partial_contraction(x, dirs, 0);
  REQUIRE(pc.rows() == 6);
  REQUIRE(pc.cols() == 4);
  for (Index t = 0; t < 6; ++t) {
    const Matrix sample = matricize(x.sample(t), 0);
    CHECK((pc.row(t).transpose() - sample.col(0)).norm() <= 1e-14);
  }
}

TEST_CASE("partial contraction times its factor equals the full inner product") {
  Rng rng(107);
  const DataTensor x = make_samples({3, 4, 2}, 5, rng);
  std::vector<Vector> factors = {standard_normal_vector(3, rng), standard_normal_vector(4, rng),
                                 standard_normal_vector(2, rng)};
  RankOneDirections dirs{factors, 1.0};
  const DenseTensor composite = dirs.composite();
  for (Index j = 0; j < 3; ++j) {
    const Vector scores = partial_contraction(x, dirs, j) * factors[static_cast<std::size_t>(j)];
    for (Index t = 0; t < 5; ++t)
      CHECK(scores[t] == doctest::Approx(inner_product(composite, x.sample(t))).epsilon(1e-12));
  }
}

TEST_CASE("a converged state is a fixed point of the sweep") {
  const P2dccaModel model = default_p2dcca_model(0.9, 7);
  const auto [x, y] = generate(model, 80);
  HopmConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_sweeps = 400;
  HopmState state = fit_tcca(x, y, init_random(x.sample_dims(), y.sample_dims(), 5), cfg);
  REQUIRE(state.converged);

  HopmState before = state;
  SweepContext ctx(x, y);
  hopm_sweep(state, ctx, cfg);
  CHECK(diff_metric(before, state) <= 1e-10);
}

TEST_CASE("one-mode sweep matches the 2DCCA power step") {
  Rng rng(109);
  const DataTensor x = make_samples({6}, 40, rng);
  const DataTensor y = make_samples({6}, 40, rng);

  const Vector u0 = standard_normal_vector(6, rng).normalized();
  const Vector v0 = standard_normal_vector(6, rng).normalized();

  HopmConfig cfg;  // exact inner, data-metric normalization
  HopmState state;
  state.u = {{u0}, 1.0};
  state.v = {{v0}, 1.0};
  SweepContext ctx(x, y);
  hopm_sweep(state, ctx, cfg);

  // Oracle: the power step on the same covariances. The U update matches
  // directly; the V update uses the freshly updated U.
  const double n = 40.0;
  ModeCovariances cov{x.stacked().transpose() * x.stacked() / n,
                      y.stacked().transpose() * y.stacked() / n,
                      x.stacked().transpose() * y.stacked() / n, 0.0, 0};
  const auto [u1, v_old] = power_step(cov, u0, v0);
  const auto [u_again, v1] = power_step(cov, u1, v0);
  (void)v_old;
  (void)u_again;

  CHECK((state.u.factors[0] - u1).norm() <= 1e-10);
  CHECK((state.v.factors[0] - v1).norm() <= 1e-10);
}

TEST_CASE("data-metric and unit-sphere sweeps share correlations and rays") {
  const P2dccaModel model = default_p2dcca_model(0.9, 21);
  const auto [x, y] = generate(model, 100);
  const auto init = init_random(x.sample_dims(), y.sample_dims(), 3);

  HopmConfig metric_cfg;
  metric_cfg.normalization = Normalization::DataMetric;
  HopmConfig sphere_cfg;
  sphere_cfg.normalization = Normalization::UnitSphere;
  const int sweeps = 25;
  const Trajectory tm = run_sweeps(x, y, init, metric_cfg, sweeps);
  const Trajectory ts = run_sweeps(x, y, init, sphere_cfg, sweeps);

  REQUIRE(tm.trace.half_rho.size() == ts.trace.half_rho.size());
  for (std::size_t i = 0; i < tm.trace.half_rho.size(); ++i)
    CHECK(std::abs(tm.trace.half_rho[i] - ts.trace.half_rho[i]) <= 1e-8);

  // Factors are positively proportional at every half-update.
  REQUIRE(tm.factors.size() == ts.factors.size());
  for (std::size_t i = 0; i < tm.factors.size(); ++i) {
    const Vector a = tm.factors[i] / tm.factors[i].norm();
    const Vector b = ts.factors[i];
    CHECK((a - b).norm() <= 1e-8);
  }
}

TEST_CASE("exact sweeps never decrease the correlation") {
  const P2dccaModel model = default_p2dcca_model(0.5, 33);
  const auto [x, y] = generate(model, 60);
  HopmConfig cfg;
  cfg.max_sweeps = 200;
  cfg.tol = 1e-10;
  const HopmState state =
      fit_tcca(x, y, init_random(x.sample_dims(), y.sample_dims(), 11), cfg);
  const auto& half = state.trace.half_rho;
  REQUIRE(half.size() >= 4);
  for (std::size_t i = 1; i < half.size(); ++i) CHECK(half[i] >= half[i - 1] - 1e-10);
}

TEST_CASE("multiplier bookkeeping matches independent correlations") {
  const P2dccaModel model = default_p2dcca_model(0.8, 55);
  const auto [x, y] = generate(model, 50);
  auto init = init_random(x.sample_dims(), y.sample_dims(), 2);

  // One sweep; reconstruct the mixed-state composite the lambda refers to.
  HopmConfig cfg;
  const Trajectory traj = run_sweeps(x, y, init, cfg, 1);
  const HopmState& state = traj.final_state;

  const double rho_mu = 1.0 - 2.0 * state.mu;
  CHECK(std::abs(rho_mu - sample_correlation(state.u, state.v, x, y)) <= 1e-10);

  // lambda was recorded when V still had its previous last-mode factor. The
  // sign fix applied at entry flips v factor 0 when the initial correlation
  // is negative.
  RankOneDirections v_mixed = state.v;
  Vector v_last = init.second.factors.back();
  const double rho0 = sample_correlation(init.first, init.second, x, y);
  if (rho0 < 0.0 && v_mixed.factors.size() == 1) v_last = -v_last;
  v_mixed.factors.back() = v_last;
  const double rho_lambda = 1.0 - 2.0 * state.lambda;
  CHECK(std::abs(rho_lambda - sample_correlation(state.u, v_mixed, x, y)) <= 1e-10);
}

TEST_CASE("converged states barely move when swept once more") {
  const P2dccaModel model = default_p2dcca_model(0.9, 77);
  const auto [x, y] = generate(model, 120);
  HopmConfig cfg;
  cfg.tol = 1e-9;
  HopmState state = fit_tcca(x, y, init_random(x.sample_dims(), y.sample_dims(), 8), cfg);
  REQUIRE(state.converged);
  HopmState before = state;
  SweepContext ctx(x, y);
  hopm_sweep(state, ctx, cfg);
  CHECK(diff_metric(before, state) <= 10.0 * cfg.tol);
}

TEST_CASE("diff metric on hand-built states") {
  HopmState a;
  a.u = {{Vector::Ones(3), Vector::Ones(2)}, 1.0};
  a.v = {{Vector::Ones(4)}, 1.0};
  HopmState b = a;
  CHECK(diff_metric(a, b) == 0.0);
  b.u.factors[1][0] += 0.25;
  CHECK(diff_metric(a, b) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("fit trace lengths equal the number of completed sweeps") {
  const P2dccaModel model = default_p2dcca_model(0.9, 88);
  const auto [x, y] = generate(model, 70);
  HopmConfig cfg;
  cfg.tol = 1e-8;
  const HopmState state =
      fit_tcca(x, y, init_random(x.sample_dims(), y.sample_dims(), 4), cfg);
  CHECK(state.trace.rho.size() == static_cast<std::size_t>(state.sweeps));
  CHECK(state.trace.diff.size() == static_cast<std::size_t>(state.sweeps));
  CHECK(state.trace.inner_gaps.size() == static_cast<std::size_t>(state.sweeps));
  CHECK(state.trace.diff.back() < cfg.tol);
  // The movement keeps shrinking over the tail of a converged run.
  const auto& d = state.trace.diff;
  REQUIRE(d.size() >= 3);
  CHECK(d.back() < d[d.size() - 3]);
}

TEST_CASE("inexact fits record their certified inner gaps") {
  const P2dccaModel model = default_p2dcca_model(0.9, 99);
  const auto [x, y] = generate(model, 60);
  HopmConfig cfg;
  cfg.inner = InnerSolve::Inexact;
  cfg.inner_eps = 1e-6;
  cfg.ridge_x = cfg.ridge_y = 1e-3;
  cfg.max_sweeps = 50;
  cfg.tol = 1e-7;
  const HopmState state =
      fit_tcca(x, y, init_random(x.sample_dims(), y.sample_dims(), 6), cfg);
  for (double gap : state.trace.inner_gaps) CHECK(gap <= 1e-6);
}

TEST_CASE("assumption report flags rank deficiency and negative starts") {
  Rng rng(113);
  const DataTensor small = make_samples({3, 4}, 5, rng);  // n < 12 = vec dim
  const auto init = init_random({3, 4}, {3, 4}, 1);
  const AssumptionReport r = check_assumptions(small, small, init);
  CHECK(r.sigma_lx <= 1e-12);
  CHECK_FALSE(r.x_covariance_ok());
  CHECK(r.sigma_ux > 0.0);
  CHECK(r.sigma_lx <= r.sigma_ux);

  // Whitened data: second moments near the identity.
  const DataTensor iso = make_samples({4}, 20000, rng);
  const AssumptionReport ri = check_assumptions(iso, iso, init_random({4}, {4}, 2));
  CHECK(ri.sigma_lx == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ri.sigma_ux == doctest::Approx(1.0).epsilon(0.1));

  // A negative initial correlation is reported and fixed by the fit.
  const DataTensor x2 = make_samples({3}, 30, rng);
  auto flip_init = init_random({3}, {3}, 9);
  const double rho0 = sample_correlation(flip_init.first, flip_init.second, x2, x2);
  if (rho0 > 0.0) flip_init.second.factors[0] = -flip_init.second.factors[0];
  const AssumptionReport rf = check_assumptions(x2, x2, flip_init);
  CHECK(rf.rho0 < 0.0);
  CHECK(rf.sign_flip_needed);
  HopmConfig cfg;
  const HopmState fixed = fit_tcca(x2, x2, flip_init, cfg);
  CHECK(fixed.trace.rho.back() > 0.0);
}

TEST_CASE("degenerate data is rejected") {
  Rng rng(127);
  const DataTensor x = make_samples({3}, 10, rng);
  const DataTensor zero(DenseTensor({10, 3}));
  HopmConfig cfg;
  CHECK_THROWS_AS(fit_tcca(x, zero, init_random({3}, {3}, 1), cfg),
                  DegenerateProjectionError);
}
