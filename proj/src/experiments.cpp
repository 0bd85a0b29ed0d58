#include "tcca/experiments.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "tcca/cca.hpp"
#include "tcca/init.hpp"
#include "tcca/tensor_io.hpp"

namespace tcca {

namespace {

// Runs fn(i) for i in [0, count) on `threads` workers; each index is
// independent and seeded by the caller, so the schedule cannot change results.
void parallel_for(Index count, int threads, const std::function<void(Index)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace

Trajectory run_sweeps(const DataTensor& x, const DataTensor& y,
                      std::pair<RankOneDirections, RankOneDirections> init,
                      const HopmConfig& cfg, int sweeps) {
  SweepContext ctx(x, y);
  const double rho0 = sample_correlation(init.first.composite_vec(), init.second.composite_vec(),
                                         ctx.x_stacked, ctx.y_stacked);
  if (rho0 < 0.0) init.second.factors[0] = -init.second.factors[0];

  Trajectory out;
  out.final_state.u = std::move(init.first);
  out.final_state.v = std::move(init.second);
  HopmState& state = out.final_state;
  const auto observer = [&out](Index, int, const Vector& f) { out.factors.push_back(f); };
  HopmState prev = state;
  for (int k = 0; k < sweeps; ++k) {
    prev.u = state.u;
    prev.v = state.v;
    const double gap = hopm_sweep(state, ctx, cfg, observer);
    out.trace.rho.push_back(1.0 - 2.0 * state.mu);
    out.trace.diff.push_back(diff_metric(prev, state));
    out.trace.inner_gaps.push_back(gap);
  }
  out.trace.half_rho = state.trace.half_rho;
  state.sweeps = sweeps;
  return out;
}

std::vector<Figure2Row> run_figure2(const Figure2Config& cfg) {
  const P2dccaModel model = default_p2dcca_model(cfg.lambda, sub_seed(cfg.seed, 0));
  const auto [x, y] = generate(model, cfg.n);
  std::vector<Figure2Row> rows;
  rows.reserve(static_cast<std::size_t>(cfg.inits) * 2 * static_cast<std::size_t>(cfg.sweeps));
  for (int i = 0; i < cfg.inits; ++i) {
    const auto init =
        init_random(x.sample_dims(), y.sample_dims(), sub_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i)));
    for (const auto normalization : {Normalization::DataMetric, Normalization::UnitSphere}) {
      HopmConfig fit_cfg;
      fit_cfg.normalization = normalization;
      const Trajectory traj = run_sweeps(x, y, init, fit_cfg, cfg.sweeps);
      const std::string variant = normalization == Normalization::DataMetric ? "metric" : "sphere";
      for (int k = 0; k < cfg.sweeps; ++k)
        rows.push_back({variant, i, k + 1, traj.trace.rho[static_cast<std::size_t>(k)],
                        traj.trace.diff[static_cast<std::size_t>(k)]});
    }
  }
  return rows;
}

void write_figure2_csv(const std::filesystem::path& path, const std::vector<Figure2Row>& rows) {
  std::string text = "variant,init,sweep,rho,diff\n";
  for (const auto& r : rows)
    text += csv_join({r.variant, std::to_string(r.init), std::to_string(r.sweep),
                      format_double(r.rho), format_double(r.diff)});
  atomic_write_text(path, text);
}

std::vector<Figure3Cell> run_figure3(const Figure3Config& cfg) {
  struct TrialResult {
    bool success_random = false, success_effective = false;
    double err_random = 0.0, err_effective = 0.0;
  };
  const Index n_cells = static_cast<Index>(cfg.ns.size() * cfg.lambdas.size());
  const Index n_units = n_cells * cfg.trials;
  std::vector<TrialResult> results(static_cast<std::size_t>(n_units));

  parallel_for(n_units, cfg.threads, [&](Index unit) {
    const Index cell = unit / cfg.trials;
    const Index trial = unit % cfg.trials;
    const Index ni = cell / static_cast<Index>(cfg.lambdas.size());
    const Index li = cell % static_cast<Index>(cfg.lambdas.size());
    const Index n = cfg.ns[static_cast<std::size_t>(ni)];
    const double lambda = cfg.lambdas[static_cast<std::size_t>(li)];
    const std::uint64_t unit_seed = sub_seed(cfg.seed, static_cast<std::uint64_t>(unit));

    const P2dccaModel model = default_p2dcca_model(lambda, sub_seed(unit_seed, 1));
    const auto [x, y] = generate(model, n);
    const PopulationOptimum opt = population_optimum(model);

    HopmConfig fit_cfg;
    fit_cfg.normalization = Normalization::UnitSphere;
    fit_cfg.max_sweeps = cfg.max_sweeps;
    fit_cfg.tol = cfg.tol;

    double rho_max = -1.0;
    HopmState first_random;
    for (int rep = 0; rep < cfg.restarts; ++rep) {
      const auto init = init_random(x.sample_dims(), y.sample_dims(),
                                    sub_seed(unit_seed, 100 + static_cast<std::uint64_t>(rep)));
      HopmState state = fit_tcca(x, y, init, fit_cfg);
      if (state.trace.rho.back() > rho_max) rho_max = state.trace.rho.back();
      if (rep == 0) first_random = std::move(state);
    }
    const HopmState eff = fit_tcca(x, y, init_effective(x, y), fit_cfg);

    TrialResult& r = results[static_cast<std::size_t>(unit)];
    r.success_random = std::abs(first_random.trace.rho.back() - rho_max) <= cfg.success_eps;
    r.success_effective = std::abs(eff.trace.rho.back() - rho_max) <= cfg.success_eps;
    r.err_random = error_metric(opt, first_random);
    r.err_effective = error_metric(opt, eff);
  });

  std::vector<Figure3Cell> cells;
  for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
      Figure3Cell c;
      c.n = cfg.ns[ni];
      c.lambda = cfg.lambdas[li];
      c.trials = cfg.trials;
      const Index cell = static_cast<Index>(ni * cfg.lambdas.size() + li);
      for (Index t = 0; t < cfg.trials; ++t) {
        const auto& r = results[static_cast<std::size_t>(cell * cfg.trials + t)];
        c.success_random += r.success_random ? 1.0 : 0.0;
        c.success_effective += r.success_effective ? 1.0 : 0.0;
        c.mean_error_random += r.err_random;
        c.mean_error_effective += r.err_effective;
      }
      c.success_random /= cfg.trials;
      c.success_effective /= cfg.trials;
      c.mean_error_random /= cfg.trials;
      c.mean_error_effective /= cfg.trials;
      cells.push_back(c);
    }
  }
  return cells;
}

void write_figure3_csv(const std::filesystem::path& path, const std::vector<Figure3Cell>& cells) {
  std::string text =
      "n,lambda,trials,success_random,success_effective,mean_error_random,mean_error_effective\n";
  for (const auto& c : cells)
    text += csv_join({std::to_string(c.n), format_double(c.lambda), std::to_string(c.trials),
                      format_double(c.success_random), format_double(c.success_effective),
                      format_double(c.mean_error_random), format_double(c.mean_error_effective)});
  atomic_write_text(path, text);
}

std::vector<InexactScalingRow> run_inexact_scaling(const InexactScalingConfig& cfg) {
  const P2dccaModel model = default_p2dcca_model(cfg.lambda, sub_seed(cfg.seed, 0));
  const auto [x, y] = generate(model, cfg.n);
  const auto init = init_random(x.sample_dims(), y.sample_dims(), sub_seed(cfg.seed, 1));

  HopmConfig base;
  base.normalization = Normalization::UnitSphere;
  base.ridge_x = base.ridge_y = cfg.ridge;

  HopmConfig exact_cfg = base;
  exact_cfg.inner = InnerSolve::Exact;
  const Trajectory exact = run_sweeps(x, y, init, exact_cfg, cfg.sweeps);

  std::vector<InexactScalingRow> rows;
  for (double eps : cfg.eps) {
    HopmConfig inexact_cfg = base;
    inexact_cfg.inner = InnerSolve::Inexact;
    inexact_cfg.inner_eps = eps;
    inexact_cfg.calibrate_inner_gap = cfg.calibrate_gap;
    const Trajectory run = run_sweeps(x, y, init, inexact_cfg, cfg.sweeps);
    double dev = 0.0;
    for (std::size_t i = 0; i < exact.factors.size(); ++i)
      dev = std::max(dev, (run.factors[i] - exact.factors[i]).norm());
    rows.push_back({eps, dev});
  }
  return rows;
}

void write_inexact_scaling_csv(const std::filesystem::path& path,
                               const std::vector<InexactScalingRow>& rows) {
  std::string text = "eps,max_deviation\n";
  for (const auto& r : rows)
    text += csv_join({format_double(r.eps), format_double(r.max_deviation)});
  atomic_write_text(path, text);
}

double log_log_slope(const std::vector<InexactScalingRow>& rows) {
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double lx = std::log(r.eps);
    const double ly = std::log(r.max_deviation);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tcca
