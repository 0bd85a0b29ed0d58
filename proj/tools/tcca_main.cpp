// Command-line front end: data simulation, single fits, deflation, and the
// benchmark experiment protocols. All outputs are written atomically and are
// byte-identical across reruns with the same seed.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tcca/cca.hpp"
#include "tcca/errors.hpp"
#include "tcca/experiments.hpp"
#include "tcca/hopm.hpp"
#include "tcca/init.hpp"
#include "tcca/multiway.hpp"
#include "tcca/synth.hpp"
#include "tcca/tensor_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitBudget = 4;

struct FitFlags {
  std::string normalization = "metric";
  std::string inner = "exact";
  std::string init = "random";
  double eps = 1e-8;
  double ridge_x = 0.0;
  double ridge_y = 0.0;
  double tol = 1e-8;
  int max_sweeps = 500;
  std::uint64_t seed = 1;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--normalization", f.normalization, "metric|sphere")
      ->check(CLI::IsMember({"metric", "sphere"}));
  cmd->add_option("--inner", f.inner, "exact|inexact")->check(CLI::IsMember({"exact", "inexact"}));
  cmd->add_option("--init", f.init, "random|effective")
      ->check(CLI::IsMember({"random", "effective"}));
  cmd->add_option("--eps", f.eps, "target gap for inexact inner solves");
  cmd->add_option("--ridge-x", f.ridge_x);
  cmd->add_option("--ridge-y", f.ridge_y);
  cmd->add_option("--tol", f.tol, "stop when diff falls below this");
  cmd->add_option("--max-sweeps", f.max_sweeps);
  cmd->add_option("--seed", f.seed);
}

tcca::HopmConfig to_config(const FitFlags& f) {
  tcca::HopmConfig cfg;
  cfg.normalization = f.normalization == "metric" ? tcca::Normalization::DataMetric
                                                  : tcca::Normalization::UnitSphere;
  cfg.inner = f.inner == "exact" ? tcca::InnerSolve::Exact : tcca::InnerSolve::Inexact;
  cfg.inner_eps = f.eps;
  cfg.ridge_x = f.ridge_x;
  cfg.ridge_y = f.ridge_y;
  cfg.tol = f.tol;
  cfg.max_sweeps = f.max_sweeps;
  cfg.seed = f.seed;
  return cfg;
}

std::vector<double> to_std(const tcca::Vector& v) {
  return {v.data(), v.data() + v.size()};
}

tcca::P2dccaModel model_from_config(const tcca::KeyValueFile& kv, std::uint64_t seed) {
  const long long k = kv.get_int("k");
  if (k != 2) throw tcca::InputError("simulate: only k=2 models are supported");
  const auto dims = kv.get_list("dims");
  if (dims.size() != 4) throw tcca::InputError("simulate: dims must be mx,nx,my,ny");
  const double lambda = kv.get_double("lambda");
  tcca::P2dccaModel model;
  if (kv.has("theta2"))
    model = tcca::two_signal_p2dcca_model(lambda, kv.get_double("theta2"), seed);
  else
    model = tcca::default_p2dcca_model(lambda, seed);
  model.x_left = tcca::random_orthonormal(static_cast<tcca::Index>(dims[0]), 2,
                                          tcca::sub_seed(seed, 1));
  model.x_right = tcca::random_orthonormal(static_cast<tcca::Index>(dims[1]), 2,
                                           tcca::sub_seed(seed, 2));
  model.y_left = tcca::random_orthonormal(static_cast<tcca::Index>(dims[2]), 2,
                                          tcca::sub_seed(seed, 3));
  model.y_right = tcca::random_orthonormal(static_cast<tcca::Index>(dims[3]), 2,
                                           tcca::sub_seed(seed, 4));
  model.validate();
  return model;
}

int cmd_simulate(const std::string& config_path, const std::string& out_prefix,
                 std::uint64_t seed_override, bool has_seed_override) {
  const auto kv = tcca::KeyValueFile::parse(config_path);
  const std::uint64_t seed =
      has_seed_override ? seed_override : static_cast<std::uint64_t>(kv.get_int("seed"));
  const auto n = static_cast<tcca::Index>(kv.get_int("n"));
  const tcca::P2dccaModel model = model_from_config(kv, seed);

  const auto [x, y] = tcca::generate(model, n);
  tcca::write_tensor(out_prefix + "_x.tcca", x.body());
  tcca::write_tensor(out_prefix + "_y.tcca", y.body());

  const tcca::PopulationOptimum opt = tcca::population_optimum(model);
  tcca::KeyValueFile truth;
  truth.set_int("k", kv.get_int("k"));
  truth.set("dims", kv.get("dims"));
  truth.set_double("lambda", kv.get_double("lambda"));
  truth.set_int("seed", static_cast<long long>(seed));
  truth.set_int("n", n);
  truth.set_double("rho_star", opt.rho);
  truth.set_list("u1", to_std(opt.u1));
  truth.set_list("u2", to_std(opt.u2));
  truth.set_list("v1", to_std(opt.v1));
  truth.set_list("v2", to_std(opt.v2));
  truth.write(out_prefix + "_truth.kv");
  std::printf("wrote %s_x.tcca, %s_y.tcca, %s_truth.kv (rho_star=%s)\n", out_prefix.c_str(),
              out_prefix.c_str(), out_prefix.c_str(), tcca::format_double(opt.rho).c_str());
  return kExitOk;
}

void write_trace_csv(const std::string& path, const tcca::ConvergenceTrace& trace) {
  std::string text = "sweep,rho,diff,inner_gap\n";
  for (std::size_t k = 0; k < trace.rho.size(); ++k)
    text += std::to_string(k + 1) + "," + tcca::format_double(trace.rho[k]) + "," +
            tcca::format_double(trace.diff[k]) + "," + tcca::format_double(trace.inner_gaps[k]) +
            "\n";
  tcca::atomic_write_text(path, text);
}

void write_state_kv(const std::string& path, const tcca::HopmState& state,
                    const tcca::AssumptionReport& report) {
  tcca::KeyValueFile out;
  out.set_double("rho", state.trace.rho.back());
  out.set_double("lambda", state.lambda);
  out.set_double("mu", state.mu);
  out.set_int("sweeps", state.sweeps);
  out.set("converged", state.converged ? "true" : "false");
  out.set_double("diff_final", state.trace.diff.back());
  for (std::size_t j = 0; j < state.u.factors.size(); ++j)
    out.set_list("u" + std::to_string(j + 1), to_std(state.u.factors[j]));
  for (std::size_t j = 0; j < state.v.factors.size(); ++j)
    out.set_list("v" + std::to_string(j + 1), to_std(state.v.factors[j]));
  out.set_double("sigma_lx", report.sigma_lx);
  out.set_double("sigma_ux", report.sigma_ux);
  out.set_double("sigma_ly", report.sigma_ly);
  out.set_double("sigma_uy", report.sigma_uy);
  out.set_double("rho0", report.rho0);
  out.set("sign_flip", report.sign_flip_needed ? "true" : "false");
  out.set("covariances_ok",
          report.x_covariance_ok() && report.y_covariance_ok() ? "true" : "false");
  out.write(path);
}

int cmd_fit(const std::string& x_path, const std::string& y_path, const FitFlags& flags,
            const std::string& out_prefix) {
  const tcca::DataTensor x(tcca::read_tensor_auto(x_path));
  const tcca::DataTensor y(tcca::read_tensor_auto(y_path));
  const tcca::HopmConfig cfg = to_config(flags);
  const auto init = flags.init == "effective"
                        ? tcca::init_effective(x, y)
                        : tcca::init_random(x.sample_dims(), y.sample_dims(), flags.seed);
  const tcca::AssumptionReport report = tcca::check_assumptions(x, y, init);
  const tcca::HopmState state = tcca::fit_tcca(x, y, init, cfg);
  write_state_kv(out_prefix + "_result.kv", state, report);
  write_trace_csv(out_prefix + "_trace.csv", state.trace);
  std::printf("rho=%s sweeps=%d converged=%s\n",
              tcca::format_double(state.trace.rho.back()).c_str(), state.sweeps,
              state.converged ? "true" : "false");
  return state.converged ? kExitOk : kExitBudget;
}

int cmd_deflate(const std::string& x_path, const std::string& y_path, const FitFlags& flags,
                int components, int outer_rounds, const std::string& out_prefix) {
  const tcca::DataTensor x(tcca::read_tensor_auto(x_path));
  const tcca::DataTensor y(tcca::read_tensor_auto(y_path));
  const tcca::HopmConfig cfg = to_config(flags);
  const auto strategy = flags.init == "effective" ? tcca::DeflationInit::Effective
                                                   : tcca::DeflationInit::Random;
  const tcca::DeflationSet set = tcca::deflate(x, y, components, cfg, outer_rounds, strategy);

  std::string summary = "component,rho,sweeps,converged\n";
  bool all_converged = true;
  const tcca::AssumptionReport report =
      tcca::check_assumptions(x, y, {set.components.front().u, set.components.front().v});
  for (std::size_t k = 0; k < set.components.size(); ++k) {
    const auto& st = set.components[k];
    write_state_kv(out_prefix + "_component" + std::to_string(k + 1) + ".kv", st, report);
    summary += std::to_string(k + 1) + "," + tcca::format_double(st.trace.rho.back()) + "," +
               std::to_string(st.sweeps) + "," + (st.converged ? "true" : "false") + "\n";
    all_converged = all_converged && st.converged;
  }
  tcca::atomic_write_text(out_prefix + "_summary.csv", summary);
  std::printf("extracted %zu components\n", set.components.size());
  return all_converged ? kExitOk : kExitBudget;
}

int cmd_experiment(const std::string& protocol, const std::string& config_path,
                   const std::string& out_dir, std::uint64_t seed_override,
                   bool has_seed_override) {
  tcca::KeyValueFile kv;
  if (!config_path.empty()) kv = tcca::KeyValueFile::parse(config_path);
  std::filesystem::create_directories(out_dir);
  const auto out = std::filesystem::path(out_dir);

  if (protocol == "figure2") {
    tcca::Figure2Config cfg;
    if (kv.has("lambda")) cfg.lambda = kv.get_double("lambda");
    if (kv.has("n")) cfg.n = static_cast<tcca::Index>(kv.get_int("n"));
    if (kv.has("inits")) cfg.inits = static_cast<int>(kv.get_int("inits"));
    if (kv.has("sweeps")) cfg.sweeps = static_cast<int>(kv.get_int("sweeps"));
    if (kv.has("seed")) cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
    if (has_seed_override) cfg.seed = seed_override;
    tcca::write_figure2_csv(out / "figure2.csv", tcca::run_figure2(cfg));
    std::printf("wrote %s\n", (out / "figure2.csv").string().c_str());
  } else if (protocol == "figure3") {
    tcca::Figure3Config cfg;
    if (kv.has("ns")) {
      cfg.ns.clear();
      for (double v : kv.get_list("ns")) cfg.ns.push_back(static_cast<tcca::Index>(v));
    }
    if (kv.has("lambdas")) cfg.lambdas = kv.get_list("lambdas");
    if (kv.has("trials")) cfg.trials = static_cast<int>(kv.get_int("trials"));
    if (kv.has("restarts")) cfg.restarts = static_cast<int>(kv.get_int("restarts"));
    if (kv.has("success_eps")) cfg.success_eps = kv.get_double("success_eps");
    if (kv.has("threads")) cfg.threads = static_cast<int>(kv.get_int("threads"));
    if (kv.has("seed")) cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
    if (has_seed_override) cfg.seed = seed_override;
    tcca::write_figure3_csv(out / "figure3.csv", tcca::run_figure3(cfg));
    std::printf("wrote %s\n", (out / "figure3.csv").string().c_str());
  } else if (protocol == "inexact-scaling") {
    tcca::InexactScalingConfig cfg;
    if (kv.has("eps")) cfg.eps = kv.get_list("eps");
    if (kv.has("sweeps")) cfg.sweeps = static_cast<int>(kv.get_int("sweeps"));
    if (kv.has("n")) cfg.n = static_cast<tcca::Index>(kv.get_int("n"));
    if (kv.has("lambda")) cfg.lambda = kv.get_double("lambda");
    if (kv.has("ridge")) cfg.ridge = kv.get_double("ridge");
    if (kv.has("calibrate")) cfg.calibrate_gap = kv.get("calibrate") == "true";
    if (kv.has("seed")) cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
    if (has_seed_override) cfg.seed = seed_override;
    const auto rows = tcca::run_inexact_scaling(cfg);
    tcca::write_inexact_scaling_csv(out / "inexact_scaling.csv", rows);
    std::printf("wrote %s (log-log slope %s)\n", (out / "inexact_scaling.csv").string().c_str(),
                tcca::format_double(tcca::log_log_slope(rows)).c_str());
  } else {
    throw tcca::InputError("unknown protocol: " + protocol);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor canonical correlation analysis toolkit"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate synthetic paired tensor data");
  std::string sim_config, sim_out = "sim";
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "model config (k, dims, lambda, seed, n)")->required();
  sim->add_option("--out", sim_out, "output path prefix");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override the config seed");

  auto* fit = app.add_subcommand("fit", "fit one canonical component");
  std::string fit_x, fit_y, fit_out = "fit";
  FitFlags fit_flags;
  fit->add_option("x", fit_x, "X data tensor file")->required();
  fit->add_option("y", fit_y, "Y data tensor file")->required();
  add_fit_flags(fit, fit_flags);
  fit->add_option("--out", fit_out, "output path prefix");

  auto* defl = app.add_subcommand("deflate", "extract multiple components by deflation");
  std::string defl_x, defl_y, defl_out = "deflate";
  FitFlags defl_flags;
  defl_flags.init = "effective";
  int defl_components = 2;
  int defl_rounds = 3;
  defl->add_option("x", defl_x)->required();
  defl->add_option("y", defl_y)->required();
  add_fit_flags(defl, defl_flags);
  defl->add_option("--components", defl_components, "number of components");
  defl->add_option("--outer-rounds", defl_rounds, "deflation refinement rounds");
  defl->add_option("--out", defl_out, "output path prefix");

  auto* exp = app.add_subcommand("experiment", "run a benchmark protocol");
  std::string exp_protocol, exp_config, exp_out = "experiment_out";
  std::uint64_t exp_seed = 0;
  exp->add_option("--protocol", exp_protocol, "figure2|figure3|inexact-scaling")
      ->required()
      ->check(CLI::IsMember({"figure2", "figure3", "inexact-scaling"}));
  exp->add_option("--config", exp_config, "optional key=value overrides");
  exp->add_option("--out", exp_out, "output directory");
  auto* exp_seed_opt = exp->add_option("--seed", exp_seed, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_config, sim_out, sim_seed, sim_seed_opt->count() > 0);
    if (*fit) return cmd_fit(fit_x, fit_y, fit_flags, fit_out);
    if (*defl)
      return cmd_deflate(defl_x, defl_y, defl_flags, defl_components, defl_rounds, defl_out);
    if (*exp)
      return cmd_experiment(exp_protocol, exp_config, exp_out, exp_seed,
                            exp_seed_opt->count() > 0);
  } catch (const tcca::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const tcca::BudgetError& e) {
    std::fprintf(stderr, "budget error: %s\n", e.what());
    return kExitBudget;
  } catch (const tcca::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
