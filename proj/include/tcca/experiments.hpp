#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcca/hopm.hpp"
#include "tcca/synth.hpp"

namespace tcca {

/// Captured factor trajectory: one entry per half-update, in sweep order.
struct Trajectory {
  std::vector<Vector> factors;
  ConvergenceTrace trace;
  HopmState final_state;
};

/// Runs exactly `sweeps` sweeps from the given init, recording every
/// half-updated factor. No stopping rule; used by the scaling protocols.
Trajectory run_sweeps(const DataTensor& x, const DataTensor& y,
                      std::pair<RankOneDirections, RankOneDirections> init,
                      const HopmConfig& cfg, int sweeps);

struct Figure2Config {
  double lambda = 0.9;
  Index n = 100;
  int inits = 100;
  int sweeps = 60;
  std::uint64_t seed = 19;
};

struct Figure2Row {
  std::string variant;  // "metric" or "sphere"
  int init = 0;
  int sweep = 0;
  double rho = 0.0;
  double diff = 0.0;
};

/// One dataset, many random inits, both normalizations per init.
std::vector<Figure2Row> run_figure2(const Figure2Config& cfg);
void write_figure2_csv(const std::filesystem::path& path, const std::vector<Figure2Row>& rows);

struct Figure3Config {
  std::vector<Index> ns = {50, 100, 300, 700, 1000, 1500};
  std::vector<double> lambdas = {0.8, 0.5, 0.2};
  int trials = 100;       // per grid cell
  int restarts = 15;      // random restarts defining the reference maximum
  double success_eps = 0.01;
  std::uint64_t seed = 7;
  int max_sweeps = 150;
  double tol = 1e-5;
  int threads = 0;        // 0 = hardware concurrency
};

struct Figure3Cell {
  Index n = 0;
  double lambda = 0.0;
  int trials = 0;
  double success_random = 0.0;     // fraction of trials where a single random
  double success_effective = 0.0;  // init / the effective init reached rho_max
  double mean_error_random = 0.0;  // mean factor error vs the population optimum
  double mean_error_effective = 0.0;
};

/// Success-rate and error grid over (n, lambda); each trial draws a fresh
/// dataset, estimates the attainable maximum from `restarts` random inits,
/// then scores one random init and the effective init against it. Cells are
/// processed in parallel with deterministic per-cell sub-seeds.
std::vector<Figure3Cell> run_figure3(const Figure3Config& cfg);
void write_figure3_csv(const std::filesystem::path& path, const std::vector<Figure3Cell>& cells);

struct InexactScalingConfig {
  std::vector<double> eps = {1e-4, 1e-6, 1e-8};
  int sweeps = 30;
  Index n = 100;
  double lambda = 0.9;
  std::uint64_t seed = 11;
  double ridge = 1e-3;  // keeps the inner problems strongly convex
  bool calibrate_gap = true;  // saturate the allowed gap so the scaling shows
};

struct InexactScalingRow {
  double eps = 0.0;
  double max_deviation = 0.0;  // max factor distance to the exact trajectory
};

/// Runs the exact trajectory once and one inexact trajectory per eps (same
/// init, unit-sphere normalization on both) for a fixed sweep budget.
std::vector<InexactScalingRow> run_inexact_scaling(const InexactScalingConfig& cfg);
void write_inexact_scaling_csv(const std::filesystem::path& path,
                               const std::vector<InexactScalingRow>& rows);

/// Least-squares slope of log(dev) against log(eps).
double log_log_slope(const std::vector<InexactScalingRow>& rows);

}  // namespace tcca
