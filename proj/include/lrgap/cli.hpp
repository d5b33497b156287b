#pragma once

#include <optional>
#include <string>

#include "lrgap/experiment.hpp"
#include "lrgap/report.hpp"

namespace lrgap::cli {

inline constexpr int kExitOk = 0;            // all checks passed
inline constexpr int kExitUsage = 1;         // usage or config error
inline constexpr int kExitAssertion = 2;     // a checked claim failed
inline constexpr int kExitInapplicable = 3;  // instance outside the analyzed model

/// Problem instance file: flat JSON with keys `gamma`, `lambda`, `delta0`,
/// `k` (1-based index where the small eigenvalue suffix starts), `alpha`,
/// `epsilon`, `K`; optional `beta_star` and `eta`.
struct Instance {
  Vec gamma;
  Vec lambda;
  Vec delta0;
  std::optional<int> k;
  double alpha = 0.01;
  double epsilon = 0.01;
  int K = 10;
  std::optional<Vec> beta_star;
  std::optional<double> eta;
};

Instance load_instance(const std::string& path);

/// Flag-level overrides applied on top of an instance file.
struct InstanceOverrides {
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> eta;
  std::optional<int> K;
};

void apply_overrides(Instance& instance, const InstanceOverrides& overrides);

struct ClaimOptions {
  ExperimentConfig config;
  std::string out_dir = ".";
  bool enforce = true;  // false: report only (the montecarlo command)
  std::string command_name = "claim";
  std::string format = "all";  // all | csv | json
};

/// Monte Carlo campaign; writes <cmd>_trials.csv, <cmd>_summary.json and
/// <cmd>_manifest.json.  With `enforce`, exits 2 unless the duplicated-x
/// fraction sits in its 3-sigma band, every realized bound holds and every
/// degenerate trial has equal losses.
int cmd_claim(const ClaimOptions& options);

struct LemmaOptions {
  std::string instance_path;
  std::string out_dir = ".";
  int snapshots = kDefaultSnapshots;
  InstanceOverrides overrides;
};

/// Verifies both analytic bounds on one instance; writes lemma_report.json.
/// Exit 0 when the bounds hold, 2 when violated, 3 when the hypotheses do
/// not apply (reported as SKIPPED).
int cmd_lemma(const LemmaOptions& options);

struct TrajectoryOptions {
  std::string instance_path;
  std::string optimizer = "gf";  // gf | anneal | euler
  int snapshots = kDefaultSnapshots;
  std::string out_dir = ".";
  double euler_step = 1e-5;
  InstanceOverrides overrides;
};

/// Writes trajectory_<optimizer>.csv with one row per snapshot.
int cmd_trajectory(const TrajectoryOptions& options);

struct LandscapeOptions {
  std::string instance_path;
  std::string out_dir = ".";
  int grid_n = 61;
  double box_half = 0.0;  // 0: derived from the initial residual
  int snapshots = kDefaultSnapshots;
  InstanceOverrides overrides;
  std::string format = "all";  // all | csv | svg
};

/// 2-D only: writes landscape_grid.csv (train/test losses over a box around
/// the optimum) and landscape.svg (level curves with both optimizer paths).
int cmd_landscape(const LandscapeOptions& options);

}  // namespace lrgap::cli
