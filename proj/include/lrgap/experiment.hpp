#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "lrgap/lemma.hpp"
#include "lrgap/rng.hpp"

namespace lrgap {

/// Parameters of one Monte Carlo campaign over 2-D datasets of n samples
/// drawn uniformly from the two standard basis vectors, labels noiseless.
struct ExperimentConfig {
  double alpha = 0.01;
  double epsilon = 0.01;
  int K = 10;
  int n = 3;
  int dim = 2;
  std::uint64_t seed = 0;
  int trials = 10000;
};

void validate_config(const ExperimentConfig& config);

enum class TrialCase {
  Duplicated,  // at least two distinct x values present
  Degenerate,  // all samples share one x value
};

const char* trial_case_name(TrialCase kind);

struct TrialResult {
  std::vector<int> counts;  // samples per basis direction
  TrialCase kind = TrialCase::Duplicated;
  double gf_loss = 0.0;
  double agd_loss = 0.0;
  double ratio = 0.0;  // gf_loss / agd_loss; NaN for degenerate trials
  double gf_stop_time = 0.0;
  double agd_flow_stop_time = 0.0;
  bool losses_equal = false;  // |gf - agd| <= 1e-10 * max(1, gf)
  std::optional<LemmaReport> report;  // present when the gap analysis applies
};

/// Ground truth scaled so the duplicated-sample analysis holds for every
/// 0 < epsilon < 1: beta* = (100/sqrt(alpha), 100/sqrt(alpha)).
Vec ground_truth_for(double alpha);

/// n samples, each x uniform over {e_1, e_2} (one 64-bit draw per sample,
/// low bit), y the matching coordinate of beta*.
Dataset sample_dataset(SplitMix64& rng, const Vec& beta_star, int n);

/// Runs both optimizers on the problem a fixed dataset induces.
TrialResult run_trial_on(const ExperimentConfig& config, const Dataset& dataset);

TrialResult run_trial(const ExperimentConfig& config, SplitMix64& rng);

struct MCSummary {
  int trials = 0;
  int duplicated_count = 0;
  int degenerate_count = 0;
  double duplicated_fraction = 0.0;
  double mean_ratio_duplicated = 0.0;  // NaN when no duplicated trials
  double min_ratio_duplicated = 0.0;   // NaN when no duplicated trials
  double degenerate_loss_equal_fraction = 1.0;
  int conditions_pass = 0;
  int gf_bound_pass = 0;
  int agd_bound_pass = 0;
  int stop_time_bound_pass = 0;
};

using TrialSink = std::function<void(int index, const TrialResult& result)>;

/// Runs config.trials independent trials; the stream for trial i depends
/// only on (config.seed, i), so the summary is reproducible bit for bit.
/// `sink`, when set, observes every trial in index order.
MCSummary monte_carlo(const ExperimentConfig& config, const TrialSink& sink = {});

}  // namespace lrgap
