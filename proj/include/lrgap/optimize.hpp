#pragma once

#include "lrgap/quadratic.hpp"

namespace lrgap {

struct TrajectoryPoint {
  Phase phase = Phase::Init;
  double time = 0.0;  // flow time (GF) or step count (GD)
  Vec delta;
  double train = 0.0;
  double population = 0.0;
};

/// Ordered snapshots of one run.  Phases appear in the order INIT, GD, GF
/// and time is strictly increasing within each phase.
using Trajectory = std::vector<TrajectoryPoint>;

struct GFResult {
  double stop_time = 0.0;
  ResidualState final;
  Trajectory trajectory;
};

struct GDResult {
  ResidualState state;
  int steps_taken = 0;
};

struct AnnealedResult {
  int gd_steps_taken = 0;
  ResidualState post_gd;
  GFResult gf;
  Trajectory trajectory;  // INIT + GD steps + GF tail
};

/// Relative window around gamma_1 treated as the top eigenspace.  Keeps the
/// sign-flip factor at exactly -1 instead of a rounded 1 - 2*eta*gamma_i.
inline constexpr double kTopEigenspaceTol = 1e-12;

inline constexpr int kDefaultSnapshots = 256;

/// The "large" annealing step size: eta = 1/gamma_1.
double anneal_rate(const DiagonalProblem& problem);

/// Closed-form flow state: delta_i(t) = delta_i(0) * exp(-2 gamma_i t).
Vec gf_state(const Vec& delta0, const DiagonalProblem& problem, double t);

/// The unique T >= 0 where the train loss along the flow reaches epsilon,
/// or 0 when it already starts at or below it.  Bisection on [0, upper]
/// with the upper end grown by doubling; absolute tolerance on the train
/// loss of 1e-12 * max(1, epsilon).
double solve_stop_time(const Vec& delta0, const DiagonalProblem& problem, double epsilon);

/// Flow until the train loss reaches epsilon, with `snapshots` points at
/// uniformly spaced times in [0, T] after the leading INIT row.
GFResult gradient_flow(const Vec& delta0, const DiagonalProblem& problem, double epsilon,
                       int snapshots = kDefaultSnapshots);

/// One descent step: delta_i <- (1 - 2 eta gamma_i) delta_i, with the top
/// eigenspace factor pinned to exactly -1 when eta*gamma_i is within
/// kTopEigenspaceTol of 1.
Vec gd_step(const Vec& delta, const DiagonalProblem& problem, double eta);

/// Up to K steps with early stopping; the train loss is checked before the
/// first step and after every step.
GDResult gradient_descent(const Vec& delta0, const DiagonalProblem& problem, double eta, int K,
                          double epsilon);

/// Large-step descent for K steps, then flow to the stopping threshold.
AnnealedResult annealed_gd(const Vec& delta0, const DiagonalProblem& problem, double eta, int K,
                           double epsilon, int snapshots = kDefaultSnapshots);

/// Small-step descent until the train loss reaches epsilon.  Exists as an
/// independent cross-check of the closed-form flow; requires
/// 1 - 2*step*gamma_1 > 0.
ResidualState euler_oracle(const Vec& delta0, const DiagonalProblem& problem, double step,
                           double epsilon);

/// euler_oracle with a recorded trajectory (tagged GF, time = step * count).
GFResult euler_flow(const Vec& delta0, const DiagonalProblem& problem, double step, double epsilon,
                    int snapshots = kDefaultSnapshots);

}  // namespace lrgap
