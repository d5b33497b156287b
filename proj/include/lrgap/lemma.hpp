#pragma once

#include "lrgap/optimize.hpp"

namespace lrgap {

/// Hypotheses of the two-regime bound: a contiguous suffix S of "small"
/// eigenvalues starting at `first_small` (0-based), separated from the rest
/// by a relative gap p, plus the slack parameter alpha and the stopping
/// threshold epsilon.
struct LemmaSetup {
  int first_small = 0;
  double p = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  int j_star = 0;  // argmin_{j in S} gamma_j delta_j(0)^2, lowest index on ties

  int small_count(int dim) const { return dim - first_small; }
};

/// Gap parameter p = min_{i < first_small}(gamma_i / gamma_k) - 1 where
/// k = first_small.  Throws InapplicableError when the gap is not positive.
double eigenvalue_gap(const DiagonalProblem& problem, int first_small);

LemmaSetup make_lemma_setup(const Vec& delta0, const DiagonalProblem& problem, int first_small,
                            double alpha, double epsilon);

/// Condition 1: the top eigenspace carries more than epsilon of the initial
/// train loss, gamma_1 delta_1(0)^2 > epsilon (strict).
bool check_condition1(const Vec& delta0, const DiagonalProblem& problem, double epsilon);

struct Condition2Result {
  bool holds = false;
  double lhs = 0.0;
};

/// Condition 2: the large eigenspace washes out before stopping,
///   epsilon^p * sum_{i not in S} gamma_i delta_i(0)^2
///     / (|S| gamma_j* delta_j*(0)^2)^(1+p)  <=  alpha.
/// Throws InapplicableError when the j* mass is zero.
Condition2Result check_condition2(const Vec& delta0, const DiagonalProblem& problem,
                                  const LemmaSetup& setup);

/// T >= (1/(4 gamma_k)) * log(|S| gamma_j* delta_j*(0)^2 / epsilon).
double stop_time_lower_bound(const Vec& delta0, const DiagonalProblem& problem,
                             const LemmaSetup& setup);

/// Flow conclusion: population loss >= epsilon (1-alpha) min_{j in S} lambda_j/gamma_j.
double gf_lower_bound(const LemmaSetup& setup, const DiagonalProblem& problem);

struct AgdBound {
  double bound = 0.0;
  double decay_constant = 0.0;  // c = max_{j: gamma_j != gamma_1} (1 - 2 eta gamma_j)^2
};

/// Annealed conclusion: population loss <=
///   epsilon max_{j: gamma_j = gamma_1}(lambda_j/gamma_j)
///     + c^K sum_{i: gamma_i != gamma_1} lambda_i delta_i(0)^2,
/// the second term being the concrete form of the exponentially-small
/// remainder (it is 0 whenever c = 0 and K >= 1).
AgdBound agd_upper_bound(const Vec& delta0, const LemmaSetup& setup,
                         const DiagonalProblem& problem, int K);

struct LemmaReport {
  LemmaSetup setup;
  double eta = 0.0;

  bool condition1 = false;
  double condition1_value = 0.0;  // gamma_1 delta_1(0)^2
  bool condition2 = false;
  double condition2_lhs = 0.0;

  double gf_lower = 0.0;
  double agd_upper = 0.0;
  double decay_constant = 0.0;
  double stop_time_lower = 0.0;

  double realized_gf_loss = 0.0;
  double realized_agd_loss = 0.0;
  double gf_stop_time = 0.0;
  double agd_flow_stop_time = 0.0;
  int agd_steps_taken = 0;

  bool gf_bound_holds = false;
  bool agd_bound_holds = false;
  bool stop_time_bound_holds = false;

  bool conditions_hold() const { return condition1 && condition2; }
  bool bounds_hold() const { return gf_bound_holds && agd_bound_holds && stop_time_bound_holds; }
};

/// Slack applied when comparing realized values against analytic bounds.
inline constexpr double kBoundSlack = 1e-9;

/// Runs both optimizers with eta = 1/gamma_1, evaluates every bound at the
/// setup's parameters and records whether the realized losses respect them.
/// Failed conditions are reported, not thrown.
LemmaReport verify_lemma(const Vec& delta0, const DiagonalProblem& problem,
                         const LemmaSetup& setup, int K, int snapshots = kDefaultSnapshots);

}  // namespace lrgap
