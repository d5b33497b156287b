#include "lrgap/lemma.hpp"

#include <cmath>

namespace lrgap {

namespace {

void check_dims(const Vec& delta0, const DiagonalProblem& problem) {
  if (static_cast<int>(delta0.size()) != problem.dim())
    throw std::invalid_argument("residual length does not match problem dimension");
}

void check_setup_range(const DiagonalProblem& problem, int first_small) {
  if (first_small < 1 || first_small >= problem.dim())
    throw std::invalid_argument("small set must be a proper non-empty suffix of the spectrum");
}

/// |S| * gamma_j* * delta_j*(0)^2; throws when that mass vanishes.
double small_set_mass(const Vec& delta0, const DiagonalProblem& problem,
                      const LemmaSetup& setup) {
  const double m = problem.gamma[setup.j_star] * delta0[setup.j_star] * delta0[setup.j_star];
  if (!(m > 0.0))
    throw InapplicableError("small eigenvalue set carries no initial residual mass");
  return static_cast<double>(setup.small_count(problem.dim())) * m;
}

bool within_top_eigenspace(const DiagonalProblem& problem, int i) {
  return problem.gamma[i] >= problem.gamma[0] * (1.0 - kTopEigenspaceTol);
}

/// lower-bound comparisons get an absolute-or-relative slack of kBoundSlack
bool at_least(double value, double bound) {
  return value >= bound - kBoundSlack * std::max(1.0, std::abs(bound));
}

bool at_most(double value, double bound) {
  return value <= bound + kBoundSlack * std::max(1.0, std::abs(bound));
}

}  // namespace

double eigenvalue_gap(const DiagonalProblem& problem, int first_small) {
  check_setup_range(problem, first_small);
  const double gamma_k = problem.gamma[first_small];
  double min_ratio = problem.gamma[0] / gamma_k;
  for (int i = 1; i < first_small; ++i)
    min_ratio = std::min(min_ratio, problem.gamma[i] / gamma_k);
  const double p = min_ratio - 1.0;
  if (!(p > 0.0))
    throw InapplicableError("no eigenvalue gap above index " + std::to_string(first_small));
  return p;
}

LemmaSetup make_lemma_setup(const Vec& delta0, const DiagonalProblem& problem, int first_small,
                            double alpha, double epsilon) {
  check_dims(delta0, problem);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  LemmaSetup setup;
  setup.first_small = first_small;
  setup.p = eigenvalue_gap(problem, first_small);
  setup.alpha = alpha;
  setup.epsilon = epsilon;
  setup.j_star = first_small;
  double best = problem.gamma[first_small] * delta0[first_small] * delta0[first_small];
  for (int j = first_small + 1; j < problem.dim(); ++j) {
    const double mass = problem.gamma[j] * delta0[j] * delta0[j];
    if (mass < best) {
      best = mass;
      setup.j_star = j;
    }
  }
  return setup;
}

bool check_condition1(const Vec& delta0, const DiagonalProblem& problem, double epsilon) {
  check_dims(delta0, problem);
  return problem.gamma[0] * delta0[0] * delta0[0] > epsilon;
}

Condition2Result check_condition2(const Vec& delta0, const DiagonalProblem& problem,
                                  const LemmaSetup& setup) {
  check_dims(delta0, problem);
  const double mass = small_set_mass(delta0, problem, setup);
  double large_mass = 0.0;
  for (int i = 0; i < setup.first_small; ++i)
    large_mass += problem.gamma[i] * delta0[i] * delta0[i];
  Condition2Result result;
  result.lhs = std::pow(setup.epsilon, setup.p) * large_mass / std::pow(mass, 1.0 + setup.p);
  result.holds = result.lhs <= setup.alpha;
  return result;
}

double stop_time_lower_bound(const Vec& delta0, const DiagonalProblem& problem,
                             const LemmaSetup& setup) {
  check_dims(delta0, problem);
  const double mass = small_set_mass(delta0, problem, setup);
  return std::log(mass / setup.epsilon) / (4.0 * problem.gamma[setup.first_small]);
}

double gf_lower_bound(const LemmaSetup& setup, const DiagonalProblem& problem) {
  double min_ratio = problem.lambda[setup.first_small] / problem.gamma[setup.first_small];
  for (int j = setup.first_small + 1; j < problem.dim(); ++j)
    min_ratio = std::min(min_ratio, problem.lambda[j] / problem.gamma[j]);
  return setup.epsilon * (1.0 - setup.alpha) * min_ratio;
}

AgdBound agd_upper_bound(const Vec& delta0, const LemmaSetup& setup,
                         const DiagonalProblem& problem, int K) {
  check_dims(delta0, problem);
  if (K < 0) throw std::invalid_argument("step count must be non-negative");
  const double eta = anneal_rate(problem);
  AgdBound out;
  double top_ratio = 0.0;  // index 0 is always in the top eigenspace
  double decayed_mass = 0.0;
  for (int i = 0; i < problem.dim(); ++i) {
    if (within_top_eigenspace(problem, i)) {
      top_ratio = std::max(top_ratio, problem.lambda[i] / problem.gamma[i]);
    } else {
      const double factor = 1.0 - 2.0 * eta * problem.gamma[i];
      out.decay_constant = std::max(out.decay_constant, factor * factor);
      decayed_mass += problem.lambda[i] * delta0[i] * delta0[i];
    }
  }
  out.bound = setup.epsilon * top_ratio + std::pow(out.decay_constant, K) * decayed_mass;
  return out;
}

LemmaReport verify_lemma(const Vec& delta0, const DiagonalProblem& problem,
                         const LemmaSetup& setup, int K, int snapshots) {
  check_dims(delta0, problem);
  LemmaReport report;
  report.setup = setup;
  report.eta = anneal_rate(problem);

  report.condition1 = check_condition1(delta0, problem, setup.epsilon);
  report.condition1_value = problem.gamma[0] * delta0[0] * delta0[0];
  const Condition2Result cond2 = check_condition2(delta0, problem, setup);
  report.condition2 = cond2.holds;
  report.condition2_lhs = cond2.lhs;

  report.gf_lower = gf_lower_bound(setup, problem);
  const AgdBound agd_bound = agd_upper_bound(delta0, setup, problem, K);
  report.agd_upper = agd_bound.bound;
  report.decay_constant = agd_bound.decay_constant;
  report.stop_time_lower = stop_time_lower_bound(delta0, problem, setup);

  const GFResult gf = gradient_flow(delta0, problem, setup.epsilon, snapshots);
  const AnnealedResult agd =
      annealed_gd(delta0, problem, report.eta, K, setup.epsilon, snapshots);

  report.realized_gf_loss = population_loss(gf.final, problem);
  report.realized_agd_loss = population_loss(agd.gf.final, problem);
  report.gf_stop_time = gf.stop_time;
  report.agd_flow_stop_time = agd.gf.stop_time;
  report.agd_steps_taken = agd.gd_steps_taken;

  report.gf_bound_holds = at_least(report.realized_gf_loss, report.gf_lower);
  report.agd_bound_holds = at_most(report.realized_agd_loss, report.agd_upper);
  report.stop_time_bound_holds = at_least(report.gf_stop_time, report.stop_time_lower);
  return report;
}

}  // namespace lrgap
