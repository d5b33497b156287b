#include "lrgap/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace lrgap {

namespace {

void check_dims(const Vec& delta, const DiagonalProblem& problem) {
  if (static_cast<int>(delta.size()) != problem.dim())
    throw std::invalid_argument("residual length does not match problem dimension");
}

TrajectoryPoint snapshot(Phase phase, double time, Vec delta, const DiagonalProblem& problem) {
  TrajectoryPoint point;
  point.phase = phase;
  point.time = time;
  point.train = train_loss(delta, problem);
  point.population = population_loss(delta, problem);
  point.delta = std::move(delta);
  return point;
}

/// Evenly thins discrete-phase rows down to at most max_points, always
/// keeping the first and last recorded step.
void thin_in_place(Trajectory& rows, int max_points) {
  const int n = static_cast<int>(rows.size());
  if (n <= max_points) return;
  Trajectory kept;
  kept.reserve(max_points);
  for (int j = 0; j < max_points; ++j) {
    const int idx = static_cast<int>(std::llround(static_cast<double>(j) * (n - 1) /
                                                  (max_points - 1)));
    if (kept.empty() || rows[idx].time > kept.back().time) kept.push_back(std::move(rows[idx]));
  }
  rows = std::move(kept);
}

}  // namespace

double anneal_rate(const DiagonalProblem& problem) { return 1.0 / problem.gamma[0]; }

Vec gf_state(const Vec& delta0, const DiagonalProblem& problem, double t) {
  check_dims(delta0, problem);
  if (t < 0.0) throw std::invalid_argument("flow time must be non-negative");
  Vec out(delta0.size());
  for (int i = 0; i < problem.dim(); ++i)
    out[i] = delta0[i] * std::exp(-2.0 * problem.gamma[i] * t);
  return out;
}

double solve_stop_time(const Vec& delta0, const DiagonalProblem& problem, double epsilon) {
  check_dims(delta0, problem);
  if (!(epsilon > 0.0)) throw std::invalid_argument("stopping threshold must be positive");
  if (train_loss(delta0, problem) <= epsilon) return 0.0;

  const double tol = 1e-12 * std::max(1.0, epsilon);
  const auto loss_at = [&](double t) { return train_loss(gf_state(delta0, problem, t), problem); };

  // The loss is strictly decreasing in t, so a doubling search brackets the
  // crossing and bisection pins it down.
  double hi = 1.0;
  while (loss_at(hi) > epsilon) hi *= 2.0;
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double loss = loss_at(mid);
    if (std::abs(loss - epsilon) <= tol) return mid;
    if (loss > epsilon)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

GFResult gradient_flow(const Vec& delta0, const DiagonalProblem& problem, double epsilon,
                       int snapshots) {
  if (snapshots < 2) throw std::invalid_argument("snapshots must be at least 2");
  GFResult result;
  result.stop_time = solve_stop_time(delta0, problem, epsilon);
  result.trajectory.push_back(snapshot(Phase::Init, 0.0, delta0, problem));
  if (result.stop_time > 0.0) {
    for (int j = 0; j < snapshots; ++j) {
      const double t = j == snapshots - 1
                           ? result.stop_time
                           : result.stop_time * static_cast<double>(j) / (snapshots - 1);
      result.trajectory.push_back(snapshot(Phase::GF, t, gf_state(delta0, problem, t), problem));
    }
  } else {
    result.trajectory.push_back(snapshot(Phase::GF, 0.0, delta0, problem));
  }
  result.final.delta = result.trajectory.back().delta;
  result.final.time = result.stop_time;
  result.final.phase = Phase::GF;
  return result;
}

Vec gd_step(const Vec& delta, const DiagonalProblem& problem, double eta) {
  check_dims(delta, problem);
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  Vec out(delta.size());
  for (int i = 0; i < problem.dim(); ++i) {
    // Top-eigenspace coordinates at the annealing rate flip sign exactly;
    // a computed 1 - 2*eta*gamma_i could leave an ulp-sized residue.
    const double factor = std::abs(eta * problem.gamma[i] - 1.0) <= kTopEigenspaceTol
                              ? -1.0
                              : 1.0 - 2.0 * eta * problem.gamma[i];
    out[i] = factor * delta[i];
  }
  return out;
}

GDResult gradient_descent(const Vec& delta0, const DiagonalProblem& problem, double eta, int K,
                          double epsilon) {
  if (K < 0) throw std::invalid_argument("step count must be non-negative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("stopping threshold must be positive");
  GDResult result;
  result.state = ResidualState{delta0, 0.0, Phase::GD};
  if (train_loss(delta0, problem) <= epsilon) return result;
  for (int step = 1; step <= K; ++step) {
    result.state.delta = gd_step(result.state.delta, problem, eta);
    result.state.time = step;
    result.steps_taken = step;
    if (train_loss(result.state.delta, problem) <= epsilon) break;
  }
  return result;
}

AnnealedResult annealed_gd(const Vec& delta0, const DiagonalProblem& problem, double eta, int K,
                           double epsilon, int snapshots) {
  if (snapshots < 2) throw std::invalid_argument("snapshots must be at least 2");
  if (K < 0) throw std::invalid_argument("step count must be non-negative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("stopping threshold must be positive");

  AnnealedResult result;
  result.trajectory.push_back(snapshot(Phase::Init, 0.0, delta0, problem));

  Vec state = delta0;
  Trajectory gd_rows;
  int steps = 0;
  if (train_loss(state, problem) > epsilon) {
    for (int step = 1; step <= K; ++step) {
      state = gd_step(state, problem, eta);
      steps = step;
      gd_rows.push_back(snapshot(Phase::GD, step, state, problem));
      if (train_loss(state, problem) <= epsilon) break;
    }
  }
  thin_in_place(gd_rows, snapshots);
  for (auto& row : gd_rows) result.trajectory.push_back(std::move(row));

  result.gd_steps_taken = steps;
  result.post_gd = ResidualState{state, static_cast<double>(steps), Phase::GD};

  result.gf = gradient_flow(state, problem, epsilon, snapshots);
  for (size_t i = 1; i < result.gf.trajectory.size(); ++i)  // skip its INIT row
    result.trajectory.push_back(result.gf.trajectory[i]);
  return result;
}

namespace {

ResidualState euler_run(const Vec& delta0, const DiagonalProblem& problem, double step,
                        double epsilon, Trajectory* rows, int snapshots) {
  check_dims(delta0, problem);
  if (!(step > 0.0) || !(1.0 - 2.0 * step * problem.gamma[0] > 0.0))
    throw std::invalid_argument("euler step too large for stability: need 1 - 2*step*gamma_1 > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("stopping threshold must be positive");

  Vec state = delta0;
  // Same per-coordinate map as gd_step at this step size; the stability
  // precondition keeps every factor inside (0, 1), far from the flip window.
  Vec factors(state.size());
  for (size_t i = 0; i < factors.size(); ++i)
    factors[i] = 1.0 - 2.0 * step * problem.gamma[i];
  std::uint64_t count = 0;
  // Streaming decimation: keep every stride-th step, doubling the stride
  // whenever the buffer fills, so recorded rows stay uniformly spaced.
  std::uint64_t stride = 1;
  const size_t buffer_cap = std::max<size_t>(4096, 2 * static_cast<size_t>(snapshots));
  Trajectory recorded;
  while (train_loss(state, problem) > epsilon) {
    for (size_t i = 0; i < state.size(); ++i) state[i] *= factors[i];
    ++count;
    if (rows != nullptr && count % stride == 0) {
      recorded.push_back(snapshot(Phase::GF, static_cast<double>(count) * step, state, problem));
      if (recorded.size() > buffer_cap) {
        Trajectory halved;
        for (size_t i = 1; i < recorded.size(); i += 2) halved.push_back(std::move(recorded[i]));
        recorded = std::move(halved);
        stride *= 2;
      }
    }
    if (count >= 1000000000ull)
      throw std::runtime_error("euler oracle exceeded 1e9 steps without stopping");
  }
  if (rows != nullptr) {
    if (recorded.empty() || recorded.back().time < static_cast<double>(count) * step)
      recorded.push_back(snapshot(Phase::GF, static_cast<double>(count) * step, state, problem));
    thin_in_place(recorded, snapshots);
    *rows = std::move(recorded);
  }
  return ResidualState{std::move(state), static_cast<double>(count) * step, Phase::GF};
}

}  // namespace

ResidualState euler_oracle(const Vec& delta0, const DiagonalProblem& problem, double step,
                           double epsilon) {
  return euler_run(delta0, problem, step, epsilon, nullptr, 0);
}

GFResult euler_flow(const Vec& delta0, const DiagonalProblem& problem, double step, double epsilon,
                    int snapshots) {
  if (snapshots < 2) throw std::invalid_argument("snapshots must be at least 2");
  GFResult result;
  Trajectory rows;
  result.final = euler_run(delta0, problem, step, epsilon, &rows, snapshots);
  result.stop_time = result.final.time;
  result.trajectory.push_back(snapshot(Phase::Init, 0.0, delta0, problem));
  if (rows.empty()) rows.push_back(snapshot(Phase::GF, 0.0, result.final.delta, problem));
  for (auto& row : rows) result.trajectory.push_back(std::move(row));
  return result;
}

}  // namespace lrgap
