#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lrgap/optimize.hpp"
#include "lrgap/rng.hpp"

using namespace lrgap;

namespace {

DiagonalProblem doubled_direction_problem() {
  return make_problem({2.0 / 3.0, 1.0 / 3.0}, {0.5, 0.5});
}

// Closed-form stop time for delta0 = (a, a), gamma = (2/3, 1/3): substitute
// u = exp(-4t/3), solve (2/3)a^2 u^2 + (1/3)a^2 u = eps and invert.
double two_coord_stop_time(double a, double eps) {
  const double qa = 2.0 / 3.0 * a * a;
  const double qb = 1.0 / 3.0 * a * a;
  const double u = (-qb + std::sqrt(qb * qb + 4.0 * qa * eps)) / (2.0 * qa);
  return -0.75 * std::log(u);
}

DiagonalProblem random_problem(SplitMix64& rng, int max_dim) {
  const int d = 1 + static_cast<int>(rng.next_below(max_dim));
  Vec gamma(d), lambda(d);
  for (int i = 0; i < d; ++i) {
    gamma[i] = rng.next_in(0.1, 2.0);
    lambda[i] = rng.next_in(0.1, 2.0);
  }
  std::sort(gamma.rbegin(), gamma.rend());
  return make_problem(gamma, lambda);
}

Vec random_delta(SplitMix64& rng, int d) {
  Vec delta(d);
  for (int i = 0; i < d; ++i) {
    const double magnitude = rng.next_in(0.5, 2.0);
    delta[i] = rng.next() & 1 ? magnitude : -magnitude;
  }
  return delta;
}

}  // namespace

TEST_CASE("gf_state follows the closed-form exponential decay") {
  CHECK(gf_state(Vec{1.0, 1.0}, doubled_direction_problem(), 0.0) == Vec{1.0, 1.0});

  const DiagonalProblem half = make_problem({0.5}, {0.5});
  CHECK(gf_state(Vec{2.0}, half, std::log(2.0))[0] == doctest::Approx(1.0).epsilon(1e-12));

  const double t = two_coord_stop_time(1.0, 0.1);
  CHECK(t == doctest::Approx(1.1670038248812933).epsilon(1e-12));
  CHECK(train_loss(gf_state(Vec{1.0, 1.0}, doubled_direction_problem(), t), doubled_direction_problem()) ==
        doctest::Approx(0.1).epsilon(1e-12));

  CHECK_THROWS_AS(gf_state(Vec{1.0, 1.0}, doubled_direction_problem(), -0.1), std::invalid_argument);
}

TEST_CASE("solve_stop_time pins the train loss to the threshold") {
  const DiagonalProblem half = make_problem({0.5}, {0.5});
  CHECK(solve_stop_time(Vec{1.0}, half, 0.25) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));

  CHECK(solve_stop_time(Vec{1.0, 1.0}, doubled_direction_problem(), 0.1) ==
        doctest::Approx(two_coord_stop_time(1.0, 0.1)).epsilon(1e-9));

  const DiagonalProblem unit = make_problem({1.0}, {1.0});
  CHECK(solve_stop_time(Vec{0.1}, unit, 0.5) == 0.0);   // already below threshold
  CHECK(solve_stop_time(Vec{0.0}, unit, 0.25) == 0.0);  // zero residual
  CHECK_THROWS_AS(solve_stop_time(Vec{1.0}, unit, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_stop_time(Vec{1.0}, unit, -1.0), std::invalid_argument);
}

TEST_CASE("gradient_flow stops on the eps level set") {
  const DiagonalProblem p = doubled_direction_problem();

  SUBCASE("slow-coordinate mass dominates the final loss") {
    const GFResult r = gradient_flow(Vec{-10.0, -10.0}, p, 0.01);
    // Independent closed form: u = exp(-4T/3) solves 200u^2/3 + 100u/3 = 0.01.
    const double u = (-100.0 + std::sqrt(10024.0)) / 400.0;
    const double expected_pop = 50.0 * u * u + 50.0 * u;
    CHECK(expected_pop == doctest::Approx(0.0149955).epsilon(1e-4));
    CHECK(population_loss(r.final, p) == doctest::Approx(expected_pop).epsilon(1e-9));
    CHECK(train_loss(r.final, p) == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(r.stop_time == doctest::Approx(-0.75 * std::log(u)).epsilon(1e-9));
  }

  SUBCASE("already below threshold returns the start") {
    const GFResult r = gradient_flow(Vec{1.0, 0.0}, p, 1.0);
    CHECK(r.stop_time == 0.0);
    CHECK(r.final.delta == Vec{1.0, 0.0});
  }

  SUBCASE("trajectory holds an INIT row plus `snapshots` uniformly spaced GF rows") {
    const GFResult r = gradient_flow(Vec{1.0, 1.0}, p, 0.1, 5);
    REQUIRE(r.trajectory.size() == 6);
    CHECK(r.trajectory.front().phase == Phase::Init);
    for (int j = 1; j <= 5; ++j) {
      CHECK(r.trajectory[j].phase == Phase::GF);
      CHECK(r.trajectory[j].time ==
            doctest::Approx(r.stop_time * (j - 1) / 4.0).epsilon(1e-12));
    }
    CHECK(r.trajectory.back().time == r.stop_time);
    CHECK(r.trajectory.back().delta == r.final.delta);
    CHECK_THROWS_AS(gradient_flow(Vec{1.0, 1.0}, p, 0.1, 1), std::invalid_argument);
  }
}

TEST_CASE("gd_step multiplies by 1 - 2*eta*gamma with an exact top-eigenspace flip") {
  const DiagonalProblem p = doubled_direction_problem();
  const Vec stepped = gd_step(Vec{1.0, 1.0}, p, 1.5);
  CHECK(stepped[0] == -1.0);  // exact sign flip
  CHECK(stepped[1] == 0.0);   // 1 - 2*(3/2)*(1/3) vanishes

  const DiagonalProblem half = make_problem({0.5}, {0.5});
  CHECK(gd_step(Vec{1.0}, half, 1.0)[0] == 0.0);

  CHECK_THROWS_AS(gd_step(Vec{1.0, 1.0}, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gd_step(Vec{1.0, 1.0}, p, -0.5), std::invalid_argument);

  SUBCASE("small steps contract every coordinate") {
    const Vec tiny = gd_step(Vec{1.0, 1.0}, p, 1e-3);
    CHECK(tiny[0] == doctest::Approx(1.0 - 2e-3 * 2.0 / 3.0).epsilon(1e-15));
    CHECK(tiny[1] == doctest::Approx(1.0 - 2e-3 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("gradient_descent oscillates on the top coordinate and zeroes the rest") {
  const DiagonalProblem p = doubled_direction_problem();
  const GDResult r = gradient_descent(Vec{-10.0, -10.0}, p, 1.5, 5, 0.01);
  CHECK(r.steps_taken == 5);
  CHECK(r.state.delta == Vec{10.0, 0.0});  // (-1)^5 * -10 and one-step zeroing

  SUBCASE("K = 0 leaves the state untouched") {
    const GDResult r0 = gradient_descent(Vec{-10.0, -10.0}, p, 1.5, 0, 0.01);
    CHECK(r0.steps_taken == 0);
    CHECK(r0.state.delta == Vec{-10.0, -10.0});
  }

  SUBCASE("early stop precedes the first step when already below threshold") {
    const DiagonalProblem unit = make_problem({1.0}, {1.0});
    const GDResult r0 = gradient_descent(Vec{0.01}, unit, 0.1, 100, 0.5);
    CHECK(r0.steps_taken == 0);
    CHECK(r0.state.delta == Vec{0.01});
  }

  SUBCASE("early stop fires as soon as the loss crosses the threshold") {
    const DiagonalProblem unit = make_problem({1.0}, {1.0});
    // eta = 0.25 contracts by half each step: 1 -> 0.5 -> 0.25; train 0.0625 <= 0.1.
    const GDResult r2 = gradient_descent(Vec{1.0}, unit, 0.25, 100, 0.1);
    CHECK(r2.steps_taken == 2);
    CHECK(r2.state.delta[0] == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("annealed_gd lands on the good end of the level set") {
  const DiagonalProblem p = doubled_direction_problem();

  SUBCASE("two large steps then flow reach the top-eigenspace minimum") {
    const AnnealedResult r = annealed_gd(Vec{-10.0, -10.0}, p, 1.5, 2, 0.01);
    CHECK(r.gd_steps_taken == 2);
    CHECK(r.post_gd.delta == Vec{-10.0, 0.0});
    CHECK(r.gf.final.delta[1] == 0.0);
    CHECK(std::abs(r.gf.final.delta[0]) == doctest::Approx(std::sqrt(0.015)).epsilon(1e-9));
    CHECK(population_loss(r.gf.final, p) == doctest::Approx(0.0075).epsilon(1e-9));
    CHECK(train_loss(r.gf.final, p) == doctest::Approx(0.01).epsilon(1e-10));
  }

  SUBCASE("single eigenspace: annealing only flips signs relative to the flow") {
    const DiagonalProblem flat = make_problem({1.0, 1.0}, {0.3, 0.9});
    const Vec delta0{2.0, -1.5};
    const AnnealedResult annealed = annealed_gd(delta0, flat, anneal_rate(flat), 3, 0.05);
    const GFResult flowed = gradient_flow(delta0, flat, 0.05);
    REQUIRE(annealed.gf.final.delta.size() == 2);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(annealed.gf.final.delta[i]) ==
            doctest::Approx(std::abs(flowed.final.delta[i])).epsilon(1e-9));
    CHECK(population_loss(annealed.gf.final, flat) ==
          doctest::Approx(population_loss(flowed.final, flat)).epsilon(1e-12));
  }

  SUBCASE("vanished decay constant keeps the bound tight at any eps") {
    const AnnealedResult r = annealed_gd(Vec{-1000.0, -1000.0}, p, 1.5, 10, 0.5);
    CHECK(population_loss(r.gf.final, p) <= 0.375 * (1.0 + 1e-9));
    CHECK(population_loss(r.gf.final, p) == doctest::Approx(0.375).epsilon(1e-9));
  }

  SUBCASE("trajectory phases arrive in order with per-phase snapshot budgets") {
    const AnnealedResult r = annealed_gd(Vec{-10.0, -10.0}, p, 1.5, 2, 0.01, 2);
    REQUIRE(r.trajectory.size() == 5);  // INIT + 2 GD + 2 GF
    CHECK(r.trajectory[0].phase == Phase::Init);
    CHECK(r.trajectory[1].phase == Phase::GD);
    CHECK(r.trajectory[2].phase == Phase::GD);
    CHECK(r.trajectory[2].delta[1] == 0.0);
    CHECK(r.trajectory[3].phase == Phase::GF);
    CHECK(r.trajectory[4].phase == Phase::GF);
    CHECK(r.trajectory[1].time < r.trajectory[2].time);
    CHECK(r.trajectory[3].time < r.trajectory[4].time);
  }
}

TEST_CASE("euler_oracle approaches the closed form as the step vanishes") {
  const DiagonalProblem p = doubled_direction_problem();

  SUBCASE("matches gradient flow componentwise") {
    const GFResult flow = gradient_flow(Vec{1.0, 1.0}, p, 0.1);
    const ResidualState euler = euler_oracle(Vec{1.0, 1.0}, p, 1e-5, 0.1);
    for (int i = 0; i < 2; ++i)
      CHECK(euler.delta[i] == doctest::Approx(flow.final.delta[i]).epsilon(1e-4));
  }

  SUBCASE("no-op when already below the threshold") {
    const ResidualState r = euler_oracle(Vec{0.1, 0.1}, p, 1e-5, 1.0);
    CHECK(r.delta == Vec{0.1, 0.1});
    CHECK(r.time == 0.0);
  }

  SUBCASE("1-D magnitude at stopping") {
    const DiagonalProblem half = make_problem({0.5}, {0.5});
    const ResidualState r = euler_oracle(Vec{1.0}, half, 1e-6, 0.25);
    CHECK(std::abs(r.delta[0]) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  }

  SUBCASE("unstable steps are rejected") {
    CHECK_THROWS_AS(euler_oracle(Vec{1.0}, make_problem({1.0}, {1.0}), 0.5, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(euler_oracle(Vec{1.0}, make_problem({1.0}, {1.0}), 0.7, 0.1),
                    std::invalid_argument);
  }

  SUBCASE("euler_flow records a thinned path ending at the stop step") {
    const GFResult r = euler_flow(Vec{1.0, 1.0}, p, 1e-4, 0.1, 16);
    CHECK(r.trajectory.front().phase == Phase::Init);
    CHECK(r.trajectory.size() <= 17);
    CHECK(r.trajectory.back().time == doctest::Approx(r.stop_time).epsilon(1e-12));
    for (size_t i = 2; i < r.trajectory.size(); ++i)
      CHECK(r.trajectory[i - 1].time < r.trajectory[i].time);
    CHECK(train_loss(r.final.delta, p) <= 0.1);
  }
}

TEST_CASE("train loss is monotone non-increasing along the flow") {
  SplitMix64 rng(515151);
  for (int trial = 0; trial < 25; ++trial) {
    const DiagonalProblem p = random_problem(rng, 6);
    const Vec delta0 = random_delta(rng, p.dim());
    double previous = train_loss(delta0, p);
    for (int j = 1; j <= 20; ++j) {
      const double current = train_loss(gf_state(delta0, p, 0.2 * j), p);
      CHECK(current <= previous * (1.0 + 1e-15));
      if (previous > 1e-300) CHECK(current < previous);
      previous = current;
    }
  }
}

TEST_CASE("stopping contract: both optimizers end exactly at the threshold") {
  SplitMix64 rng(616161);
  for (int trial = 0; trial < 25; ++trial) {
    const DiagonalProblem p = random_problem(rng, 6);
    const Vec delta0 = random_delta(rng, p.dim());
    const double eps = rng.next_in(1e-4, 0.9 * train_loss(delta0, p));
    const double tol = 1e-10 * std::max(1.0, eps);

    const GFResult flow = gradient_flow(delta0, p, eps);
    CHECK(std::abs(train_loss(flow.final, p) - eps) <= tol);

    const AnnealedResult annealed = annealed_gd(delta0, p, anneal_rate(p), 5, eps);
    CHECK(train_loss(annealed.gf.final, p) <= eps + tol);
    // When the descent stage did not already cross eps, the flow pins it.
    if (annealed.gf.stop_time > 0.0)
      CHECK(std::abs(train_loss(annealed.gf.final, p) - eps) <= tol);
  }
}

TEST_CASE("annealing rate invariants: oscillation and contraction") {
  // Repeated top eigenvalue plus a strictly smaller tail.
  const DiagonalProblem p = make_problem({1.5, 1.5, 0.5, 0.2}, {1.0, 0.5, 0.25, 2.0});
  const double eta = anneal_rate(p);
  double c = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double factor = 1.0 - 2.0 * eta * p.gamma[i];
    if (p.gamma[i] < p.gamma[0]) c = std::max(c, factor * factor);
  }
  REQUIRE(c < 1.0);

  Vec state{2.0, -1.0, 1.5, -0.5};
  const Vec start = state;
  double decay = 1.0;
  for (int step = 1; step <= 12; ++step) {
    state = gd_step(state, p, eta);
    decay *= c;
    CHECK(std::abs(state[0]) == std::abs(start[0]));  // exact oscillation
    CHECK(std::abs(state[1]) == std::abs(start[1]));
    for (int i = 2; i < 4; ++i)
      CHECK(state[i] * state[i] <= decay * start[i] * start[i] * (1.0 + 1e-12));
  }
}

TEST_CASE("steps beyond the annealing rate blow up the top coordinate") {
  const DiagonalProblem p = doubled_direction_problem();
  const double eta = 1.1 * anneal_rate(p);
  const double factor = 1.0 - 2.0 * eta * p.gamma[0];
  CHECK(std::abs(factor) > 1.0);
  Vec state{1.0, 1.0};
  double previous = std::abs(state[0]);
  for (int step = 0; step < 8; ++step) {
    state = gd_step(state, p, eta);
    CHECK(std::abs(state[0]) > previous);
    previous = std::abs(state[0]);
  }
}

TEST_CASE("euler oracle agrees with the closed form on random problems") {
  SplitMix64 rng(717171);
  for (int trial = 0; trial < 10; ++trial) {
    const DiagonalProblem p = random_problem(rng, 4);
    const Vec delta0 = random_delta(rng, p.dim());
    const double eps = rng.next_in(1e-3, 1e-1);
    const GFResult flow = gradient_flow(delta0, p, eps);
    const ResidualState euler = euler_oracle(delta0, p, 1e-5, eps);
    for (int i = 0; i < p.dim(); ++i) {
      const double a = flow.final.delta[i];
      const double b = euler.delta[i];
      const bool close = std::abs(a - b) <= 1e-4 * std::max(std::abs(a), std::abs(b)) ||
                         std::abs(a - b) <= 1e-5;
      CHECK(close);
    }
  }
}
