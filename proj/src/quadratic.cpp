#include "lrgap/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace lrgap {

namespace {

constexpr double kBasisOrthoTol = 1e-10;
constexpr double kCommuteTol = 1e-8;
constexpr double kRankTol = 1e-12;

void check_dims(const Vec& delta, const DiagonalProblem& problem) {
  if (static_cast<int>(delta.size()) != problem.dim()) {
    throw std::invalid_argument("residual length " + std::to_string(delta.size()) +
                                " does not match problem dimension " +
                                std::to_string(problem.dim()));
  }
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Init: return "INIT";
    case Phase::GD: return "GD";
    case Phase::GF: return "GF";
  }
  return "?";
}

void validate_problem(const DiagonalProblem& problem) {
  const int d = problem.dim();
  if (d == 0) throw std::invalid_argument("problem has no coordinates");
  if (static_cast<int>(problem.lambda.size()) != d)
    throw std::invalid_argument("lambda length does not match gamma length");
  if (!problem.ground_truth.empty() && static_cast<int>(problem.ground_truth.size()) != d)
    throw std::invalid_argument("ground_truth length does not match dimension");
  for (int i = 0; i < d; ++i) {
    if (!(problem.gamma[i] > 0.0))
      throw std::invalid_argument("train eigenvalues must be strictly positive");
    if (i > 0 && problem.gamma[i] > problem.gamma[i - 1])
      throw std::invalid_argument("train eigenvalues must be sorted non-increasing");
    if (problem.lambda[i] < 0.0)
      throw std::invalid_argument("test eigenvalues must be non-negative");
  }
  if (problem.basis) {
    const Matrix& u = *problem.basis;
    if (u.cols != d) throw std::invalid_argument("basis column count does not match dimension");
    // U^T U = I within tolerance.
    for (int a = 0; a < u.cols; ++a) {
      for (int b = 0; b < u.cols; ++b) {
        double dot = 0.0;
        for (int r = 0; r < u.rows; ++r) dot += u(r, a) * u(r, b);
        const double want = a == b ? 1.0 : 0.0;
        if (std::abs(dot - want) > kBasisOrthoTol)
          throw std::invalid_argument("basis columns are not orthonormal");
      }
    }
  }
}

DiagonalProblem make_problem(Vec gamma, Vec lambda, Vec ground_truth) {
  DiagonalProblem problem;
  problem.gamma = std::move(gamma);
  problem.lambda = std::move(lambda);
  if (ground_truth.empty()) ground_truth.assign(problem.gamma.size(), 0.0);
  problem.ground_truth = std::move(ground_truth);
  problem.source_indices.resize(problem.gamma.size());
  std::iota(problem.source_indices.begin(), problem.source_indices.end(), 0);
  validate_problem(problem);
  return problem;
}

double train_loss(const Vec& delta, const DiagonalProblem& problem) {
  check_dims(delta, problem);
  double sum = 0.0;
  for (int i = 0; i < problem.dim(); ++i) sum += problem.gamma[i] * delta[i] * delta[i];
  return sum;
}

double population_loss(const Vec& delta, const DiagonalProblem& problem) {
  check_dims(delta, problem);
  double sum = 0.0;
  for (int i = 0; i < problem.dim(); ++i) sum += problem.lambda[i] * delta[i] * delta[i];
  return sum;
}

double train_loss(const ResidualState& state, const DiagonalProblem& problem) {
  return train_loss(state.delta, problem);
}

double population_loss(const ResidualState& state, const DiagonalProblem& problem) {
  return population_loss(state.delta, problem);
}

LevelSetExtremes level_set_extremes(double epsilon, const DiagonalProblem& problem) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("level must be positive");
  LevelSetExtremes out;
  double best_ratio = problem.lambda[0] / problem.gamma[0];
  double worst_ratio = best_ratio;
  for (int i = 1; i < problem.dim(); ++i) {
    const double ratio = problem.lambda[i] / problem.gamma[i];
    if (ratio < best_ratio) {
      best_ratio = ratio;
      out.best_index = i;
    }
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      out.worst_index = i;
    }
  }
  out.best = epsilon * best_ratio;
  out.worst = epsilon * worst_ratio;
  return out;
}

Vec empirical_covariance(const Dataset& dataset) {
  if (dataset.samples.empty()) throw std::invalid_argument("dataset is empty");
  if (dataset.dim < 1) throw std::invalid_argument("dataset dimension must be positive");
  Vec diag(dataset.dim, 0.0);
  for (const Sample& s : dataset.samples) {
    if (s.x_index < 0 || s.x_index >= dataset.dim)
      throw std::invalid_argument("sample index out of range");
    diag[s.x_index] += 1.0;
  }
  const double n = static_cast<double>(dataset.size());
  for (double& v : diag) v /= n;
  return diag;
}

BuiltProblem build_problem(const Dataset& dataset, const Vec& beta_star, const Vec& lambda) {
  if (static_cast<int>(beta_star.size()) != dataset.dim ||
      static_cast<int>(lambda.size()) != dataset.dim)
    throw std::invalid_argument("beta_star and lambda must match the dataset dimension");
  for (double l : lambda)
    if (l < 0.0) throw std::invalid_argument("test eigenvalues must be non-negative");

  const Vec cov = empirical_covariance(dataset);

  std::vector<int> order(cov.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cov[a] > cov[b]; });

  DiagonalProblem problem;
  for (int idx : order) {
    if (cov[idx] > 0.0) {
      problem.gamma.push_back(cov[idx]);
      problem.lambda.push_back(lambda[idx]);
      problem.ground_truth.push_back(beta_star[idx]);
      problem.source_indices.push_back(idx);
    } else {
      problem.dropped_indices.push_back(idx);
    }
  }
  std::sort(problem.dropped_indices.begin(), problem.dropped_indices.end());
  if (problem.gamma.empty()) throw std::logic_error("empirical covariance is identically zero");
  validate_problem(problem);

  ResidualState init;
  init.delta.reserve(problem.gamma.size());
  for (double g : problem.ground_truth) init.delta.push_back(-g);
  init.time = 0.0;
  init.phase = Phase::Init;
  return {std::move(problem), std::move(init)};
}

DiagonalProblem from_matrices(const Matrix& sigma_hat, const Matrix& sigma,
                              const Vec& beta_star) {
  const int d = sigma_hat.rows;
  if (sigma_hat.cols != d || sigma.rows != d || sigma.cols != d)
    throw std::invalid_argument("covariance matrices must be square and equally sized");
  if (static_cast<int>(beta_star.size()) != d)
    throw std::invalid_argument("beta_star length does not match matrix size");

  const Eigen::MatrixXd a = to_eigen(sigma_hat);
  const Eigen::MatrixXd b = to_eigen(sigma);
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kBasisOrthoTol * scale ||
      (b - b.transpose()).cwiseAbs().maxCoeff() > kBasisOrthoTol * scale)
    throw std::invalid_argument("covariance matrices must be symmetric");
  if ((a * b - b * a).cwiseAbs().maxCoeff() > kCommuteTol)
    throw InapplicableError("covariance matrices do not commute; no shared eigenbasis exists");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  Eigen::VectorXd gam = solver.eigenvalues();
  Eigen::MatrixXd u = solver.eigenvectors();

  // Rotate within repeated eigenspaces of sigma_hat so sigma is diagonal too.
  const double group_tol = 1e-8 * std::max(1.0, gam.cwiseAbs().maxCoeff());
  int lo = 0;
  while (lo < d) {
    int hi = lo + 1;
    while (hi < d && std::abs(gam(hi) - gam(lo)) <= group_tol) ++hi;
    if (hi - lo > 1) {
      const Eigen::MatrixXd block =
          u.middleCols(lo, hi - lo).transpose() * b * u.middleCols(lo, hi - lo);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub(block);
      u.middleCols(lo, hi - lo) = u.middleCols(lo, hi - lo) * sub.eigenvectors();
    }
    lo = hi;
  }

  const Eigen::MatrixXd b_diag = u.transpose() * b * u;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (r != c && std::abs(b_diag(r, c)) > kCommuteTol * scale)
        throw InapplicableError("matrices could not be jointly diagonalized");

  // Assemble descending by gamma, dropping null directions of sigma_hat.
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return gam(x) > gam(y); });

  const double rank_tol = kRankTol * std::max(1.0, gam.cwiseAbs().maxCoeff());
  DiagonalProblem problem;
  std::vector<double> basis_cols;
  int rank_pos = 0;
  for (int slot = 0; slot < d; ++slot) {
    const int src = order[slot];
    if (gam(src) <= rank_tol) {
      problem.dropped_indices.push_back(slot);
      continue;
    }
    problem.gamma.push_back(gam(src));
    double lam = b_diag(src, src);
    if (lam < 0.0 && lam > -kCommuteTol * scale) lam = 0.0;
    problem.lambda.push_back(lam);
    double gt = 0.0;
    for (int r = 0; r < d; ++r) gt += u(r, src) * beta_star[r];
    problem.ground_truth.push_back(gt);
    problem.source_indices.push_back(slot);
    for (int r = 0; r < d; ++r) basis_cols.push_back(u(r, src));
    ++rank_pos;
  }
  if (problem.gamma.empty())
    throw InapplicableError("train covariance has no positive eigenvalues");

  // basis_cols is column-major; Matrix is row-major.
  Matrix basis(d, rank_pos);
  for (int c = 0; c < rank_pos; ++c)
    for (int r = 0; r < d; ++r) basis(r, c) = basis_cols[static_cast<size_t>(c) * d + r];
  problem.basis = std::move(basis);
  validate_problem(problem);
  return problem;
}

Vec to_param_coords(const DiagonalProblem& problem, const Vec& delta) {
  check_dims(delta, problem);
  if (!problem.basis) {
    Vec beta(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) beta[i] = problem.ground_truth[i] + delta[i];
    return beta;
  }
  const Matrix& u = *problem.basis;
  Vec beta(u.rows, 0.0);
  for (int r = 0; r < u.rows; ++r)
    for (int c = 0; c < u.cols; ++c) beta[r] += u(r, c) * (problem.ground_truth[c] + delta[c]);
  return beta;
}

}  // namespace lrgap
