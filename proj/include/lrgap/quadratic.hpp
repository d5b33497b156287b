#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrgap {

using Vec = std::vector<double>;

/// Thrown when an instance falls outside the model the analysis covers
/// (no eigenvalue gap, zero small-set residual mass, non-commuting
/// covariances).  Callers typically report these as "inapplicable" rather
/// than as failures.
struct InapplicableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Phase { Init, GD, GF };

const char* phase_name(Phase phase);

/// Dense row-major matrix, only used for basis metadata and the
/// general-matrix constructor.  Problems themselves stay diagonal.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

/// A train/test quadratic pair sharing one eigenbasis.
///
/// The train loss is sum_i gamma_i * delta_i^2 and the test (population)
/// loss is sum_i lambda_i * delta_i^2, where delta are residual coordinates
/// in the shared basis.  Invariants established at construction:
///   - gamma is sorted non-increasing and strictly positive (rank-deficient
///     directions are removed, their original indices recorded),
///   - lambda is non-negative and the same length,
///   - basis, when present, has orthonormal columns (each column maps one
///     eigen-coordinate into parameter space).
struct DiagonalProblem {
  Vec gamma;
  Vec lambda;
  Vec ground_truth;                  // optimum in eigen coordinates
  std::optional<Matrix> basis;       // absent means identity
  std::vector<int> source_indices;   // original coordinate behind each slot
  std::vector<int> dropped_indices;  // coordinates removed at construction

  int dim() const { return static_cast<int>(gamma.size()); }
};

/// Residual coordinates delta = U^T(beta - beta*) at one moment of a run.
/// `time` is continuous flow time in the GF phase and a step count in GD.
struct ResidualState {
  Vec delta;
  double time = 0.0;
  Phase phase = Phase::Init;
};

/// One draw (x, y) where x is a standard basis vector, stored by index.
struct Sample {
  int x_index = 0;
  double y = 0.0;
};

struct Dataset {
  int dim = 0;
  std::vector<Sample> samples;

  int size() const { return static_cast<int>(samples.size()); }
};

/// Extremes of the test loss over one train-loss level set.
struct LevelSetExtremes {
  double best = 0.0;
  double worst = 0.0;
  int best_index = 0;   // eigen coordinate attaining the minimum (0-based)
  int worst_index = 0;  // eigen coordinate attaining the maximum (0-based)
};

/// Builds a problem directly from eigenvalue vectors.  `gamma` must already
/// be sorted non-increasing and strictly positive; throws otherwise.
DiagonalProblem make_problem(Vec gamma, Vec lambda, Vec ground_truth = {});

/// Checks every construction invariant; throws std::invalid_argument on the
/// first violation.  Factories call this, tests may too.
void validate_problem(const DiagonalProblem& problem);

double train_loss(const Vec& delta, const DiagonalProblem& problem);
double population_loss(const Vec& delta, const DiagonalProblem& problem);
double train_loss(const ResidualState& state, const DiagonalProblem& problem);
double population_loss(const ResidualState& state, const DiagonalProblem& problem);

/// Best and worst test loss over { delta : train_loss(delta) = epsilon }:
/// epsilon * min_i(lambda_i/gamma_i) and epsilon * max_i(lambda_i/gamma_i).
/// Ties resolve to the lowest index.
LevelSetExtremes level_set_extremes(double epsilon, const DiagonalProblem& problem);

/// Diagonal of the sample second-moment matrix: entry j is the fraction of
/// samples with x = e_j.  Entries sum to 1.
Vec empirical_covariance(const Dataset& dataset);

struct BuiltProblem {
  DiagonalProblem problem;
  ResidualState init;  // residual of the zero initialization: -beta*
};

/// Constructs the diagonal problem a dataset induces: gamma from the sample
/// counts, zero-count directions dropped, coordinates permuted so gamma is
/// non-increasing, lambda and beta* carried along.  The returned state is
/// the residual of beta = 0.
BuiltProblem build_problem(const Dataset& dataset, const Vec& beta_star, const Vec& lambda);

/// Joint diagonalization of two symmetric matrices that commute within
/// max-norm 1e-8 (throws InapplicableError otherwise).  Directions that are
/// null for `sigma_hat` are dropped; the returned basis holds the retained
/// eigenvectors as columns and ground_truth is beta* in eigen coordinates.
DiagonalProblem from_matrices(const Matrix& sigma_hat, const Matrix& sigma, const Vec& beta_star);

/// Parameter-space point of a residual: beta = U (ground_truth + delta),
/// identity basis when absent.
Vec to_param_coords(const DiagonalProblem& problem, const Vec& delta);

}  // namespace lrgap
