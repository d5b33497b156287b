#include "lrgap/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "lrgap/svg.hpp"
#include "lrgap/version.hpp"

namespace lrgap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

/// The manifest is run metadata, written after every output it lists; its
/// duration field is the one value allowed to differ between repeat runs.
void write_manifest(const fs::path& dir, const std::string& command,
                    const ordered_json& config, const std::optional<std::uint64_t>& seed,
                    const std::vector<std::string>& outputs, double duration_seconds) {
  ordered_json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  if (seed)
    manifest["seed"] = *seed;
  else
    manifest["seed"] = nullptr;
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  manifest["duration_seconds"] = duration_seconds;
  write_file(dir / (command + "_manifest.json"), manifest.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir.empty() ? "." : out_dir);
  fs::create_directories(dir);
  return dir;
}

Vec vec_from(const json& j, const char* key) {
  if (!j.at(key).is_array()) throw std::invalid_argument(std::string(key) + " must be an array");
  return j.at(key).get<Vec>();
}

}  // namespace

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("instance file " + path + " is not valid JSON: " + e.what());
  }
  Instance instance;
  try {
    instance.gamma = vec_from(j, "gamma");
    instance.lambda = vec_from(j, "lambda");
    instance.delta0 = vec_from(j, "delta0");
    if (j.contains("k")) instance.k = j.at("k").get<int>();
    if (j.contains("alpha")) instance.alpha = j.at("alpha").get<double>();
    if (j.contains("epsilon")) instance.epsilon = j.at("epsilon").get<double>();
    if (j.contains("K")) instance.K = j.at("K").get<int>();
    if (j.contains("beta_star")) instance.beta_star = vec_from(j, "beta_star");
    if (j.contains("eta")) instance.eta = j.at("eta").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("instance file " + path + ": " + e.what());
  }
  if (instance.gamma.size() != instance.lambda.size() ||
      instance.gamma.size() != instance.delta0.size())
    throw std::invalid_argument("instance vectors gamma, lambda, delta0 must share one length");
  if (instance.beta_star && instance.beta_star->size() != instance.gamma.size())
    throw std::invalid_argument("beta_star length must match gamma");
  return instance;
}

void apply_overrides(Instance& instance, const InstanceOverrides& overrides) {
  if (overrides.alpha) instance.alpha = *overrides.alpha;
  if (overrides.epsilon) instance.epsilon = *overrides.epsilon;
  if (overrides.eta) instance.eta = *overrides.eta;
  if (overrides.K) instance.K = *overrides.K;
}

namespace {

DiagonalProblem problem_from(const Instance& instance) {
  Vec ground_truth =
      instance.beta_star ? *instance.beta_star : Vec(instance.gamma.size(), 0.0);
  return make_problem(instance.gamma, instance.lambda, std::move(ground_truth));
}

ordered_json instance_json(const Instance& instance) {
  ordered_json j;
  j["gamma"] = instance.gamma;
  j["lambda"] = instance.lambda;
  j["delta0"] = instance.delta0;
  if (instance.k) j["k"] = *instance.k;
  j["alpha"] = instance.alpha;
  j["epsilon"] = instance.epsilon;
  j["K"] = instance.K;
  if (instance.beta_star) j["beta_star"] = *instance.beta_star;
  if (instance.eta) j["eta"] = *instance.eta;
  return j;
}

}  // namespace

int cmd_claim(const ClaimOptions& options) {
  Stopwatch timer;
  validate_config(options.config);
  const fs::path dir = ensure_out_dir(options.out_dir);
  const std::string& name = options.command_name;

  std::string csv = trial_csv_header() + "\n";
  const MCSummary summary = monte_carlo(options.config, [&](int index, const TrialResult& trial) {
    csv += trial_csv_row(index, trial) + "\n";
  });

  // 3-sigma binomial band around the exact duplicated-x probability 3/4.
  const double sigma = std::sqrt(0.75 * 0.25 / options.config.trials);
  const double band_lo = std::max(0.0, 0.75 - 3.0 * sigma);
  const double band_hi = std::min(1.0, 0.75 + 3.0 * sigma);
  const bool fraction_ok =
      summary.duplicated_fraction >= band_lo && summary.duplicated_fraction <= band_hi;
  const double ratio_floor = 2.0 * (1.0 - options.config.alpha) * (1.0 - 1e-6);
  const bool ratio_ok =
      summary.duplicated_count == 0 || summary.min_ratio_duplicated >= ratio_floor;
  const bool degenerate_ok = summary.degenerate_loss_equal_fraction == 1.0;
  const bool bounds_ok = summary.gf_bound_pass == summary.duplicated_count &&
                         summary.agd_bound_pass == summary.duplicated_count &&
                         summary.stop_time_bound_pass == summary.duplicated_count &&
                         summary.conditions_pass == summary.duplicated_count;
  const bool all_ok = fraction_ok && ratio_ok && degenerate_ok && bounds_ok;

  ordered_json doc;
  doc["command"] = name;
  doc["config"] = to_json(options.config);
  doc["summary"] = to_json(summary);
  if (options.enforce) {
    ordered_json checks;
    checks["duplicated_fraction_band"] = ordered_json{
        {"lo", band_lo}, {"hi", band_hi}, {"value", summary.duplicated_fraction},
        {"pass", fraction_ok}};
    checks["min_ratio"] = ordered_json{
        {"floor", ratio_floor}, {"value", summary.min_ratio_duplicated}, {"pass", ratio_ok}};
    checks["degenerate_losses_equal"] = ordered_json{
        {"value", summary.degenerate_loss_equal_fraction}, {"pass", degenerate_ok}};
    checks["all_bounds_hold"] = ordered_json{{"pass", bounds_ok}};
    checks["pass"] = all_ok;
    doc["assertions"] = checks;
  }

  std::vector<std::string> outputs;
  const std::string csv_name = name + "_trials.csv";
  const std::string json_name = name + "_summary.json";
  if (options.format == "all" || options.format == "csv") {
    write_file(dir / csv_name, csv);
    outputs.push_back(csv_name);
  }
  if (options.format == "all" || options.format == "json") {
    write_file(dir / json_name, doc.dump(2) + "\n");
    outputs.push_back(json_name);
  }
  ordered_json manifest_config = to_json(options.config);
  manifest_config["out"] = options.out_dir;
  manifest_config["format"] = options.format;
  write_manifest(dir, name, manifest_config, options.config.seed, outputs, timer.seconds());
  return options.enforce && !all_ok ? kExitAssertion : kExitOk;
}

int cmd_lemma(const LemmaOptions& options) {
  Stopwatch timer;
  Instance instance = load_instance(options.instance_path);
  apply_overrides(instance, options.overrides);
  const fs::path dir = ensure_out_dir(options.out_dir);
  if (!instance.k)
    throw std::invalid_argument("instance file must supply k (first index of the small set)");

  const DiagonalProblem problem = problem_from(instance);
  ordered_json doc;
  doc["command"] = "lemma";
  doc["instance"] = instance_json(instance);

  int exit_code = kExitOk;
  try {
    const LemmaSetup setup = make_lemma_setup(instance.delta0, problem, *instance.k - 1,
                                              instance.alpha, instance.epsilon);
    const LemmaReport report =
        verify_lemma(instance.delta0, problem, setup, instance.K, options.snapshots);
    doc["report"] = to_json(report);
    if (!report.conditions_hold()) {
      doc["status"] = "SKIPPED";
      exit_code = kExitInapplicable;
    } else if (report.bounds_hold()) {
      doc["status"] = "PASS";
    } else {
      doc["status"] = "FAIL";
      exit_code = kExitAssertion;
    }
  } catch (const InapplicableError& e) {
    doc["status"] = "INAPPLICABLE";
    doc["reason"] = e.what();
    exit_code = kExitInapplicable;
  }

  write_file(dir / "lemma_report.json", doc.dump(2) + "\n");
  ordered_json manifest_config = instance_json(instance);
  manifest_config["snapshots"] = options.snapshots;
  manifest_config["out"] = options.out_dir;
  write_manifest(dir, "lemma", manifest_config, std::nullopt, {"lemma_report.json"},
                 timer.seconds());
  return exit_code;
}

int cmd_trajectory(const TrajectoryOptions& options) {
  Stopwatch timer;
  Instance instance = load_instance(options.instance_path);
  apply_overrides(instance, options.overrides);
  const fs::path dir = ensure_out_dir(options.out_dir);
  const DiagonalProblem problem = problem_from(instance);

  Trajectory trajectory;
  if (options.optimizer == "gf") {
    trajectory =
        gradient_flow(instance.delta0, problem, instance.epsilon, options.snapshots).trajectory;
  } else if (options.optimizer == "anneal") {
    const double eta = instance.eta ? *instance.eta : anneal_rate(problem);
    trajectory = annealed_gd(instance.delta0, problem, eta, instance.K, instance.epsilon,
                             options.snapshots)
                     .trajectory;
  } else if (options.optimizer == "euler") {
    trajectory = euler_flow(instance.delta0, problem, options.euler_step, instance.epsilon,
                            options.snapshots)
                     .trajectory;
  } else {
    throw std::invalid_argument("optimizer must be one of gf, anneal, euler");
  }

  const std::string file_name = "trajectory_" + options.optimizer + ".csv";
  write_file(dir / file_name, trajectory_csv(trajectory, problem.dim()));
  ordered_json config = instance_json(instance);
  config["optimizer"] = options.optimizer;
  config["snapshots"] = options.snapshots;
  if (options.optimizer == "euler") config["euler_step"] = options.euler_step;
  config["out"] = options.out_dir;
  write_manifest(dir, "trajectory", config, std::nullopt, {file_name}, timer.seconds());
  return kExitOk;
}

namespace {

struct PanelMap {
  double offset_x = 0.0;
  double center1 = 0.0, center2 = 0.0;
  double half = 1.0;
  static constexpr double kSize = 600.0;

  double sx(double b1) const { return offset_x + (b1 - (center1 - half)) / (2.0 * half) * kSize; }
  double sy(double b2) const { return kSize - (b2 - (center2 - half)) / (2.0 * half) * kSize; }
  double scale() const { return kSize / (2.0 * half); }
};

std::vector<std::pair<double, double>> path_points(const Trajectory& trajectory,
                                                   const DiagonalProblem& problem,
                                                   const PanelMap& map) {
  std::vector<std::pair<double, double>> points;
  points.reserve(trajectory.size());
  for (const TrajectoryPoint& point : trajectory) {
    const Vec beta = to_param_coords(problem, point.delta);
    points.emplace_back(map.sx(beta[0]), map.sy(beta[1]));
  }
  return points;
}

void draw_level_sets(svg::Document& doc, const PanelMap& map, const Vec& eigenvalues,
                     const Vec& center, double epsilon, double max_level) {
  // Geometric ladder of levels upward from the highlighted epsilon curve.
  for (double level = epsilon; level <= max_level; level *= 4.0) {
    const bool is_eps = level == epsilon;
    doc.ellipse(map.sx(center[0]), map.sy(center[1]),
                std::sqrt(level / eigenvalues[0]) * map.scale(),
                std::sqrt(level / eigenvalues[1]) * map.scale(),
                is_eps ? "#d62728" : "#bbbbbb", is_eps ? 2.0 : 1.0);
  }
}

}  // namespace

int cmd_landscape(const LandscapeOptions& options) {
  Stopwatch timer;
  Instance instance = load_instance(options.instance_path);
  apply_overrides(instance, options.overrides);
  if (instance.gamma.size() != 2)
    throw std::invalid_argument("landscape rendering requires a 2-D instance");
  if (options.grid_n < 2) throw std::invalid_argument("grid size must be at least 2");
  const fs::path dir = ensure_out_dir(options.out_dir);
  const DiagonalProblem problem = problem_from(instance);

  const GFResult gf =
      gradient_flow(instance.delta0, problem, instance.epsilon, options.snapshots);
  const double eta = instance.eta ? *instance.eta : anneal_rate(problem);
  const AnnealedResult agd = annealed_gd(instance.delta0, problem, eta, instance.K,
                                         instance.epsilon, options.snapshots);

  double half = options.box_half;
  if (half <= 0.0) {
    double spread = 0.0;
    for (double d : instance.delta0) spread = std::max(spread, std::abs(d));
    const double eps_axis = std::sqrt(instance.epsilon / problem.gamma[problem.dim() - 1]);
    half = std::max({1.25 * spread, 1.5 * eps_axis, 1e-6});
  }
  const Vec center = to_param_coords(problem, Vec(2, 0.0));

  // Loss grid over the box, beta1 outer and beta2 inner, both ascending.
  std::string grid = "beta1,beta2,train_loss,test_loss\n";
  for (int i = 0; i < options.grid_n; ++i) {
    const double b1 = center[0] - half + 2.0 * half * i / (options.grid_n - 1);
    for (int j = 0; j < options.grid_n; ++j) {
      const double b2 = center[1] - half + 2.0 * half * j / (options.grid_n - 1);
      const Vec delta = {b1 - problem.ground_truth[0], b2 - problem.ground_truth[1]};
      grid += format_double(b1) + ',' + format_double(b2) + ',' +
              format_double(train_loss(delta, problem)) + ',' +
              format_double(population_loss(delta, problem)) + '\n';
    }
  }

  // Three panels: train landscape with the flow path, train landscape with
  // the annealed path, test landscape with both endpoints.
  svg::Document doc(1800, 600);
  doc.rect(0, 0, 1800, 600, "#ffffff");
  const double corner1 = half * half * (problem.gamma[0] + problem.gamma[1]);
  const double corner2 = half * half * (problem.lambda[0] + problem.lambda[1]);
  const char* titles[3] = {"train loss, small-step flow", "train loss, annealed descent",
                           "test loss"};
  for (int panel = 0; panel < 3; ++panel) {
    PanelMap map{panel * 600.0, center[0], center[1], half};
    doc.open_clip_group("panel" + std::to_string(panel), map.offset_x, 0, 600, 600);
    const bool train_panel = panel < 2;
    draw_level_sets(doc, map, train_panel ? problem.gamma : problem.lambda, center,
                    instance.epsilon, train_panel ? corner1 : corner2);
    if (panel == 0) {
      doc.polyline(path_points(gf.trajectory, problem, map), "#1f77b4", 2.0);
    } else if (panel == 1) {
      doc.polyline(path_points(agd.trajectory, problem, map), "#2ca02c", 2.0);
    }
    const Vec gf_end = to_param_coords(problem, gf.final.delta);
    const Vec agd_end = to_param_coords(problem, agd.gf.final.delta);
    if (panel != 1) doc.circle(map.sx(gf_end[0]), map.sy(gf_end[1]), 4.0, "#1f77b4");
    if (panel != 0) doc.circle(map.sx(agd_end[0]), map.sy(agd_end[1]), 4.0, "#2ca02c");
    doc.close_group();
    doc.text(map.offset_x + 12.0, 20.0, titles[panel], 14);
    if (panel > 0) doc.line(map.offset_x, 0, map.offset_x, 600, "#444444", 1.0);
  }

  std::vector<std::string> outputs;
  if (options.format == "all" || options.format == "csv") {
    write_file(dir / "landscape_grid.csv", grid);
    outputs.push_back("landscape_grid.csv");
  }
  if (options.format == "all" || options.format == "svg") {
    write_file(dir / "landscape.svg", doc.str());
    outputs.push_back("landscape.svg");
  }
  ordered_json config = instance_json(instance);
  config["grid_n"] = options.grid_n;
  config["box_half"] = half;
  config["snapshots"] = options.snapshots;
  config["out"] = options.out_dir;
  config["format"] = options.format;
  write_manifest(dir, "landscape", config, std::nullopt, outputs, timer.seconds());
  return kExitOk;
}

}  // namespace lrgap::cli
