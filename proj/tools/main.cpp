#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lrgap/cli.hpp"
#include "lrgap/version.hpp"

namespace {

using lrgap::ExperimentConfig;
using nlohmann::json;

/// Fills config values from a flat JSON file for every flag the user did
/// not pass explicitly; flags win over file values, file values over
/// defaults.
void merge_config_file(const CLI::App* cmd, const std::string& path, ExperimentConfig& config,
                       std::string& out_dir) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path + " is not valid JSON: " + e.what());
  }
  const auto unset = [&](const std::string& flag) { return cmd->count(flag) == 0; };
  try {
    if (j.contains("alpha") && unset("--alpha")) config.alpha = j["alpha"].get<double>();
    if (j.contains("epsilon") && unset("--epsilon")) config.epsilon = j["epsilon"].get<double>();
    if (j.contains("K") && unset("--K")) config.K = j["K"].get<int>();
    if (j.contains("n") && unset("--n")) config.n = j["n"].get<int>();
    if (j.contains("seed") && unset("--seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("trials") && unset("--trials")) config.trials = j["trials"].get<int>();
    if (j.contains("out") && unset("--out")) out_dir = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

struct ClaimFlags {
  ExperimentConfig config;
  std::string out_dir = ".";
  std::string config_path;
  std::string format = "all";
};

void add_claim_flags(CLI::App* cmd, ClaimFlags& flags) {
  cmd->add_option("--alpha", flags.config.alpha, "Scale parameter in (0,1)");
  cmd->add_option("--epsilon", flags.config.epsilon, "Early-stopping train loss in (0,1)");
  cmd->add_option("--K", flags.config.K, "Large-step descent steps before the flow stage");
  cmd->add_option("--n", flags.config.n, "Samples per trial");
  cmd->add_option("--seed", flags.config.seed, "Base seed for the per-trial streams");
  cmd->add_option("--trials", flags.config.trials, "Number of Monte Carlo trials");
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--config", flags.config_path, "JSON config file with the same keys as flags");
  cmd->add_option("--format", flags.format, "Restrict outputs: all, csv or json")
      ->check(CLI::IsMember({"all", "csv", "json"}));
}

void add_override_flags(CLI::App* cmd, lrgap::cli::InstanceOverrides& overrides) {
  cmd->add_option("--alpha", overrides.alpha, "Override the instance alpha");
  cmd->add_option("--epsilon", overrides.epsilon, "Override the instance epsilon");
  cmd->add_option("--eta", overrides.eta, "Override the large step size (default 1/gamma_1)");
  cmd->add_option("--K", overrides.K, "Override the large-step count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedule-dependent generalization on diagonal quadratic losses"};
  app.set_version_flag("--version", lrgap::kVersion);
  app.require_subcommand(1);

  ClaimFlags claim_flags;
  CLI::App* claim = app.add_subcommand(
      "claim", "Monte Carlo over sampled datasets, checked against the analytic bounds");
  add_claim_flags(claim, claim_flags);

  ClaimFlags mc_flags;
  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "Monte Carlo reporting only, no pass/fail checks");
  add_claim_flags(montecarlo, mc_flags);

  lrgap::cli::LemmaOptions lemma_options;
  CLI::App* lemma = app.add_subcommand(
      "lemma", "Verify the flow / annealed-descent population loss bounds on one instance");
  lemma->add_option("instance", lemma_options.instance_path, "Instance JSON file")->required();
  lemma->add_option("--out", lemma_options.out_dir, "Output directory");
  lemma->add_option("--snapshots", lemma_options.snapshots, "Trajectory points per phase")
      ->check(CLI::Range(2, 1 << 20));
  // No --eta here: the verified bounds fix the annealing rate at 1/gamma_1.
  lemma->add_option("--alpha", lemma_options.overrides.alpha, "Override the instance alpha");
  lemma->add_option("--epsilon", lemma_options.overrides.epsilon,
                    "Override the instance epsilon");
  lemma->add_option("--K", lemma_options.overrides.K, "Override the large-step count");

  lrgap::cli::TrajectoryOptions traj_options;
  CLI::App* trajectory =
      app.add_subcommand("trajectory", "Record one optimizer path as CSV");
  trajectory->add_option("instance", traj_options.instance_path, "Instance JSON file")
      ->required();
  trajectory->add_option("--optimizer", traj_options.optimizer, "gf, anneal or euler")
      ->check(CLI::IsMember({"gf", "anneal", "euler"}));
  trajectory->add_option("--snapshots", traj_options.snapshots, "Trajectory points per phase")
      ->check(CLI::Range(2, 1 << 20));
  trajectory->add_option("--out", traj_options.out_dir, "Output directory");
  trajectory->add_option("--step", traj_options.euler_step, "Euler oracle step size");
  add_override_flags(trajectory, traj_options.overrides);

  lrgap::cli::LandscapeOptions land_options;
  CLI::App* landscape = app.add_subcommand(
      "landscape", "Loss grid and level-set figure with both optimizer paths (2-D only)");
  landscape->add_option("instance", land_options.instance_path, "Instance JSON file")
      ->required();
  landscape->add_option("--out", land_options.out_dir, "Output directory");
  landscape->add_option("--grid-n", land_options.grid_n, "Grid points per axis")
      ->check(CLI::Range(2, 4096));
  landscape->add_option("--box-half", land_options.box_half,
                        "Half-width of the box around the optimum (0 = auto)");
  landscape->add_option("--snapshots", land_options.snapshots, "Trajectory points per phase")
      ->check(CLI::Range(2, 1 << 20));
  landscape->add_option("--format", land_options.format, "Restrict outputs: all, csv or svg")
      ->check(CLI::IsMember({"all", "csv", "svg"}));
  add_override_flags(landscape, land_options.overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? lrgap::cli::kExitOk : lrgap::cli::kExitUsage;
  }

  try {
    if (claim->parsed() || montecarlo->parsed()) {
      const bool enforce = claim->parsed();
      ClaimFlags& flags = enforce ? claim_flags : mc_flags;
      CLI::App* cmd = enforce ? claim : montecarlo;
      if (!flags.config_path.empty())
        merge_config_file(cmd, flags.config_path, flags.config, flags.out_dir);
      lrgap::cli::ClaimOptions options;
      options.config = flags.config;
      options.out_dir = flags.out_dir;
      options.enforce = enforce;
      options.command_name = enforce ? "claim" : "montecarlo";
      options.format = flags.format;
      return lrgap::cli::cmd_claim(options);
    }
    if (lemma->parsed()) return lrgap::cli::cmd_lemma(lemma_options);
    if (trajectory->parsed()) return lrgap::cli::cmd_trajectory(traj_options);
    if (landscape->parsed()) return lrgap::cli::cmd_landscape(land_options);
  } catch (const lrgap::InapplicableError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return lrgap::cli::kExitInapplicable;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lrgap::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lrgap::cli::kExitUsage;
  }
  return lrgap::cli::kExitUsage;
}
