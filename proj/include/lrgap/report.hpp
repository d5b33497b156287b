#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "lrgap/experiment.hpp"

namespace lrgap {

using ordered_json = nlohmann::ordered_json;

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

ordered_json to_json(const ExperimentConfig& config);
ordered_json to_json(const LemmaReport& report);
ordered_json to_json(const MCSummary& summary);

std::string trial_csv_header();
std::string trial_csv_row(int index, const TrialResult& result);

/// Columns: phase,time,delta_1,...,delta_d,train_loss,test_loss.
std::string trajectory_csv(const Trajectory& trajectory, int dim);

}  // namespace lrgap
