#include "lrgap/report.hpp"

#include <charconv>
#include <cmath>

namespace lrgap {

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buffer[64];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, res.ptr);
}

namespace {

const char* bool_name(bool v) { return v ? "true" : "false"; }

std::string csv_number(double value) {
  return std::isnan(value) ? std::string() : format_double(value);
}

}  // namespace

ordered_json to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["alpha"] = config.alpha;
  j["epsilon"] = config.epsilon;
  j["K"] = config.K;
  j["n"] = config.n;
  j["dim"] = config.dim;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  return j;
}

ordered_json to_json(const LemmaReport& report) {
  ordered_json j;
  j["k"] = report.setup.first_small + 1;  // 1-based, as in instance files
  j["p"] = report.setup.p;
  j["alpha"] = report.setup.alpha;
  j["epsilon"] = report.setup.epsilon;
  j["j_star"] = report.setup.j_star + 1;
  j["eta"] = report.eta;
  j["condition1"] = report.condition1;
  j["condition1_value"] = report.condition1_value;
  j["condition2"] = report.condition2;
  j["condition2_lhs"] = report.condition2_lhs;
  j["gf_lower_bound"] = report.gf_lower;
  j["agd_upper_bound"] = report.agd_upper;
  j["decay_constant"] = report.decay_constant;
  j["stop_time_lower_bound"] = report.stop_time_lower;
  j["realized_gf_loss"] = report.realized_gf_loss;
  j["realized_agd_loss"] = report.realized_agd_loss;
  j["gf_stop_time"] = report.gf_stop_time;
  j["agd_flow_stop_time"] = report.agd_flow_stop_time;
  j["agd_steps_taken"] = report.agd_steps_taken;
  j["gf_bound_holds"] = report.gf_bound_holds;
  j["agd_bound_holds"] = report.agd_bound_holds;
  j["stop_time_bound_holds"] = report.stop_time_bound_holds;
  return j;
}

ordered_json to_json(const MCSummary& summary) {
  ordered_json j;
  j["trials"] = summary.trials;
  j["duplicated_count"] = summary.duplicated_count;
  j["degenerate_count"] = summary.degenerate_count;
  j["duplicated_fraction"] = summary.duplicated_fraction;
  j["mean_ratio_duplicated"] = summary.mean_ratio_duplicated;
  j["min_ratio_duplicated"] = summary.min_ratio_duplicated;
  j["degenerate_loss_equal_fraction"] = summary.degenerate_loss_equal_fraction;
  j["conditions_pass"] = summary.conditions_pass;
  j["gf_bound_pass"] = summary.gf_bound_pass;
  j["agd_bound_pass"] = summary.agd_bound_pass;
  j["stop_time_bound_pass"] = summary.stop_time_bound_pass;
  return j;
}

std::string trial_csv_header() {
  return "trial,kind,count_e1,count_e2,gf_loss,agd_loss,ratio,gf_stop_time,agd_flow_stop_time,"
         "condition1,condition2,gf_lower_bound,agd_upper_bound,decay_constant,"
         "stop_time_lower_bound,gf_bound_holds,agd_bound_holds,stop_time_bound_holds";
}

std::string trial_csv_row(int index, const TrialResult& result) {
  std::string row = std::to_string(index);
  row += ',';
  row += trial_case_name(result.kind);
  for (int count : result.counts) {
    row += ',';
    row += std::to_string(count);
  }
  row += ',' + format_double(result.gf_loss);
  row += ',' + format_double(result.agd_loss);
  row += ',' + csv_number(result.ratio);
  row += ',' + format_double(result.gf_stop_time);
  row += ',' + format_double(result.agd_flow_stop_time);
  if (result.report) {
    const LemmaReport& r = *result.report;
    row += ',';
    row += bool_name(r.condition1);
    row += ',';
    row += bool_name(r.condition2);
    row += ',' + format_double(r.gf_lower);
    row += ',' + format_double(r.agd_upper);
    row += ',' + format_double(r.decay_constant);
    row += ',' + format_double(r.stop_time_lower);
    row += ',';
    row += bool_name(r.gf_bound_holds);
    row += ',';
    row += bool_name(r.agd_bound_holds);
    row += ',';
    row += bool_name(r.stop_time_bound_holds);
  } else {
    row += ",,,,,,,,,";
  }
  return row;
}

std::string trajectory_csv(const Trajectory& trajectory, int dim) {
  std::string out = "phase,time";
  for (int i = 1; i <= dim; ++i) out += ",delta_" + std::to_string(i);
  out += ",train_loss,test_loss\n";
  for (const TrajectoryPoint& point : trajectory) {
    out += phase_name(point.phase);
    out += ',' + format_double(point.time);
    for (double d : point.delta) out += ',' + format_double(d);
    out += ',' + format_double(point.train);
    out += ',' + format_double(point.population);
    out += '\n';
  }
  return out;
}

}  // namespace lrgap
