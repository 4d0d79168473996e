#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "swarm_opt/diagnostics.hpp"

namespace swarm {

/// Shortest text with 17 significant digits; round-trips exactly.
std::string format_double(double x);

/// Columns: k, agent, r_1..r_m, v_1..v_m, y, p, sigma, b, theta_branch,
/// theta_1..theta_m. The final state rows leave the step columns empty.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Rebuilds a trajectory from its CSV; pi, q and w are recomputed from the
/// logged states and the scenario. Throws ValidationError naming the line on
/// malformed input.
Trajectory read_trajectory_csv(std::istream& in, const Scenario& sc);

/// Columns: k, consensus_spread, optimality_gap, y_ratio_spread,
/// state_envelope, psi_row_sum_err, psi_min_entry.
void write_metrics_csv(const MetricsSeries& metrics, const StochasticityReport& stoch, std::ostream& out);

struct RunSummary {
  std::string scenario;
  std::string algorithm;
  double final_consensus_spread = 0.0;
  double final_optimality_gap = 0.0;
  double final_y_ratio_spread = 0.0;
  double max_state_envelope = 0.0;
  double psi_max_row_sum_err = 0.0;
  std::optional<double> replay_max_residual;  // Algorithm A only
  long steps = 0;
  double wall_time = 0.0;
  Vec optimum;
  Vec final_mean_r;
  double min_sigma = 1.0;
  long eta_steps = 0;
};

nlohmann::json summary_to_json(const RunSummary& s);

/// One polyline chart; values are drawn on a log10 axis when `log_scale`.
std::string svg_line_plot(const std::string& title, const std::vector<double>& values, bool log_scale);

/// Writes consensus_spread.svg, optimality_gap.svg, y_ratio_spread.svg and
/// state_envelope.svg.
void write_plots(const MetricsSeries& metrics, const std::filesystem::path& dir);

}  // namespace swarm
