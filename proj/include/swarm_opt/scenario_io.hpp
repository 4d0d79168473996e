#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "swarm_opt/engine.hpp"

namespace swarm {

inline constexpr const char* kFormatVersion = "1";

struct OutputPaths {
  std::string trajectory_csv = "trajectory.csv";
  std::string metrics_csv = "metrics.csv";
  std::string summary_json = "summary.json";
  std::optional<std::string> plots_dir = "plots";

  bool operator==(const OutputPaths&) const = default;
};

struct ScenarioFile {
  Scenario scenario;
  OutputPaths outputs;
  std::optional<std::int64_t> seed;
};

nlohmann::json region_to_json(const ConvexRegion& region);
ConvexRegion region_from_json(const nlohmann::json& j, const std::string& where = "region");
nlohmann::json velocity_set_to_json(const VelocitySet& set);
VelocitySet velocity_set_from_json(const nlohmann::json& j, const std::string& where = "velocity_set");
nlohmann::json objective_to_json(const Objective& f);
Objective objective_from_json(const nlohmann::json& j, const std::string& where = "objective");
nlohmann::json schedule_to_json(const GraphSchedule& s);
GraphSchedule schedule_from_json(const nlohmann::json& j, std::int64_t seed, const std::string& where = "schedule");

nlohmann::json scenario_file_to_json(const ScenarioFile& file);

/// Parses without running the assumption checks. Syntax errors carry
/// "origin:line:column"; structural errors name the offending key path.
ScenarioFile parse_scenario_file(const std::string& text, const std::string& origin = "<input>");

/// Reads, parses and validates; every violated assumption is listed in the
/// ValidationError message.
ScenarioFile load_scenario_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

std::string dump_scenario_file(const ScenarioFile& file);
void save_scenario_file(const ScenarioFile& file, const std::filesystem::path& path);

/// Field-by-field equality of two scenarios (objectives and sets included).
bool same_scenario(const Scenario& a, const Scenario& b);

}  // namespace swarm
