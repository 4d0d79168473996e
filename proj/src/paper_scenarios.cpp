#include "swarm_opt/paper_scenarios.hpp"

#include <cmath>
#include <numbers>

namespace swarm {
namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

WeightedDigraph matching(std::initializer_list<std::pair<int, int>> pairs) {
  std::vector<Edge> edges;
  for (const auto& [a, b] : pairs) {
    edges.push_back({a - 1, b - 1, 0.5});
    edges.push_back({b - 1, a - 1, 0.5});
  }
  return WeightedDigraph(8, std::move(edges));
}

Scenario paper_base(const char* name, Algorithm algorithm) {
  Scenario sc;
  sc.name = name;
  sc.n = 8;
  sc.m = 2;
  sc.T = 0.2;
  sc.horizon = 50'000;
  sc.algorithm = algorithm;
  sc.schedule = paper_schedule();
  const auto objectives = paper_objectives();
  const VelocitySet vset = paper_velocity_set();
  for (int i = 0; i < sc.n; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / sc.n;
    sc.agents.push_back(AgentSpec{objectives[i], vset, std::nullopt,
                                  AgentState{v2(2.0 * std::cos(angle), 2.0 * std::sin(angle)), Vec::Zero(2), kPaperInitialY, 1.5}});
  }
  return sc;
}

}  // namespace

VelocitySet paper_velocity_set() {
  return VelocitySet({ConvexRegion::ball(Vec::Zero(2), 1.0), ConvexRegion::box(v2(-0.5, 0.0), v2(0.5, 1.5))});
}

std::vector<Objective> paper_objectives() {
  const Vec ones = Vec::Ones(2);
  return {
      Objective::quadratic(v2(1, 1), ones), Objective::quadratic(v2(0, 0), ones),
      Objective::quartic(v2(1, 1), ones),   Objective::quartic(v2(0, 0), ones),
      Objective::quadratic(v2(1, 0), ones), Objective::quadratic(v2(0, 1), ones),
      Objective::quartic(v2(1, 0), ones),   Objective::quartic(v2(0, 1), ones),
  };
}

GraphSchedule paper_schedule() {
  return GraphSchedule({
      {10, matching({{1, 2}, {5, 6}})},
      {10, matching({{2, 3}, {6, 7}})},
      {10, matching({{3, 4}, {7, 8}})},
      {10, matching({{4, 5}})},
      {10, matching({{8, 1}})},
  });
}

Scenario scenario_paper_A() { return paper_base("paper_A", Algorithm::A); }

Scenario scenario_paper_B() {
  Scenario sc = paper_base("paper_B", Algorithm::B);
  const ConvexRegion h1 = ConvexRegion::ball(Vec::Zero(2), 1.0);
  const ConvexRegion h2 = ConvexRegion::box(v2(-6.5, -3.0), v2(-0.5, 3.0));
  for (int i = 0; i < sc.n; ++i) {
    auto& a = sc.agents[i];
    a.position_region = i < 4 ? h1 : h2;
    a.initial.r = project(*a.position_region, a.initial.r);
  }
  return sc;
}

ScenarioFile paper_file(Algorithm algorithm) {
  ScenarioFile file;
  file.scenario = algorithm == Algorithm::A ? scenario_paper_A() : scenario_paper_B();
  return file;
}

TeamObjective team_of(const Scenario& sc) {
  std::vector<Objective> members;
  for (const auto& a : sc.agents) members.push_back(a.objective);
  return TeamObjective(std::move(members));
}

Vec scenario_optimum(const Scenario& sc) {
  std::vector<ConvexRegion> regions;
  if (sc.algorithm == Algorithm::B) {
    for (const auto& a : sc.agents) {
      if (a.position_region) regions.push_back(*a.position_region);
    }
  }
  return minimize_team(team_of(sc), regions);
}

}  // namespace swarm
