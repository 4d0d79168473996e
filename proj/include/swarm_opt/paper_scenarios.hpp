#pragma once

#include "swarm_opt/engine.hpp"
#include "swarm_opt/scenario_io.hpp"

namespace swarm {

/// y_i(0) of the bundled scenarios; the initial stepsize is 1/sqrt(y).
inline constexpr double kPaperInitialY = 1e8;

/// Ball(0,1) union Box([-0.5,0],[0.5,1.5]).
VelocitySet paper_velocity_set();

/// The eight local objectives of the 8-agent example in R^2.
std::vector<Objective> paper_objectives();

/// Five matchings of the undirected 8-ring (weight 0.5 both ways), 10 steps each:
/// {1-2,5-6}, {2-3,6-7}, {3-4,7-8}, {4-5}, {8-1}.
GraphSchedule paper_schedule();

/// Unconstrained example: 8 agents, T = 0.2, p(0) = 1.5, 5e4 steps. Agents
/// start on the circle of radius 2 at angles 2*pi*i/8 with v = 0, y = kPaperInitialY.
Scenario scenario_paper_A();

/// Adds H_1 = Ball(0,1) for agents 1-4 and H_2 = Box([-6.5,-3],[-0.5,3]) for
/// agents 5-8; initial positions are the circle points projected onto H_i.
Scenario scenario_paper_B();

ScenarioFile paper_file(Algorithm algorithm);

TeamObjective team_of(const Scenario& sc);

/// Team minimizer over R^m (A) or over the intersection of the position regions (B).
Vec scenario_optimum(const Scenario& sc);

}  // namespace swarm
