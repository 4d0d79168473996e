#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarm_opt/common.hpp"
#include "swarm_opt/geometry.hpp"
#include "swarm_opt/objectives.hpp"
#include "swarm_opt/topology.hpp"

namespace swarm {

enum class Algorithm { A, B };
enum class ThetaBranch { RuleA, RuleB, Gradient };

const char* to_string(Algorithm a);
const char* to_string(ThetaBranch b);

struct AgentState {
  Vec r;
  Vec v;
  double y = 1.0;
  double p = 1.0;
};

struct StepRecord {
  long k = 0;
  int agent = 0;
  // pre-step state
  Vec r;
  Vec v;
  double y = 0.0;
  double p = 0.0;

  Vec pi;
  Vec q;
  Vec w;
  Vec theta;
  ThetaBranch theta_branch = ThetaBranch::RuleA;
  double sigma = 1.0;
  double b = 0.0;
  Vec u;
};

struct AgentSpec {
  Objective objective;
  VelocitySet velocity_set;
  std::optional<ConvexRegion> position_region;
  AgentState initial;
};

struct EngineTolerances {
  double tol_eq = 1e-9;     // component-wise equality in the shrink switching rule
  double tol_zero = 1e-12;  // |q - theta| below this counts as zero
  SegmentOptions segment;
};

struct Scenario {
  std::string name;
  int n = 0;
  int m = 0;
  double T = 0.0;
  long horizon = 0;
  GraphSchedule schedule;
  std::vector<AgentSpec> agents;
  Algorithm algorithm = Algorithm::A;
  EngineTolerances tol;
};

struct ValidationReport {
  TopologyReport topology;
  std::vector<double> d;  // per-agent margin constant, midpoint of max L_ii and p(0)/2
  std::vector<CertReport> velocity_certs;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Every load-time check: structure, topology, gain bounds, initial
/// feasibility, velocity set certification and position set sanity.
ValidationReport check_scenario(const Scenario& sc);
/// check_scenario, throwing ValidationError listing every failure.
ValidationReport validate_scenario(const Scenario& sc);

/// T * sum_j a_ij (r_j - r_i) over the in-neighbors of agent i.
Vec consensus_term(int i, std::span<const AgentState> states, const WeightedDigraph& g, double T);

struct StepResult {
  std::vector<AgentState> next;
  std::vector<StepRecord> records;
};

StepResult step_algorithm_A(long k, std::span<const AgentState> states, const Scenario& sc);
StepResult step_algorithm_B(long k, std::span<const AgentState> states, const Scenario& sc);

/// Columnar log of a run: states for k = 0..steps and step records for
/// k = 0..steps-1.
class Trajectory {
 public:
  Trajectory(Algorithm algorithm, int n, int m);

  Algorithm algorithm() const { return algorithm_; }
  int n() const { return n_; }
  int m() const { return m_; }
  long steps() const { return static_cast<long>(sigma_.size()) / n_; }

  void push_states(std::span<const AgentState> states);
  void push_records(std::span<const StepRecord> records);

  AgentState state(long k, int i) const;
  std::vector<AgentState> states_at(long k) const;
  StepRecord record(long k, int i) const;

  Eigen::Map<const Vec> r(long k, int i) const { return {&r_[vec_at(k, i)], m_}; }
  Eigen::Map<const Vec> v(long k, int i) const { return {&v_[vec_at(k, i)], m_}; }
  double y(long k, int i) const { return y_[at(k, i)]; }
  double p(long k, int i) const { return p_[at(k, i)]; }
  double sigma(long k, int i) const { return sigma_[at(k, i)]; }
  double b(long k, int i) const { return b_[at(k, i)]; }
  ThetaBranch theta_branch(long k, int i) const { return branch_[at(k, i)]; }
  Eigen::Map<const Vec> theta(long k, int i) const { return {&theta_[vec_at(k, i)], m_}; }

  // Overwrites one logged theta; used to build corrupted logs for negative tests.
  void set_theta(long k, int i, const Vec& theta);

 private:
  std::size_t at(long k, int i) const { return static_cast<std::size_t>(k) * n_ + i; }
  std::size_t vec_at(long k, int i) const { return at(k, i) * m_; }

  Algorithm algorithm_;
  int n_;
  int m_;
  std::vector<double> r_, v_, y_, p_;
  std::vector<double> pi_, q_, w_, theta_, u_, sigma_, b_;
  std::vector<ThetaBranch> branch_;
};

using StepObserver = std::function<void(long k, std::span<const StepRecord> records)>;

/// Validates and runs `horizon` steps (or the override). Step errors are
/// rethrown with the failing step index prepended.
Trajectory run(const Scenario& sc, std::optional<long> horizon = std::nullopt, const StepObserver& observer = {});

}  // namespace swarm
