#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarm_opt/common.hpp"

namespace swarm {

inline constexpr double kDefaultMinWeight = 1e-6;

// Information flows from `from` to `to`: agent `to` reads agent `from`, so the
// edge contributes a_{to,from} = weight. Indices are 0-based.
struct Edge {
  int from = 0;
  int to = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

class WeightedDigraph {
 public:
  WeightedDigraph() = default;
  // Rejects self-loops, out-of-range indices, duplicate edges and weights at
  // or below min_weight.
  WeightedDigraph(int n, std::vector<Edge> edges, double min_weight = kDefaultMinWeight);

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Sum of a_ij over j, i.e. the Laplacian diagonal.
  double in_weight(int i) const;
  double out_weight(int i) const;

  bool operator==(const WeightedDigraph&) const = default;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

/// L_ii = sum_j a_ij, L_ij = -a_ij. The diagonal is written as the negated
/// sum of the row's off-diagonal entries so every row sums to zero.
Mat laplacian(const WeightedDigraph& g);

bool is_balanced(const WeightedDigraph& g, double tol = 1e-12);
bool is_strongly_connected(const WeightedDigraph& g);

/// Edge present iff present in any input; weight is the maximum across inputs.
WeightedDigraph union_graph(std::span<const WeightedDigraph> graphs);

struct ScheduleEntry {
  int dwell = 1;
  WeightedDigraph graph;

  bool operator==(const ScheduleEntry&) const = default;
};

enum class ScheduleMode { Cyclic, RandomPermutation };

/// Periodic sequence of graphs. In RandomPermutation mode every period visits
/// the same entries in an order drawn from `seed` and the period index. The
/// seed is ignored (stored as 0) in Cyclic mode.
class GraphSchedule {
 public:
  GraphSchedule() = default;
  GraphSchedule(std::vector<ScheduleEntry> entries, ScheduleMode mode = ScheduleMode::Cyclic,
                std::uint64_t seed = 0);

  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  long period_steps() const { return period_steps_; }
  int n() const { return entries_.front().graph.n(); }
  ScheduleMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

  const WeightedDigraph& graph_at(long k) const;
  // Index into entries() of the graph active at step k.
  std::size_t entry_at(long k) const;

  bool operator==(const GraphSchedule&) const = default;

 private:
  std::vector<std::size_t> order_for_period(long period) const;

  std::vector<ScheduleEntry> entries_;
  long period_steps_ = 0;
  ScheduleMode mode_ = ScheduleMode::Cyclic;
  std::uint64_t seed_ = 0;
};

struct TopologyReport {
  bool balanced_all = false;
  bool jointly_connected = false;
  long eta_steps = 0;
  Vec max_out_degree_row;  // per node, max over the schedule of L(k)_ii
  std::vector<std::string> failures;
};

/// Checks balance of every entry and joint strong connectivity, and finds
/// eta: the shortest window length whose every placement in the cyclic
/// schedule has a strongly connected union. For RandomPermutation schedules
/// eta is the bound 2 * period - 1 (any such window holds a full period).
TopologyReport validate_schedule(const GraphSchedule& s);

}  // namespace swarm
