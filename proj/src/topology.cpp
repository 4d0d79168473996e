#include "swarm_opt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace swarm {

WeightedDigraph::WeightedDigraph(int n, std::vector<Edge> edges, double min_weight)
    : n_(n), edges_(std::move(edges)) {
  if (n_ < 1) throw ValidationError("graph: agent count must be positive");
  std::vector<std::pair<int, int>> seen;
  seen.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.from < 0 || e.from >= n_ || e.to < 0 || e.to >= n_) {
      throw ValidationError("graph: edge index out of range");
    }
    if (e.from == e.to) throw ValidationError("graph: self-loop at node " + std::to_string(e.from + 1));
    if (!std::isfinite(e.weight) || !(e.weight > min_weight)) {
      throw ValidationError("graph: weight of edge " + std::to_string(e.from + 1) + "->" + std::to_string(e.to + 1) +
                            " must exceed " + std::to_string(min_weight));
    }
    seen.emplace_back(e.from, e.to);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw ValidationError("graph: duplicate edge");
}

double WeightedDigraph::in_weight(int i) const {
  double sum = 0.0;
  for (const auto& e : edges_) {
    if (e.to == i) sum += e.weight;
  }
  return sum;
}

double WeightedDigraph::out_weight(int i) const {
  double sum = 0.0;
  for (const auto& e : edges_) {
    if (e.from == i) sum += e.weight;
  }
  return sum;
}

Mat laplacian(const WeightedDigraph& g) {
  Mat L = Mat::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) L(e.to, e.from) -= e.weight;
  for (int i = 0; i < g.n(); ++i) {
    double off = 0.0;
    for (int j = 0; j < g.n(); ++j) {
      if (j != i) off += L(i, j);
    }
    L(i, i) = -off;
  }
  return L;
}

bool is_balanced(const WeightedDigraph& g, double tol) {
  for (int i = 0; i < g.n(); ++i) {
    if (std::abs(g.in_weight(i) - g.out_weight(i)) > tol) return false;
  }
  return true;
}

namespace {

std::vector<bool> reachable_from(int n, const std::vector<std::vector<int>>& adj, int start) {
  std::vector<bool> seen(n, false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const WeightedDigraph& g) {
  const int n = g.n();
  if (n <= 1) return true;
  std::vector<std::vector<int>> fwd(n), bwd(n);
  for (const auto& e : g.edges()) {
    fwd[e.from].push_back(e.to);
    bwd[e.to].push_back(e.from);
  }
  // One SCC covers everything iff node 0 reaches all nodes and all nodes reach 0.
  const auto out = reachable_from(n, fwd, 0);
  const auto in = reachable_from(n, bwd, 0);
  return std::all_of(out.begin(), out.end(), [](bool b) { return b; }) &&
         std::all_of(in.begin(), in.end(), [](bool b) { return b; });
}

WeightedDigraph union_graph(std::span<const WeightedDigraph> graphs) {
  if (graphs.empty()) throw ValidationError("union_graph: no graphs");
  const int n = graphs.front().n();
  std::map<std::pair<int, int>, double> merged;
  for (const auto& g : graphs) {
    if (g.n() != n) throw ValidationError("union_graph: graphs have different agent counts");
    for (const auto& e : g.edges()) {
      auto [it, inserted] = merged.try_emplace({e.from, e.to}, e.weight);
      if (!inserted) it->second = std::max(it->second, e.weight);
    }
  }
  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (const auto& [key, w] : merged) edges.push_back({key.first, key.second, w});
  return WeightedDigraph(n, std::move(edges), 0.0);
}

GraphSchedule::GraphSchedule(std::vector<ScheduleEntry> entries, ScheduleMode mode, std::uint64_t seed)
    : entries_(std::move(entries)), mode_(mode), seed_(mode == ScheduleMode::Cyclic ? 0 : seed) {
  if (entries_.empty()) throw ValidationError("schedule: no entries");
  const int n = entries_.front().graph.n();
  for (const auto& e : entries_) {
    if (e.dwell < 1) throw ValidationError("schedule: dwell must be at least 1");
    if (e.graph.n() != n) throw ValidationError("schedule: entries have different agent counts");
    period_steps_ += e.dwell;
  }
}

std::vector<std::size_t> GraphSchedule::order_for_period(long period) const {
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode_ == ScheduleMode::Cyclic) return order;
  // Fisher-Yates driven directly by mt19937_64 output so the order does not
  // depend on the standard library's distribution implementations.
  std::mt19937_64 gen(seed_ ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(period + 1)));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = gen();
    while (draw >= limit) draw = gen();
    std::swap(order[i - 1], order[draw % bound]);
  }
  return order;
}

std::size_t GraphSchedule::entry_at(long k) const {
  if (k < 0) throw ValidationError("schedule: negative step index");
  const long period = k / period_steps_;
  long offset = k % period_steps_;
  if (mode_ == ScheduleMode::Cyclic) {
    for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
      if (offset < entries_[idx].dwell) return idx;
      offset -= entries_[idx].dwell;
    }
  }
  const auto order = order_for_period(period);
  for (std::size_t idx : order) {
    if (offset < entries_[idx].dwell) return idx;
    offset -= entries_[idx].dwell;
  }
  return order.back();
}

const WeightedDigraph& GraphSchedule::graph_at(long k) const { return entries_[entry_at(k)].graph; }

TopologyReport validate_schedule(const GraphSchedule& s) {
  TopologyReport report;
  const auto& entries = s.entries();
  const int n = s.n();
  report.balanced_all = true;
  report.max_out_degree_row = Vec::Zero(n);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& g = entries[e].graph;
    for (int i = 0; i < n; ++i) {
      report.max_out_degree_row[i] = std::max(report.max_out_degree_row[i], g.in_weight(i));
      if (std::abs(g.in_weight(i) - g.out_weight(i)) > 1e-12) {
        report.failures.push_back("Assumption 5 violated: graph entry " + std::to_string(e + 1) +
                                  " unbalanced at node " + std::to_string(i + 1));
        report.balanced_all = false;
      }
    }
  }

  std::vector<WeightedDigraph> all;
  for (const auto& e : entries) all.push_back(e.graph);
  report.jointly_connected = is_strongly_connected(union_graph(all));
  if (!report.jointly_connected) {
    report.failures.push_back("Assumption 4 violated: union of the graphs over a period is not strongly connected");
    report.eta_steps = 0;
    return report;
  }
  if (s.mode() == ScheduleMode::RandomPermutation) {
    report.eta_steps = 2 * s.period_steps() - 1;
    return report;
  }

  // The union only changes at entry boundaries, so the longest required
  // window starts at the first step of some entry.
  const std::size_t count = entries.size();
  long eta = 0;
  for (std::size_t start = 0; start < count; ++start) {
    std::vector<WeightedDigraph> window;
    long covered = 0;
    for (std::size_t step = 0; step < count; ++step) {
      const auto& entry = entries[(start + step) % count];
      window.push_back(entry.graph);
      if (is_strongly_connected(union_graph(window))) {
        eta = std::max(eta, covered + 1);
        break;
      }
      covered += entry.dwell;
    }
  }
  report.eta_steps = eta;
  return report;
}

}  // namespace swarm
