#include <gtest/gtest.h>

#include "swarm_opt/paper_scenarios.hpp"
#include "swarm_opt/topology.hpp"

using namespace swarm;

namespace {

WeightedDigraph pair_graph() { return WeightedDigraph(2, {{0, 1, 0.5}, {1, 0, 0.5}}); }

WeightedDigraph directed_ring(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
  return WeightedDigraph(n, e);
}

}  // namespace

TEST(Digraph, RejectsBadEdges) {
  EXPECT_THROW(WeightedDigraph(2, {{0, 0, 1.0}}), ValidationError);
  EXPECT_THROW(WeightedDigraph(2, {{0, 2, 1.0}}), ValidationError);
  EXPECT_THROW(WeightedDigraph(2, {{0, 1, 1e-7}}), ValidationError);
  EXPECT_THROW(WeightedDigraph(2, {{0, 1, 1.0}, {0, 1, 2.0}}), ValidationError);
}

TEST(Laplacian, Examples) {
  Mat expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_EQ(laplacian(pair_graph()), expected);
  EXPECT_EQ(laplacian(WeightedDigraph(3, {})), Mat::Zero(3, 3));
}

TEST(Laplacian, PaperRingDiagonal) {
  const GraphSchedule sched = paper_schedule();
  std::vector<WeightedDigraph> gs;
  for (const auto& e : sched.entries()) gs.push_back(e.graph);
  const Mat L = laplacian(union_graph(gs));
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(L(i, i), 0.5 * 2);
  EXPECT_DOUBLE_EQ(L(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(L(0, 7), -0.5);
  EXPECT_DOUBLE_EQ(L(0, 4), 0.0);
}

TEST(Laplacian, RowsSumToZeroExactly) {
  const WeightedDigraph g(4, {{0, 1, 0.1}, {2, 1, 0.7}, {3, 1, 0.3}, {1, 0, 1.0 / 3.0}, {3, 2, 0.9}});
  const Mat L = laplacian(g);
  for (int i = 0; i < 4; ++i) {
    double off = 0.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) off += L(i, j);
    EXPECT_EQ(L(i, i) + off, 0.0);
  }
  EXPECT_LT((L * Vec::Ones(4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Balanced, Examples) {
  EXPECT_TRUE(is_balanced(pair_graph()));
  EXPECT_FALSE(is_balanced(WeightedDigraph(2, {{0, 1, 1.0}})));
  EXPECT_TRUE(is_balanced(directed_ring(5)));
  const Mat L = laplacian(directed_ring(5));
  EXPECT_LT((Vec::Ones(5).transpose() * L).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StronglyConnected, Examples) {
  EXPECT_TRUE(is_strongly_connected(directed_ring(4)));
  EXPECT_FALSE(is_strongly_connected(WeightedDigraph(3, {{0, 1, 1.0}, {1, 2, 1.0}})));
  EXPECT_TRUE(is_strongly_connected(WeightedDigraph(1, {})));
  EXPECT_FALSE(is_strongly_connected(paper_schedule().entries()[0].graph));
}

TEST(Union, Examples) {
  const WeightedDigraph a(2, {{0, 1, 0.5}});
  const WeightedDigraph b(2, {{1, 0, 0.5}});
  const std::vector<WeightedDigraph> ab{a, b};
  const auto u = union_graph(ab);
  EXPECT_EQ(u.edges().size(), 2u);
  EXPECT_TRUE(is_strongly_connected(u));
  const std::vector<WeightedDigraph> aa{pair_graph(), pair_graph()};
  EXPECT_EQ(laplacian(union_graph(aa)), laplacian(pair_graph()));
  const std::vector<WeightedDigraph> mixed{a, WeightedDigraph(3, {})};
  EXPECT_THROW(union_graph(mixed), ValidationError);
}

TEST(Union, MaxWeightCommutativeAssociative) {
  const WeightedDigraph a(3, {{0, 1, 0.2}, {1, 2, 0.9}});
  const WeightedDigraph b(3, {{0, 1, 0.6}});
  const WeightedDigraph c(3, {{2, 0, 0.3}});
  const std::vector<WeightedDigraph> ab{a, b}, ba{b, a};
  EXPECT_EQ(laplacian(union_graph(ab)), laplacian(union_graph(ba)));
  EXPECT_DOUBLE_EQ(laplacian(union_graph(ab))(1, 0), -0.6);
  const std::vector<WeightedDigraph> ab_c{union_graph(ab), c};
  const std::vector<WeightedDigraph> bc{b, c};
  const std::vector<WeightedDigraph> a_bc{a, union_graph(bc)};
  EXPECT_EQ(laplacian(union_graph(ab_c)), laplacian(union_graph(a_bc)));
}

TEST(Schedule, GraphAtWraps) {
  const WeightedDigraph A = pair_graph();
  const WeightedDigraph B(2, {});
  const GraphSchedule s({{2, A}, {3, B}});
  EXPECT_EQ(s.period_steps(), 5);
  EXPECT_EQ(s.graph_at(0), A);
  EXPECT_EQ(s.graph_at(2), B);
  EXPECT_EQ(s.graph_at(4), B);
  EXPECT_EQ(s.graph_at(5), A);
  EXPECT_EQ(s.entry_at(12), 1u);
}

TEST(Schedule, RejectsMismatchedEntries) {
  EXPECT_THROW(GraphSchedule({{1, pair_graph()}, {1, WeightedDigraph(3, {})}}), ValidationError);
  EXPECT_THROW(GraphSchedule({{0, pair_graph()}}), ValidationError);
  EXPECT_THROW(GraphSchedule(std::vector<ScheduleEntry>{}), ValidationError);
}

TEST(ValidateSchedule, SingleConnectedGraph) {
  const auto r = validate_schedule(GraphSchedule({{7, pair_graph()}}));
  EXPECT_TRUE(r.balanced_all);
  EXPECT_TRUE(r.jointly_connected);
  EXPECT_EQ(r.eta_steps, 1);
  EXPECT_TRUE(r.failures.empty());
}

TEST(ValidateSchedule, AlternatingWithEmpty) {
  const auto r = validate_schedule(GraphSchedule({{1, pair_graph()}, {1, WeightedDigraph(2, {})}}));
  EXPECT_TRUE(r.jointly_connected);
  EXPECT_EQ(r.eta_steps, 2);
}

TEST(ValidateSchedule, OneDirectional) {
  const auto r = validate_schedule(GraphSchedule({{1, WeightedDigraph(2, {{0, 1, 1.0}})},
                                                  {1, WeightedDigraph(2, {{1, 0, 0.5}})}}));
  EXPECT_FALSE(r.balanced_all);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures.front().find("Assumption 5 violated"), std::string::npos);
}

TEST(ValidateSchedule, DisconnectedUnion) {
  const auto r = validate_schedule(GraphSchedule({{3, WeightedDigraph(3, {{0, 1, 1.0}, {1, 0, 1.0}})}}));
  EXPECT_FALSE(r.jointly_connected);
  EXPECT_NE(r.failures.back().find("Assumption 4 violated"), std::string::npos);
}

TEST(ValidateSchedule, WindowScanAgainstBruteForce) {
  // Brute force: check every start offset and every window length step by step.
  const GraphSchedule s = paper_schedule();
  long brute = 0;
  for (long start = 0; start < s.period_steps(); ++start) {
    std::vector<WeightedDigraph> window;
    for (long len = 1; len <= 2 * s.period_steps(); ++len) {
      window.push_back(s.graph_at(start + len - 1));
      if (is_strongly_connected(union_graph(window))) {
        brute = std::max(brute, len);
        break;
      }
    }
  }
  const auto r = validate_schedule(s);
  EXPECT_EQ(r.eta_steps, brute);
  EXPECT_EQ(r.eta_steps, 41);
  EXPECT_LE(r.eta_steps, 50);
  EXPECT_TRUE(r.balanced_all);
  EXPECT_TRUE(r.jointly_connected);
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(r.max_out_degree_row(i), 0.5);
}

TEST(ValidateSchedule, RandomPermutationVisitsEveryEntryEachPeriod) {
  const GraphSchedule cyclic = paper_schedule();
  const auto& base = cyclic.entries();
  const GraphSchedule s(base, ScheduleMode::RandomPermutation, 17);
  const GraphSchedule same(base, ScheduleMode::RandomPermutation, 17);
  for (long period = 0; period < 20; ++period) {
    std::vector<int> seen(base.size(), 0);
    for (long k = period * 50; k < (period + 1) * 50; ++k) {
      ++seen[s.entry_at(k)];
      EXPECT_EQ(s.entry_at(k), same.entry_at(k));
    }
    for (int c : seen) EXPECT_EQ(c, 10);
  }
  EXPECT_EQ(validate_schedule(s).eta_steps, 99);
}
