// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "swarm_opt/cli.hpp"
#include "swarm_opt/paper_scenarios.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Vec mean_r(const Trajectory& t, long k) {
  Vec m = Vec::Zero(t.m());
  for (int i = 0; i < t.n(); ++i) m += t.r(k, i);
  return m / t.n();
}

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_1(const Trajectory& t, const MetricsSeries& m) {
  const double spread = m.consensus_spread.back();
  const double err = (mean_r(t, t.steps()) - v2(0.5, 0.5)).norm();
  // ten equal consecutive windows over steps 1000..end
  const long first = 1000, last = t.steps();
  const long len = (last - first + 1) / 10;
  std::vector<double> means;
  for (int w = 0; w < 10; ++w) {
    const long a = first + w * len;
    const long b = w == 9 ? last + 1 : a + len;
    means.push_back(std::accumulate(m.optimality_gap.begin() + a, m.optimality_gap.begin() + b, 0.0) / (b - a));
  }
  bool mono = true;
  for (int w = 1; w < 10; ++w) mono = mono && means[w] <= means[w - 1];
  report(1, spread < 0.05 && err < 0.1 && mono,
         "scenario A: consensus_spread " + fmt(spread) + " (< 0.05), |mean r - [0.5,0.5]| " + fmt(err) +
             " (< 0.1), gap window means nonincreasing: " + (mono ? "yes" : "no") + " (first " + fmt(means.front()) +
             ", last " + fmt(means.back()) + ")");
}

void criterion_2(const Scenario& sc, const Trajectory& t) {
  const double err = (mean_r(t, t.steps()) - v2(-0.5, 0.5)).norm();
  double worst_pos = 0.0;
  long bad_vel = 0;
  for (long k = 0; k <= t.steps(); ++k) {
    for (int i = 0; i < t.n(); ++i) {
      const Vec r = t.r(k, i);
      worst_pos = std::max(worst_pos, (r - project(*sc.agents[i].position_region, r)).norm());
      if (!membership(sc.agents[i].velocity_set, t.v(k, i))) ++bad_vel;
    }
  }
  report(2, err < 0.1 && worst_pos < 1e-9 && bad_vel == 0,
         "scenario B: |mean r - [-0.5,0.5]| " + fmt(err) + " (< 0.1), max position residual " + fmt(worst_pos) +
             " (< 1e-9), velocity violations " + std::to_string(bad_vel));
}

void criterion_3(const Scenario& sc, const Trajectory& t, long eta) {
  const StochasticityReport st = stochasticity(t, sc.schedule, sc.T);
  const long len = 4L * sc.n * eta;
  const auto windows = window_products(t, sc.schedule, sc.T, len);
  bool windows_ok = !windows.empty();
  double worst_row = 0.0, min_mu = 1.0, min_entry = 0.0;
  for (const auto& w : windows) {
    const double factors = static_cast<double>(w.to - w.from + 1);
    windows_ok = windows_ok && w.row_sum_err <= 1e-8 * factors && w.positive_column >= 0 && w.mu_hat > 0.0 &&
                 w.min_entry >= -1e-8 * factors;
    worst_row = std::max(worst_row, w.row_sum_err);
    min_mu = std::min(min_mu, w.mu_hat);
    min_entry = std::min(min_entry, w.min_entry);
  }
  const bool steps_ok = st.max_row_sum_err <= 1e-9 && st.min_entry_overall >= -1e-12;
  report(3, steps_ok && windows_ok,
         "Psi row-sum error " + fmt(st.max_row_sum_err) + ", min entry " + fmt(st.min_entry_overall) + "; " +
             std::to_string(windows.size()) + " windows of " + std::to_string(len) + " steps, max row-sum error " +
             fmt(worst_row) + ", min entry " + fmt(min_entry) + ", smallest positive-column minimum mu_hat " +
             fmt(min_mu));
}

void criterion_4(const Scenario& sc, const Trajectory& t) {
  const ReplayReport r = replay_check(t, sc.schedule, sc.T);
  report(4, r.max_residual < 1e-9,
         "replay residual " + fmt(r.max_residual) + " over " + std::to_string(t.steps()) + " steps (< 1e-9)");
}

void criterion_5(const Scenario& sc, const Trajectory& t) {
  long violations = 0;
  for (int i = 0; i < t.n(); ++i) {
    for (long k = 0; k < t.steps(); ++k) {
      if (t.p(k + 1, i) < t.p(k, i)) ++violations;
      if (!(t.p(k, i) * sc.T < 1.0)) ++violations;
      if (t.theta(k, i).norm() != 0.0 && t.sigma(k, i) != 1.0) ++violations;
    }
    if (!(t.p(t.steps(), i) * sc.T < 1.0)) ++violations;
  }
  report(5, violations == 0, "gain recursion violations " + std::to_string(violations));
}

void criterion_6(const MetricsSeries& m) {
  const double at_end = m.y_ratio_spread.at(50000);
  const double at_5k = m.y_ratio_spread.at(5000);
  report(6, at_end < 0.02 && at_end < at_5k,
         "y_ratio_spread " + fmt(at_end) + " at step 5e4 (< 0.02), " + fmt(at_5k) + " at step 5e3");
}

void criterion_7(const MetricsSeries& a, const MetricsSeries& b) {
  bool ok = true;
  std::string detail;
  for (const auto* m : {&a, &b}) {
    const double peak = *std::max_element(m->state_envelope.begin(), m->state_envelope.end());
    const bool finite = std::all_of(m->state_envelope.begin(), m->state_envelope.end(),
                                    [](double x) { return std::isfinite(x); });
    ok = ok && finite && peak <= 10.0 * m->state_envelope.front();
    detail += (detail.empty() ? "A" : ", B") + std::string(" max envelope ") + fmt(peak) + " vs initial " +
              fmt(m->state_envelope.front());
  }
  report(7, ok, detail);
}

void criterion_8() {
  const VelocitySet V = paper_velocity_set();
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> N;
  double worst_beta = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Vec d = v2(N(rng), N(rng));
    d.normalize();
    worst_beta = std::max(worst_beta, std::abs(max_segment_beta(V, d) - max_segment_beta_bisect(V, d)));
  }
  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<std::pair<std::string, ConvexRegion>> regions{
      {"ball", ConvexRegion::ball(v2(0, 0), 1.0)},
      {"box", ConvexRegion::box(v2(-6.5, -3), v2(-0.5, 3))},
      {"3-halfspace", ConvexRegion::halfspaces({v2(-1, 0), v2(0, -1), v2(s, s)}, {0.0, 0.0, s}, v2(0.2, 0.2))}};
  std::uniform_real_distribution<double> U(-5, 5);
  double worst_excess = -1e300;
  for (const auto& [name, reg] : regions) {
    for (int t = 0; t < 1000; ++t) {
      const Vec y = v2(U(rng), U(rng)), z = v2(U(rng), U(rng));
      worst_excess = std::max(worst_excess, (project(reg, y) - project(reg, z)).norm() - (y - z).norm());
    }
  }
  report(8, worst_beta <= 1e-6 && worst_excess <= 1e-9,
         "analytic vs bisection max |diff| " + fmt(worst_beta) + " over 1000 directions (<= 1e-6); max of " +
             "|P(y)-P(z)| - |y-z| " + fmt(worst_excess) + " over 3x1000 pairs (<= 1e-9)");
}

void criterion_9() {
  auto objectives = paper_objectives();
  objectives.push_back(Objective::sum(paper_objectives()));
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> U(-3, 3);
  std::uniform_int_distribution<std::size_t> pick(0, objectives.size() - 1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Objective& f = objectives[pick(rng)];
    const Vec x = v2(U(rng), U(rng));
    const Vec g = f.gradient(x);
    worst = std::max(worst, (g - finite_diff_gradient(f, x, 1e-5)).norm() / std::max(1.0, g.norm()));
  }
  const TeamObjective team(paper_objectives());
  const Vec xa = minimize_team(team, {});
  const double grad_norm = team.gradient(xa).norm();
  const double err_a = (xa - v2(0.5, 0.5)).norm();
  const double err_b = (scenario_optimum(scenario_paper_B()) - v2(-0.5, 0.5)).norm();
  report(9, worst <= 1e-5 && grad_norm < 1e-6 && err_a <= 1e-6 && err_b <= 1e-4,
         "max relative gradient error " + fmt(worst) + " (<= 1e-5); unconstrained team gradient norm " +
             fmt(grad_norm) + " (< 1e-6); |x_A - [0.5,0.5]| " + fmt(err_a) + " (<= 1e-6); |x_B - [-0.5,0.5]| " +
             fmt(err_b) + " (<= 1e-4)");
}

void criterion_10(const fs::path& scenario_file) {
  const fs::path out = fs::current_path() / "acceptance_determinism";
  fs::remove_all(out);
  const std::string scn = scenario_file.string();
  const int c1 = cli_main({"swarm-opt", "run", scn, "--out", (out / "1").string(), "--no-plots"});
  const int c2 = cli_main({"swarm-opt", "run", scn, "--out", (out / "2").string(), "--no-plots"});
  const std::string a = slurp(out / "1" / "trajectory.csv");
  const std::string b = slurp(out / "2" / "trajectory.csv");
  report(10, c1 == 0 && c2 == 0 && !a.empty() && a == b,
         "two runs of scenario A, trajectory CSVs of " + std::to_string(a.size()) + " and " +
             std::to_string(b.size()) + " bytes, identical: " + (a == b ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path(SWARM_SCENARIO_DIR);
  const auto start = std::chrono::steady_clock::now();
  try {
    const Scenario a = load_scenario(dir / "paper_A.scn");
    const Scenario b = load_scenario(dir / "paper_B.scn");
    const long eta = validate_schedule(a.schedule).eta_steps;

    const Trajectory ta = run(a);
    const MetricsSeries ma = compute_metrics(ta, team_of(a), scenario_optimum(a));
    const Trajectory tb = run(b);
    const MetricsSeries mb = compute_metrics(tb, team_of(b), scenario_optimum(b));

    criterion_1(ta, ma);
    criterion_2(b, tb);
    criterion_3(a, ta, eta);
    criterion_4(a, ta);
    criterion_5(a, ta);
    criterion_6(ma);
    criterion_7(ma, mb);
    criterion_8();
    criterion_9();
    criterion_10(dir / "paper_A.scn");
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << fmt(secs) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
