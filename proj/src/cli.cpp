#include "swarm_opt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "swarm_opt/paper_scenarios.hpp"

namespace swarm {
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitAssumption = 2;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

// Runs `body`, mapping the library's exception types onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAssumption;
  }
}

int cmd_run(const std::string& scenario_path, std::optional<long> horizon, const std::string& out, bool no_plots,
            std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile file = load_scenario_file(scenario_path);
    RunOptions opts{horizon, out.empty() ? default_out_dir() : fs::path(out), !no_plots};
    const RunSummary s = execute_run(file, opts);
    os << "scenario " << s.scenario << " (algorithm " << s.algorithm << "), " << s.steps << " steps in "
       << std::fixed << std::setprecision(3) << s.wall_time << std::defaultfloat << " s\n";
    os << "  final consensus_spread " << format_double(s.final_consensus_spread) << '\n';
    os << "  final optimality_gap   " << format_double(s.final_optimality_gap) << '\n';
    os << "  final y_ratio_spread   " << format_double(s.final_y_ratio_spread) << '\n';
    os << "  outputs in " << opts.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_verify(const std::string& csv_path, const std::string& scenario_path, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(scenario_path);
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + csv_path);
    const Trajectory traj = read_trajectory_csv(in, sc);

    bool all = true;
    const auto report = [&](const std::string& name, bool ok, long step, const std::string& detail) {
      all = all && ok;
      os << (ok ? "PASS " : "FAIL ") << name;
      if (!ok && step >= 0) os << " at step " << step;
      if (!detail.empty()) os << ": " << detail;
      os << '\n';
    };

    const StochasticityReport st = stochasticity(traj, sc.schedule, sc.T);
    report("psi row sums within 1e-9", st.max_row_sum_err <= 1e-9, st.worst_row_step,
           "max error " + format_double(st.max_row_sum_err));
    report("psi entries >= -1e-12", st.min_entry_overall >= -1e-12, st.worst_entry_step,
           "min entry " + format_double(st.min_entry_overall));
    if (sc.algorithm == Algorithm::A) {
      const ReplayReport rr = replay_check(traj, sc.schedule, sc.T);
      report("replay residual < 1e-9", rr.first_step_over_tol < 0, rr.first_step_over_tol,
             "max residual " + format_double(rr.max_residual));
    } else {
      os << "SKIP replay: transformation valid only for Algorithm A\n";
    }
    for (const auto& c : trajectory_invariants(traj, sc)) report(c.name, c.passed, c.first_step, c.detail);
    return all ? kExitOk : kExitValidation;
  });
}

int cmd_sweep(const std::vector<std::string>& scenarios, std::optional<long> horizon, const std::string& out,
              bool no_plots, unsigned jobs, std::ostream& os, std::ostream& err) {
  const fs::path base = out.empty() ? default_out_dir() : fs::path(out);
  std::vector<fs::path> dirs;
  std::map<std::string, int> seen;
  for (const auto& s : scenarios) {
    std::string stem = fs::path(s).stem().string();
    const int count = ++seen[stem];
    if (count > 1) stem += "_" + std::to_string(count);
    dirs.push_back(base / stem);
  }

  std::vector<int> codes(scenarios.size(), kExitOk);
  std::vector<std::string> logs(scenarios.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t idx = next++; idx < scenarios.size(); idx = next++) {
      std::ostringstream o, e;
      codes[idx] = guarded(e, [&] {
        const ScenarioFile file = load_scenario_file(scenarios[idx]);
        const RunSummary s = execute_run(file, RunOptions{horizon, dirs[idx], !no_plots});
        o << s.scenario << ": " << s.steps << " steps, consensus_spread " << format_double(s.final_consensus_spread)
          << ", optimality_gap " << format_double(s.final_optimality_gap) << " -> " << dirs[idx].string() << '\n';
        return kExitOk;
      });
      logs[idx] = o.str() + e.str();
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = kExitOk;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    (codes[i] == kExitOk ? os : err) << logs[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

int cmd_init_examples(const std::string& dir, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path base(dir);
    fs::create_directories(base);
    save_scenario_file(paper_file(Algorithm::A), base / "paper_A.scn");
    save_scenario_file(paper_file(Algorithm::B), base / "paper_B.scn");
    os << "wrote " << (base / "paper_A.scn").string() << " and " << (base / "paper_B.scn").string() << '\n';
    return kExitOk;
  });
}

}  // namespace

fs::path default_out_dir() {
  if (const char* env = std::getenv("SWARM_OPT_OUT"); env && *env) return fs::path(env);
  return fs::path("swarm_out");
}

RunSummary execute_run(const ScenarioFile& file, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const Scenario& sc = file.scenario;
  const Trajectory traj = run(sc, opts.horizon);

  const Vec optimum = scenario_optimum(sc);
  const MetricsSeries metrics = compute_metrics(traj, team_of(sc), optimum);
  const StochasticityReport stoch = stochasticity(traj, sc.schedule, sc.T);

  RunSummary s;
  s.scenario = sc.name;
  s.algorithm = to_string(sc.algorithm);
  s.steps = traj.steps();
  s.final_consensus_spread = metrics.consensus_spread.back();
  s.final_optimality_gap = metrics.optimality_gap.back();
  s.final_y_ratio_spread = metrics.y_ratio_spread.back();
  s.max_state_envelope = *std::max_element(metrics.state_envelope.begin(), metrics.state_envelope.end());
  s.psi_max_row_sum_err = stoch.max_row_sum_err;
  if (sc.algorithm == Algorithm::A) s.replay_max_residual = replay_check(traj, sc.schedule, sc.T).max_residual;
  s.optimum = optimum;
  s.final_mean_r = Vec::Zero(sc.m);
  for (int i = 0; i < sc.n; ++i) s.final_mean_r += traj.r(traj.steps(), i);
  s.final_mean_r /= sc.n;
  s.min_sigma = stoch.min_sigma;
  s.eta_steps = validate_schedule(sc.schedule).eta_steps;

  {
    auto out = open_out(resolve(opts.out_dir, file.outputs.trajectory_csv));
    write_trajectory_csv(traj, out);
  }
  {
    auto out = open_out(resolve(opts.out_dir, file.outputs.metrics_csv));
    write_metrics_csv(metrics, stoch, out);
  }
  if (opts.plots && file.outputs.plots_dir) write_plots(metrics, resolve(opts.out_dir, *file.outputs.plots_dir));
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    auto out = open_out(resolve(opts.out_dir, file.outputs.summary_json));
    out << summary_to_json(s).dump(2) << '\n';
  }
  return s;
}

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Distributed optimization of double-integrator swarms under velocity and position constraints",
               "swarm-opt"};
  app.require_subcommand(1);

  std::string scenario, csv, out, examples_dir = "swarm_examples";
  long horizon = -1;
  bool no_plots = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> sweep_inputs;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trajectory, metrics, summary and plots");
  run_cmd->add_option("scenario", scenario, "Scenario file")->required();
  run_cmd->add_option("--horizon", horizon, "Override the scenario horizon (steps)")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", out, "Output directory (default: $SWARM_OPT_OUT or ./swarm_out)");
  run_cmd->add_flag("--no-plots", no_plots, "Skip the SVG plots");

  auto* verify_cmd = app.add_subcommand("verify", "Re-check invariants of a trajectory log against its scenario");
  verify_cmd->add_option("trajectory_csv", csv, "Trajectory CSV written by run")->required();
  verify_cmd->add_option("scenario", scenario, "Scenario file the log came from")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run several scenarios concurrently, one output directory each");
  sweep_cmd->add_option("scenarios", sweep_inputs, "Scenario files")->required();
  sweep_cmd->add_option("--horizon", horizon, "Override every horizon (steps)")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--out", out, "Parent output directory");
  sweep_cmd->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--no-plots", no_plots, "Skip the SVG plots");

  auto* init_cmd = app.add_subcommand("init-examples", "Write the bundled example scenario files");
  init_cmd->add_option("dir", examples_dir, "Target directory");

  // CLI11 consumes arguments from the back, without the program name.
  std::vector<std::string> reversed;
  for (std::size_t i = args.size(); i > 1; --i) reversed.push_back(args[i - 1]);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::optional<long> h = horizon >= 0 ? std::optional<long>(horizon) : std::nullopt;
  if (*run_cmd) return cmd_run(scenario, h, out, no_plots, std::cout, std::cerr);
  if (*verify_cmd) return cmd_verify(csv, scenario, std::cout, std::cerr);
  if (*sweep_cmd) return cmd_sweep(sweep_inputs, h, out, no_plots, jobs, std::cout, std::cerr);
  if (*init_cmd) return cmd_init_examples(examples_dir, std::cout, std::cerr);
  return kExitValidation;
}

}  // namespace swarm
