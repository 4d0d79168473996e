#include "swarm_opt/outputs.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace swarm {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, long line) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("trajectory line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return x;
}

long parse_long(const std::string& s, long line) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("trajectory line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return x;
}

ThetaBranch parse_branch(const std::string& s, long line) {
  if (s == "RuleA") return ThetaBranch::RuleA;
  if (s == "RuleB") return ThetaBranch::RuleB;
  if (s == "Gradient") return ThetaBranch::Gradient;
  throw ValidationError("trajectory line " + std::to_string(line) + ": unknown theta_branch '" + s + "'");
}

std::string header(int m) {
  std::string h = "k,agent";
  for (int d = 1; d <= m; ++d) h += ",r_" + std::to_string(d);
  for (int d = 1; d <= m; ++d) h += ",v_" + std::to_string(d);
  h += ",y,p,sigma,b,theta_branch";
  for (int d = 1; d <= m; ++d) h += ",theta_" + std::to_string(d);
  return h;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const int m = traj.m();
  out << header(m) << '\n';
  std::string row;
  for (long k = 0; k <= traj.steps(); ++k) {
    const bool has_step = k < traj.steps();
    for (int i = 0; i < traj.n(); ++i) {
      row = std::to_string(k) + ',' + std::to_string(i + 1);
      for (int d = 0; d < m; ++d) row += ',' + format_double(traj.r(k, i)[d]);
      for (int d = 0; d < m; ++d) row += ',' + format_double(traj.v(k, i)[d]);
      row += ',' + format_double(traj.y(k, i)) + ',' + format_double(traj.p(k, i));
      if (has_step) {
        row += ',' + format_double(traj.sigma(k, i)) + ',' + format_double(traj.b(k, i)) + ',' +
               to_string(traj.theta_branch(k, i));
        for (int d = 0; d < m; ++d) row += ',' + format_double(traj.theta(k, i)[d]);
      } else {
        row += std::string(3 + m, ',');
      }
      out << row << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream& in, const Scenario& sc) {
  const int n = sc.n;
  const int m = sc.m;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trajectory: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header(m)) throw ValidationError("trajectory line 1: header does not match a " + std::to_string(m) + "-dimensional log");

  const std::size_t width = 2 + 2 * m + 5 + m;
  std::vector<std::vector<AgentState>> states;
  std::vector<std::vector<StepRecord>> partial;
  long lineno = 1;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) {
      throw ValidationError("trajectory line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                            " columns, got " + std::to_string(cells.size()));
    }
    const long k = parse_long(cells[0], lineno);
    const long agent = parse_long(cells[1], lineno) - 1;
    const long expect_k = static_cast<long>(row / n);
    const long expect_agent = static_cast<long>(row % n);
    if (k != expect_k || agent != expect_agent) {
      throw ValidationError("trajectory line " + std::to_string(lineno) + ": expected step " + std::to_string(expect_k) +
                            " agent " + std::to_string(expect_agent + 1));
    }
    ++row;
    if (agent == 0) {
      states.emplace_back();
      partial.emplace_back();
    }

    AgentState s;
    s.r.resize(m);
    s.v.resize(m);
    for (int d = 0; d < m; ++d) s.r[d] = parse_double(cells[2 + d], lineno);
    for (int d = 0; d < m; ++d) s.v[d] = parse_double(cells[2 + m + d], lineno);
    s.y = parse_double(cells[2 + 2 * m], lineno);
    s.p = parse_double(cells[3 + 2 * m], lineno);
    states.back().push_back(s);

    const std::size_t base = 4 + 2 * m;
    if (cells[base].empty()) continue;
    StepRecord rec;
    rec.k = k;
    rec.agent = static_cast<int>(agent);
    rec.sigma = parse_double(cells[base], lineno);
    rec.b = parse_double(cells[base + 1], lineno);
    rec.theta_branch = parse_branch(cells[base + 2], lineno);
    rec.theta.resize(m);
    for (int d = 0; d < m; ++d) rec.theta[d] = parse_double(cells[base + 3 + d], lineno);
    partial.back().push_back(std::move(rec));
  }
  if (states.empty()) throw ValidationError("trajectory: no rows");
  if (states.back().size() != static_cast<std::size_t>(n)) throw ValidationError("trajectory: truncated final step");
  const long steps = static_cast<long>(states.size()) - 1;
  for (long k = 0; k < steps; ++k) {
    if (partial[k].size() != static_cast<std::size_t>(n)) {
      throw ValidationError("trajectory: step " + std::to_string(k) + " is missing algorithm columns");
    }
  }
  if (!partial[steps].empty()) throw ValidationError("trajectory: final step carries algorithm columns");

  Trajectory traj(sc.algorithm, n, m);
  traj.push_states(states[0]);
  const double T = sc.T;
  for (long k = 0; k < steps; ++k) {
    const auto& now = states[k];
    const WeightedDigraph& g = sc.schedule.graph_at(k);
    for (int i = 0; i < n; ++i) {
      StepRecord& rec = partial[k][i];
      const AgentState& s = now[i];
      rec.r = s.r;
      rec.v = s.v;
      rec.y = s.y;
      rec.p = s.p;
      rec.pi = consensus_term(i, now, g, T);
      if (sc.algorithm == Algorithm::A) {
        rec.q = s.v - s.p * T * s.v + (s.p / 2.0) * rec.pi;
        rec.w = s.r + (2.0 / s.p) * s.v - T * s.v + rec.pi;
      } else {
        rec.q = s.v - s.p * T * s.v + (s.p / 4.0) * rec.pi;
        rec.w = s.r + (2.0 / s.p) * s.v - T * s.v + 0.5 * rec.pi;
      }
      rec.u = states[k + 1][i].v;
    }
    traj.push_records(partial[k]);
    traj.push_states(states[k + 1]);
  }
  return traj;
}

void write_metrics_csv(const MetricsSeries& metrics, const StochasticityReport& stoch, std::ostream& out) {
  out << "k,consensus_spread,optimality_gap,y_ratio_spread,state_envelope,psi_row_sum_err,psi_min_entry\n";
  for (std::size_t k = 0; k < metrics.consensus_spread.size(); ++k) {
    out << k << ',' << format_double(metrics.consensus_spread[k]) << ',' << format_double(metrics.optimality_gap[k])
        << ',' << format_double(metrics.y_ratio_spread[k]) << ',' << format_double(metrics.state_envelope[k]) << ',';
    if (k < stoch.row_sum_err.size()) {
      out << format_double(stoch.row_sum_err[k]) << ',' << format_double(stoch.min_entry[k]);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

nlohmann::json summary_to_json(const RunSummary& s) {
  const auto arr = [](const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  nlohmann::json j = {{"scenario", s.scenario},
                      {"algorithm", s.algorithm},
                      {"final_consensus_spread", s.final_consensus_spread},
                      {"final_optimality_gap", s.final_optimality_gap},
                      {"final_y_ratio_spread", s.final_y_ratio_spread},
                      {"max_state_envelope", s.max_state_envelope},
                      {"psi_max_row_sum_err", s.psi_max_row_sum_err},
                      {"replay_max_residual", nullptr},
                      {"steps", s.steps},
                      {"wall_time", s.wall_time},
                      {"optimum", arr(s.optimum)},
                      {"final_mean_r", arr(s.final_mean_r)},
                      {"min_sigma", s.min_sigma},
                      {"eta_steps", s.eta_steps}};
  if (s.replay_max_residual) j["replay_max_residual"] = *s.replay_max_residual;
  return j;
}

std::string svg_line_plot(const std::string& title, const std::vector<double>& values, bool log_scale) {
  constexpr double width = 640.0, height = 360.0, left = 70.0, right = 20.0, top = 36.0, bottom = 40.0;
  std::vector<double> ys;
  ys.reserve(values.size());
  for (double v : values) ys.push_back(log_scale ? std::log10(std::max(v, 1e-300)) : v);
  if (log_scale) {
    // Exact zeros would dominate the axis; clamp them to the smallest positive value.
    double floor = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > 0.0 && (!found || ys[i] < floor)) {
        floor = ys[i];
        found = true;
      }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) ys[i] = found ? floor : 0.0;
    }
  }
  double lo = ys.empty() ? 0.0 : *std::min_element(ys.begin(), ys.end());
  double hi = ys.empty() ? 1.0 : *std::max_element(ys.begin(), ys.end());
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double xmax = ys.size() > 1 ? static_cast<double>(ys.size() - 1) : 1.0;
  const auto px = [&](double k) { return left + (width - left - right) * k / xmax; };
  const auto py = [&](double y) { return top + (height - top - bottom) * (hi - y) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
     << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << (log_scale ? " (log10)" : "") << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\"" << height - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
     << "\" stroke=\"black\"/>\n";
  const auto label = [&](double y) { return format_double(std::round(y * 1000.0) / 1000.0); };
  os << "<text x=\"" << left - 6 << "\" y=\"" << py(hi) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << label(hi) << "</text>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << py(lo) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << label(lo) << "</text>\n";
  os << "<text x=\"" << width - right << "\" y=\"" << height - 12 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">k = "
     << (ys.empty() ? 0 : ys.size() - 1) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  const std::size_t stride = std::max<std::size_t>(1, ys.size() / 2000);
  for (std::size_t k = 0; k < ys.size(); k += stride) {
    os << format_double(std::round(px(static_cast<double>(k)) * 100.0) / 100.0) << ','
       << format_double(std::round(py(ys[k]) * 100.0) / 100.0) << ' ';
  }
  if (!ys.empty() && (ys.size() - 1) % stride != 0) {
    os << format_double(std::round(px(xmax) * 100.0) / 100.0) << ',' << format_double(std::round(py(ys.back()) * 100.0) / 100.0);
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

void write_plots(const MetricsSeries& metrics, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto put = [&](const char* name, const std::vector<double>& values, bool log_scale) {
    std::ofstream out(dir / (std::string(name) + ".svg"), std::ios::binary);
    if (!out) throw ValidationError("cannot write plot into " + dir.string());
    out << svg_line_plot(name, values, log_scale);
  };
  put("consensus_spread", metrics.consensus_spread, true);
  put("optimality_gap", metrics.optimality_gap, true);
  put("y_ratio_spread", metrics.y_ratio_spread, true);
  put("state_envelope", metrics.state_envelope, false);
}

}  // namespace swarm
