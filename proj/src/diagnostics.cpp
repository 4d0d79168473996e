#include "swarm_opt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarm {
namespace {

// Neumaier summation.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

void require_range(const Trajectory& traj, long k) {
  if (k < 0 || k >= traj.steps()) {
    throw std::out_of_range("step " + std::to_string(k) + " outside the logged range [0, " +
                            std::to_string(traj.steps()) + ")");
  }
}

}  // namespace

SystemMatrices build_psi(std::span<const StepRecord> records, const WeightedDigraph& g, double T,
                         Algorithm algorithm) {
  const int n = static_cast<int>(records.size());
  if (n != g.n()) throw ValidationError("build_psi: record count does not match graph");
  const double coupling_scale = algorithm == Algorithm::A ? 1.0 : 0.5;

  SystemMatrices out;
  out.E = Mat::Zero(2 * n, 2 * n);
  out.A = Mat::Zero(2 * n, 2 * n);
  out.Lambda = Mat::Zero(n, n);
  out.W = Mat::Zero(2, 2);
  out.W(1, 0) = T;
  Mat step_e = Mat::Zero(2 * n, 2 * n);  // E(k+1) E(k)^-1

  for (int i = 0; i < n; ++i) {
    const auto& rec = records[i];
    const double p = rec.p;
    const double p_next = algorithm == Algorithm::A ? rec.b : rec.p;
    if (!(p > 0.0) || !(p_next > 0.0)) throw ValidationError("build_psi: gain must be positive");
    const double b = rec.b;
    const int r = 2 * i;
    const int z = r + 1;
    out.E(r, r) = 1.0;
    out.E(z, r) = 1.0;
    out.E(z, z) = 2.0 / p;
    out.A(r, r) = 1.0 - p * T / 2.0;
    out.A(r, z) = p * T / 2.0;
    out.A(z, r) = b * T - p * T / 2.0;
    out.A(z, z) = 1.0 - b * T + p * T / 2.0;
    out.Lambda(i, i) = rec.sigma;
    step_e(r, r) = 1.0;
    step_e(z, r) = 1.0 - p / p_next;
    step_e(z, z) = p / p_next;
  }

  const Mat L = laplacian(g);
  out.coupling = out.A;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (L(i, j) != 0.0) out.coupling(2 * i + 1, 2 * j) -= coupling_scale * out.Lambda(i, i) * L(i, j) * T;
    }
  }
  out.Psi = step_e * out.coupling;
  return out;
}

std::vector<StepRecord> records_at(const Trajectory& traj, long k) {
  require_range(traj, k);
  std::vector<StepRecord> recs;
  recs.reserve(traj.n());
  for (int i = 0; i < traj.n(); ++i) recs.push_back(traj.record(k, i));
  return recs;
}

Mat psi_at(const Trajectory& traj, const GraphSchedule& schedule, double T, long k) {
  return build_psi(records_at(traj, k), schedule.graph_at(k), T, traj.algorithm()).Psi;
}

Vec transformed_state(const Trajectory& traj, long k, Eigen::Index coord) {
  const int n = traj.n();
  Vec phi(2 * n);
  for (int i = 0; i < n; ++i) {
    const double r = traj.r(k, i)[coord];
    phi[2 * i] = r;
    phi[2 * i + 1] = r + 2.0 / traj.p(k, i) * traj.v(k, i)[coord];
  }
  return phi;
}

ReplayReport replay_check(const Trajectory& traj, const GraphSchedule& schedule, double T, double tol) {
  if (traj.algorithm() != Algorithm::A) throw ValidationError("transformation valid only for Algorithm A");
  ReplayReport rep;
  const int n = traj.n();
  for (long k = 0; k < traj.steps(); ++k) {
    const Mat psi = psi_at(traj, schedule, T, k);
    for (Eigen::Index c = 0; c < traj.m(); ++c) {
      Vec predicted = psi * transformed_state(traj, k, c);
      for (int i = 0; i < n; ++i) {
        predicted[2 * i + 1] -= 2.0 * traj.sigma(k, i) * traj.theta(k, i)[c] / traj.b(k, i);
      }
      const double res = (predicted - transformed_state(traj, k + 1, c)).cwiseAbs().maxCoeff();
      if (!(res <= tol) && rep.first_step_over_tol < 0) rep.first_step_over_tol = k;
      if (!(res <= rep.max_residual)) {
        rep.max_residual = std::isnan(res) ? std::numeric_limits<double>::infinity() : res;
        rep.worst_step = k;
      }
    }
  }
  return rep;
}

Mat compensated_product(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw ValidationError("compensated_product: shape mismatch");
  Mat out(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      CompensatedSum s;
      for (Eigen::Index t = 0; t < a.cols(); ++t) s.add(a(i, t) * b(t, j));
      out(i, j) = s.value();
    }
  }
  return out;
}

Mat transition_product(const Trajectory& traj, const GraphSchedule& schedule, double T, long from, long to) {
  if (from > to) throw std::out_of_range("transition_product: from > to");
  require_range(traj, from);
  require_range(traj, to);
  Mat gamma = psi_at(traj, schedule, T, from);
  for (long k = from + 1; k <= to; ++k) gamma = compensated_product(psi_at(traj, schedule, T, k), gamma);
  return gamma;
}

StochasticityReport stochasticity(const Trajectory& traj, const GraphSchedule& schedule, double T) {
  StochasticityReport rep;
  rep.min_entry_overall = std::numeric_limits<double>::infinity();
  rep.nonzero_floor = std::numeric_limits<double>::infinity();
  const int n = traj.n();
  for (long k = 0; k < traj.steps(); ++k) {
    const auto recs = records_at(traj, k);
    const SystemMatrices sm = build_psi(recs, schedule.graph_at(k), T, traj.algorithm());
    const double row_err = (sm.Psi.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double min_entry = sm.Psi.minCoeff();
    rep.row_sum_err.push_back(row_err);
    rep.min_entry.push_back(min_entry);
    if (row_err > rep.max_row_sum_err || rep.worst_row_step < 0) {
      rep.max_row_sum_err = std::max(rep.max_row_sum_err, row_err);
      rep.worst_row_step = k;
    }
    if (min_entry < rep.min_entry_overall) {
      rep.min_entry_overall = min_entry;
      rep.worst_entry_step = k;
    }
    bool all_unit = true;
    for (int i = 0; i < n; ++i) {
      rep.min_sigma = std::min(rep.min_sigma, recs[i].sigma);
      all_unit = all_unit && recs[i].sigma == 1.0;
    }
    if (all_unit && is_balanced(schedule.graph_at(k))) {
      const double col_err = (sm.Psi.colwise().sum().array() - 1.0).abs().maxCoeff();
      rep.max_col_sum_err = std::max(rep.max_col_sum_err, col_err);
      ++rep.col_checked_steps;
    }
    for (Eigen::Index idx = 0; idx < sm.coupling.size(); ++idx) {
      const double x = sm.coupling.data()[idx];
      if (x > 0.0 && x < rep.nonzero_floor) {
        rep.nonzero_floor = x;
        rep.nonzero_floor_step = k;
      }
    }
  }
  if (traj.steps() == 0) {
    rep.min_entry_overall = 0.0;
    rep.nonzero_floor = 0.0;
  }
  return rep;
}

std::vector<WindowReport> window_products(const Trajectory& traj, const GraphSchedule& schedule, double T, long len) {
  if (len < 1) throw ValidationError("window_products: window length must be positive");
  std::vector<WindowReport> out;
  for (long from = 0; from + len <= traj.steps(); from += len) {
    WindowReport w;
    w.from = from;
    w.to = from + len - 1;
    const Mat gamma = transition_product(traj, schedule, T, w.from, w.to);
    w.row_sum_err = (gamma.rowwise().sum().array() - 1.0).abs().maxCoeff();
    w.min_entry = gamma.minCoeff();
    w.mu_hat = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < gamma.cols(); ++c) {
      const double col_min = gamma.col(c).minCoeff();
      if (col_min > w.mu_hat) {
        w.mu_hat = col_min;
        w.positive_column = static_cast<int>(c);
      }
    }
    out.push_back(w);
  }
  return out;
}

double phi_spread(const Trajectory& traj, long k) {
  double spread = 0.0;
  for (Eigen::Index c = 0; c < traj.m(); ++c) {
    const Vec phi = transformed_state(traj, k, c);
    spread = std::max(spread, phi.maxCoeff() - phi.minCoeff());
  }
  return spread;
}

double grad_f_norm(const Trajectory& traj, long k) {
  double worst = 0.0;
  for (int i = 0; i < traj.n(); ++i) {
    const double scale = 2.0 * traj.sigma(k, i) / traj.b(k, i);
    worst = std::max(worst, scale * traj.theta(k, i).cwiseAbs().maxCoeff());
  }
  return worst;
}

MetricsSeries compute_metrics(const Trajectory& traj, const TeamObjective& team, const Vec& optimum) {
  MetricsSeries out;
  const int n = traj.n();
  const double best = team.eval(optimum);
  const long count = traj.steps() + 1;
  out.consensus_spread.reserve(count);
  out.optimality_gap.reserve(count);
  out.y_ratio_spread.reserve(count);
  out.state_envelope.reserve(count);
  for (long k = 0; k < count; ++k) {
    Vec mean = Vec::Zero(traj.m());
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = 0.0;
    double envelope = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto r = traj.r(k, i);
      mean += r;
      y_min = std::min(y_min, traj.y(k, i));
      y_max = std::max(y_max, traj.y(k, i));
      const Vec z = r + 2.0 / traj.p(k, i) * traj.v(k, i);
      envelope = std::max({envelope, r.norm(), z.norm()});
    }
    mean /= static_cast<double>(n);
    out.consensus_spread.push_back(phi_spread(traj, k));
    out.optimality_gap.push_back(std::abs(team.eval(mean) - best));
    out.y_ratio_spread.push_back(y_max / y_min - 1.0);
    out.state_envelope.push_back(envelope);
  }
  return out;
}

ContractionReport spread_contraction(const Trajectory& traj, long window, long eta) {
  if (window < 1) throw ValidationError("spread_contraction: window must be positive");
  ContractionReport rep;
  rep.window = window;
  const long steps = traj.steps();
  std::vector<double> tail_sup(steps + 1, 0.0);
  for (long k = steps - 1; k >= 0; --k) tail_sup[k] = std::max(tail_sup[k + 1], grad_f_norm(traj, k));
  const double slack_factor = 8.0 * traj.n() * static_cast<double>(eta + 1);

  for (long c = 0; c + window <= steps; c += window) {
    const double eps = tail_sup[c];
    const double excess = phi_spread(traj, c + window) - (phi_spread(traj, c) + slack_factor * eps);
    ++rep.checks;
    rep.epsilon_final = eps;
    if (excess > 0.0) {
      ++rep.violations;
      if (rep.first_violation < 0) rep.first_violation = c + window;
      rep.worst_excess = std::max(rep.worst_excess, excess);
    }
  }
  return rep;
}

std::vector<InvariantCheck> trajectory_invariants(const Trajectory& traj, const Scenario& sc) {
  std::vector<InvariantCheck> out;
  const auto flag = [](InvariantCheck& c, long k, const std::string& detail) {
    if (!c.passed) return;
    c.passed = false;
    c.first_step = k;
    c.detail = detail;
  };
  const auto who = [](int i) { return "agent " + std::to_string(i + 1); };

  InvariantCheck velocity{"velocity feasibility", true, -1, {}};
  for (long k = 0; k <= traj.steps() && velocity.passed; ++k) {
    for (int i = 0; i < traj.n(); ++i) {
      if (!membership(sc.agents[i].velocity_set, traj.v(k, i))) flag(velocity, k, who(i) + " velocity outside its set");
    }
  }
  out.push_back(velocity);

  if (sc.algorithm == Algorithm::B) {
    InvariantCheck position{"position feasibility", true, -1, {}};
    for (long k = 0; k <= traj.steps() && position.passed; ++k) {
      for (int i = 0; i < traj.n(); ++i) {
        const auto& h = sc.agents[i].position_region;
        if (!h) continue;
        const Vec r = traj.r(k, i);
        const double gap = (project(*h, r) - r).norm();
        if (!(gap < 1e-9)) flag(position, k, who(i) + " is " + std::to_string(gap) + " from its position region");
      }
    }
    out.push_back(position);
  }

  InvariantCheck sigma{"sigma in (0, 1]", true, -1, {}};
  for (long k = 0; k < traj.steps() && sigma.passed; ++k) {
    for (int i = 0; i < traj.n(); ++i) {
      const double s = traj.sigma(k, i);
      if (!(s > 0.0 && s <= 1.0)) flag(sigma, k, who(i) + " has sigma " + std::to_string(s));
    }
  }
  out.push_back(sigma);

  if (sc.algorithm == Algorithm::A) {
    InvariantCheck gain{"gain nondecreasing with p*T < 1", true, -1, {}};
    InvariantCheck unit{"sigma = 1 when theta != 0", true, -1, {}};
    for (long k = 0; k <= traj.steps(); ++k) {
      for (int i = 0; i < traj.n(); ++i) {
        const double p = traj.p(k, i);
        if (!(p * sc.T < 1.0)) flag(gain, k, who(i) + " has p*T >= 1");
        if (k > 0 && !(p >= traj.p(k - 1, i))) flag(gain, k, who(i) + " gain decreased");
        if (k < traj.steps() && (traj.theta(k, i).array() != 0.0).any() && traj.sigma(k, i) != 1.0) {
          flag(unit, k, who(i) + " has theta != 0 with sigma " + std::to_string(traj.sigma(k, i)));
        }
      }
    }
    out.push_back(gain);
    out.push_back(unit);
  }
  return out;
}

}  // namespace swarm
