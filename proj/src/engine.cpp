#include "swarm_opt/engine.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace swarm {

const char* to_string(Algorithm a) { return a == Algorithm::A ? "A" : "B"; }

const char* to_string(ThetaBranch b) {
  switch (b) {
    case ThetaBranch::RuleA:
      return "RuleA";
    case ThetaBranch::RuleB:
      return "RuleB";
    case ThetaBranch::Gradient:
      return "Gradient";
  }
  return "?";
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string agent_name(int i) { return "agent " + std::to_string(i + 1); }

// arctan(e^s) with the exponential saturated before it overflows.
double atan_exp(double s) {
  if (s > 700.0) return std::numbers::pi / 2.0;
  return std::atan(std::exp(s));
}

double max_in_weight(const GraphSchedule& s, int i) {
  double worst = 0.0;
  for (const auto& e : s.entries()) worst = std::max(worst, e.graph.in_weight(i));
  return worst;
}

void check_state(const AgentState& s, int i) {
  if (!all_finite(s.r) || !all_finite(s.v) || !std::isfinite(s.y) || !std::isfinite(s.p)) {
    throw AssumptionViolation("non-finite state for " + agent_name(i));
  }
}

bool differs(const Vec& a, const Vec& b, double tol) { return ((a - b).array().abs() > tol).any(); }

struct Pipeline {
  ThetaBranch branch;
  Vec theta;
  Vec u;
  double sigma;
};

// theta switching, shrink and sigma; shared by both algorithms.
Pipeline control(const AgentSpec& spec, const AgentState& s, const Vec& q, const Vec& w, bool use_rule_a,
                 const EngineTolerances& tol) {
  const Vec grad = spec.objective.gradient(w);
  const double root_y = std::sqrt(s.y);
  const Vec step = (s.p / (2.0 * root_y)) * grad;
  Pipeline out{ThetaBranch::Gradient, step, Vec(), 1.0};
  if (use_rule_a && root_y < grad.squaredNorm()) {
    out.branch = ThetaBranch::RuleA;
  } else {
    const Vec candidate = q - step;
    if (differs(candidate, shrink(spec.velocity_set, candidate, tol.segment).value, tol.tol_eq)) {
      out.branch = ThetaBranch::RuleB;
    }
  }
  if (out.branch != ThetaBranch::Gradient) out.theta = Vec::Zero(q.size());

  const Vec target = q - out.theta;
  Shrunk sh = shrink(spec.velocity_set, target, tol.segment);
  out.u = std::move(sh.value);
  out.sigma = target.norm() <= tol.tol_zero ? 1.0 : sh.scale;
  return out;
}

StepRecord make_record(long k, int i, const AgentState& s, Vec pi, Vec q, Vec w, const Pipeline& c, double b) {
  StepRecord rec;
  rec.k = k;
  rec.agent = i;
  rec.r = s.r;
  rec.v = s.v;
  rec.y = s.y;
  rec.p = s.p;
  rec.pi = std::move(pi);
  rec.q = std::move(q);
  rec.w = std::move(w);
  rec.theta = c.theta;
  rec.theta_branch = c.branch;
  rec.sigma = c.sigma;
  rec.b = b;
  rec.u = c.u;
  return rec;
}

void check_gain(const char* which, int i, double p, double T, double lii) {
  if (!(p * T < 1.0)) {
    throw AssumptionViolation(std::string(which) + " violated: " + agent_name(i) + " has p*T = " + fmt(p * T) +
                              " >= 1");
  }
  if (!(p > 2.0 * lii)) {
    throw AssumptionViolation(std::string(which) + " violated: " + agent_name(i) + " has p = " + fmt(p) +
                              " not above 2*L_ii = " + fmt(2.0 * lii));
  }
}

void check_size(std::span<const AgentState> states, const Scenario& sc) {
  if (static_cast<int>(states.size()) != sc.n) throw ValidationError("state count does not match agent count");
}

}  // namespace

Vec consensus_term(int i, std::span<const AgentState> states, const WeightedDigraph& g, double T) {
  Vec acc = Vec::Zero(states[i].r.size());
  for (const auto& e : g.edges()) {
    if (e.to == i) acc += e.weight * (states[e.from].r - states[i].r);
  }
  return acc * T;
}

StepResult step_algorithm_A(long k, std::span<const AgentState> states, const Scenario& sc) {
  check_size(states, sc);
  const double T = sc.T;
  const WeightedDigraph& g = sc.schedule.graph_at(k);
  StepResult out;
  out.next.reserve(sc.n);
  out.records.reserve(sc.n);
  for (int i = 0; i < sc.n; ++i) {
    const AgentState& s = states[i];
    const AgentSpec& spec = sc.agents[i];
    check_state(s, i);
    check_gain("Assumption 3", i, s.p, T, g.in_weight(i));

    Vec pi = consensus_term(i, states, g, T);
    Vec q = s.v - s.p * T * s.v + (s.p / 2.0) * pi;
    Vec w = s.r + (2.0 / s.p) * s.v - T * s.v + pi;
    const Pipeline c = control(spec, s, q, w, true, sc.tol);

    const double b = (1.0 - c.sigma * (1.0 - s.p * T)) / T;
    if (!(b * T < 1.0)) {
      throw AssumptionViolation("Assumption 3 violated: " + agent_name(i) + " has b*T = " + fmt(b * T) +
                                " >= 1 (sigma = " + fmt(c.sigma) + ")");
    }

    AgentState next{s.r + T * s.v, c.u, s.y + atan_exp(s.r.norm()) * T, b};
    check_state(next, i);
    out.records.push_back(make_record(k, i, s, std::move(pi), std::move(q), std::move(w), c, b));
    out.next.push_back(std::move(next));
  }
  return out;
}

StepResult step_algorithm_B(long k, std::span<const AgentState> states, const Scenario& sc) {
  check_size(states, sc);
  const double T = sc.T;
  const WeightedDigraph& g = sc.schedule.graph_at(k);
  StepResult out;
  out.next.reserve(sc.n);
  out.records.reserve(sc.n);
  for (int i = 0; i < sc.n; ++i) {
    const AgentState& s = states[i];
    const AgentSpec& spec = sc.agents[i];
    check_state(s, i);
    check_gain("Assumption 7", i, s.p, T, g.in_weight(i));
    if (!spec.position_region) throw ValidationError(agent_name(i) + " has no position region");

    Vec pi = consensus_term(i, states, g, T);
    Vec q = s.v - s.p * T * s.v + (s.p / 4.0) * pi;
    Vec w = s.r + (2.0 / s.p) * s.v - T * s.v + 0.5 * pi;
    const Pipeline c = control(spec, s, q, w, false, sc.tol);
    const double b = (1.0 - c.sigma * (1.0 - s.p * T)) / T;

    AgentState next{project(*spec.position_region, s.r + T * s.v), c.u, s.y + atan_exp(s.r.norm()) * T, s.p};
    check_state(next, i);
    out.records.push_back(make_record(k, i, s, std::move(pi), std::move(q), std::move(w), c, b));
    out.next.push_back(std::move(next));
  }
  return out;
}

ValidationReport check_scenario(const Scenario& sc) {
  ValidationReport rep;
  auto fail = [&](std::string msg) { rep.failures.push_back(std::move(msg)); };

  if (sc.n < 1) fail("agent count must be positive");
  if (sc.m < 1) fail("dimension must be positive");
  if (!(sc.T > 0.0) || !std::isfinite(sc.T)) fail("sampling period T must be positive");
  if (sc.horizon < 0) fail("horizon must be nonnegative");
  if (static_cast<int>(sc.agents.size()) != sc.n) {
    fail("agent list has " + std::to_string(sc.agents.size()) + " entries, expected " + std::to_string(sc.n));
  }
  if (sc.schedule.entries().empty() || sc.schedule.n() != sc.n) fail("schedule agent count does not match n");
  if (!rep.ok()) return rep;

  for (int i = 0; i < sc.n; ++i) {
    const auto& a = sc.agents[i];
    const auto& s = a.initial;
    const std::string who = agent_name(i);
    if (a.objective.dim() != sc.m) fail(who + ": objective dimension mismatch");
    if (a.velocity_set.dim() != sc.m) fail(who + ": velocity set dimension mismatch");
    if (a.position_region && a.position_region->dim() != sc.m) fail(who + ": position region dimension mismatch");
    if (s.r.size() != sc.m || s.v.size() != sc.m) fail(who + ": initial state dimension mismatch");
    if (!all_finite(s.r) || !all_finite(s.v) || !std::isfinite(s.y) || !std::isfinite(s.p)) {
      fail(who + ": non-finite initial state");
    }
    if (!(s.y > 0.0)) fail(who + ": y(0) must be positive");
    if (!(s.p > 0.0)) fail(who + ": p(0) must be positive");
  }
  if (!rep.ok()) return rep;

  rep.topology = validate_schedule(sc.schedule);
  for (const auto& f : rep.topology.failures) fail(f);

  const char* gain_rule = sc.algorithm == Algorithm::A ? "Assumption 3" : "Assumption 7";
  for (int i = 0; i < sc.n; ++i) {
    const auto& a = sc.agents[i];
    const double p0 = a.initial.p;
    const double lii = max_in_weight(sc.schedule, i);
    rep.d.push_back((p0 / 2.0 + lii) / 2.0);
    if (!(p0 * sc.T < 1.0)) {
      fail(std::string(gain_rule) + " violated: " + agent_name(i) + " has p(0)*T = " + fmt(p0 * sc.T) + " >= 1");
    }
    if (!(2.0 * lii < p0)) {
      fail(std::string(gain_rule) + " violated: " + agent_name(i) + " has p(0) = " + fmt(p0) +
           " not above 2*max L_ii = " + fmt(2.0 * lii));
    }

    const Vec v0 = shrink(a.velocity_set, a.initial.v, sc.tol.segment).value;
    if (differs(v0, a.initial.v, sc.tol.tol_eq)) {
      fail("Assumption 1 violated: initial velocity of " + agent_name(i) + " is not its own shrink image");
    }

    CertReport cert;
    const auto same = std::find_if(sc.agents.begin(), sc.agents.begin() + i,
                                   [&](const AgentSpec& other) { return other.velocity_set == a.velocity_set; });
    if (same != sc.agents.begin() + i) {
      cert = rep.velocity_certs[same - sc.agents.begin()];
    } else {
      cert = certify_velocity_set(a.velocity_set, 64, sc.tol.segment);
    }
    if (!cert.valid) {
      fail("Assumption 1 violated: velocity set of " + agent_name(i) + " has sampled reach bounds [" +
           fmt(cert.rho_lower) + ", " + fmt(cert.rho_upper) + "]");
    }
    rep.velocity_certs.push_back(cert);
  }

  if (sc.algorithm == Algorithm::B) {
    std::vector<ConvexRegion> regions;
    for (int i = 0; i < sc.n; ++i) {
      const auto& a = sc.agents[i];
      if (!a.position_region) {
        fail("Assumption 6 violated: " + agent_name(i) + " has no position region");
        continue;
      }
      if (!a.position_region->is_bounded()) {
        fail("Assumption 6 violated: position region of " + agent_name(i) + " is unbounded");
        continue;
      }
      regions.push_back(*a.position_region);
      const Vec r0 = project(*a.position_region, a.initial.r);
      if ((r0 - a.initial.r).norm() > 1e-9) {
        fail("initial position of " + agent_name(i) + " is outside its position region");
      }
    }
    if (static_cast<int>(regions.size()) == sc.n) {
      const Vec probe = project_intersection(regions, Vec::Zero(sc.m));
      for (const auto& h : regions) {
        if ((project(h, probe) - probe).norm() > 1e-6) {
          fail("Assumption 6 violated: position regions have an empty intersection");
          break;
        }
      }
    }
  }
  return rep;
}

ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport rep = check_scenario(sc);
  if (!rep.ok()) {
    std::string msg = "scenario '" + sc.name + "' failed validation:";
    for (const auto& f : rep.failures) msg += "\n  " + f;
    throw ValidationError(msg);
  }
  return rep;
}

Trajectory::Trajectory(Algorithm algorithm, int n, int m) : algorithm_(algorithm), n_(n), m_(m) {}

void Trajectory::push_states(std::span<const AgentState> states) {
  for (const auto& s : states) {
    r_.insert(r_.end(), s.r.data(), s.r.data() + m_);
    v_.insert(v_.end(), s.v.data(), s.v.data() + m_);
    y_.push_back(s.y);
    p_.push_back(s.p);
  }
}

void Trajectory::push_records(std::span<const StepRecord> records) {
  const auto put = [this](std::vector<double>& dst, const Vec& x) {
    if (x.size() == m_) {
      dst.insert(dst.end(), x.data(), x.data() + m_);
    } else {
      dst.insert(dst.end(), m_, std::numeric_limits<double>::quiet_NaN());
    }
  };
  for (const auto& rec : records) {
    put(pi_, rec.pi);
    put(q_, rec.q);
    put(w_, rec.w);
    put(theta_, rec.theta);
    put(u_, rec.u);
    sigma_.push_back(rec.sigma);
    b_.push_back(rec.b);
    branch_.push_back(rec.theta_branch);
  }
}

AgentState Trajectory::state(long k, int i) const { return {r(k, i), v(k, i), y(k, i), p(k, i)}; }

std::vector<AgentState> Trajectory::states_at(long k) const {
  std::vector<AgentState> out;
  out.reserve(n_);
  for (int i = 0; i < n_; ++i) out.push_back(state(k, i));
  return out;
}

StepRecord Trajectory::record(long k, int i) const {
  if (k < 0 || k >= steps()) throw std::out_of_range("trajectory record index out of range");
  const std::size_t o = vec_at(k, i);
  const auto vec = [&](const std::vector<double>& src) { return Vec(Eigen::Map<const Vec>(&src[o], m_)); };
  StepRecord rec;
  rec.k = k;
  rec.agent = i;
  rec.r = r(k, i);
  rec.v = v(k, i);
  rec.y = y(k, i);
  rec.p = p(k, i);
  rec.pi = vec(pi_);
  rec.q = vec(q_);
  rec.w = vec(w_);
  rec.theta = vec(theta_);
  rec.theta_branch = branch_[at(k, i)];
  rec.sigma = sigma_[at(k, i)];
  rec.b = b_[at(k, i)];
  rec.u = vec(u_);
  return rec;
}

void Trajectory::set_theta(long k, int i, const Vec& theta) {
  if (theta.size() != m_) throw ValidationError("set_theta: dimension mismatch");
  std::copy(theta.data(), theta.data() + m_, theta_.begin() + static_cast<std::ptrdiff_t>(vec_at(k, i)));
}

Trajectory run(const Scenario& sc, std::optional<long> horizon, const StepObserver& observer) {
  validate_scenario(sc);
  const long steps = horizon.value_or(sc.horizon);
  if (steps < 0) throw ValidationError("horizon must be nonnegative");

  Trajectory traj(sc.algorithm, sc.n, sc.m);
  std::vector<AgentState> states;
  states.reserve(sc.n);
  for (const auto& a : sc.agents) states.push_back(a.initial);
  traj.push_states(states);

  const auto step = sc.algorithm == Algorithm::A ? step_algorithm_A : step_algorithm_B;
  for (long k = 0; k < steps; ++k) {
    StepResult res;
    try {
      res = step(k, states, sc);
    } catch (const AssumptionViolation& e) {
      throw AssumptionViolation("step " + std::to_string(k) + ": " + e.what());
    }
    if (observer) observer(k, res.records);
    traj.push_records(res.records);
    traj.push_states(res.next);
    states = std::move(res.next);
  }
  return traj;
}

}  // namespace swarm
