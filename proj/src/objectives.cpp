#include "swarm_opt/objectives.hpp"

#include <cmath>

namespace swarm {
namespace {

void check_pair(const Vec& center, const Vec& weights, const char* kind) {
  if (center.size() == 0 || center.size() != weights.size()) {
    throw ValidationError(std::string(kind) + ": center and weights must have the same nonzero length");
  }
  if (!center.allFinite() || !weights.allFinite()) throw ValidationError(std::string(kind) + ": non-finite data");
  if ((weights.array() <= 0.0).any()) throw ValidationError(std::string(kind) + ": weights must be positive");
}

void check_point(const Vec& x, Eigen::Index dim) {
  if (x.size() != dim) {
    throw ValidationError("objective: dimension mismatch: expected " + std::to_string(dim) + ", got " +
                          std::to_string(x.size()));
  }
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

}  // namespace

Objective Objective::quadratic(Vec center, Vec weights) {
  check_pair(center, weights, "quadratic");
  return Objective(ShiftedQuadratic{std::move(center), std::move(weights)});
}

Objective Objective::quartic(Vec center, Vec weights) {
  check_pair(center, weights, "quartic");
  return Objective(ShiftedQuartic{std::move(center), std::move(weights)});
}

Objective Objective::sum(std::vector<Objective> members) {
  if (members.empty()) throw ValidationError("sum: no members");
  for (const auto& m : members) {
    if (m.dim() != members.front().dim()) throw ValidationError("sum: members have different dimensions");
  }
  return Objective(ObjectiveSum{std::move(members)});
}

Eigen::Index Objective::dim() const {
  if (const auto* q = std::get_if<ShiftedQuadratic>(&form_)) return q->center.size();
  if (const auto* q = std::get_if<ShiftedQuartic>(&form_)) return q->center.size();
  return std::get<ObjectiveSum>(form_).members.front().dim();
}

double Objective::eval(const Vec& x) const {
  check_point(x, dim());
  if (const auto* q = std::get_if<ShiftedQuadratic>(&form_)) {
    return (q->weights.array() * (x - q->center).array().square()).sum();
  }
  if (const auto* q = std::get_if<ShiftedQuartic>(&form_)) {
    return (q->weights.array() * (x - q->center).array().square().square()).sum();
  }
  double total = 0.0;
  for (const auto& m : std::get<ObjectiveSum>(form_).members) total += m.eval(x);
  return total;
}

Vec Objective::gradient(const Vec& x) const {
  check_point(x, dim());
  if (const auto* q = std::get_if<ShiftedQuadratic>(&form_)) {
    return 2.0 * (q->weights.array() * (x - q->center).array()).matrix();
  }
  if (const auto* q = std::get_if<ShiftedQuartic>(&form_)) {
    return 4.0 * (q->weights.array() * (x - q->center).array().cube()).matrix();
  }
  Vec g = Vec::Zero(x.size());
  for (const auto& m : std::get<ObjectiveSum>(form_).members) g += m.gradient(x);
  return g;
}

void Objective::collect_centers(std::vector<Vec>& out) const {
  if (const auto* q = std::get_if<ShiftedQuadratic>(&form_)) {
    out.push_back(q->center);
  } else if (const auto* q = std::get_if<ShiftedQuartic>(&form_)) {
    out.push_back(q->center);
  } else {
    for (const auto& m : std::get<ObjectiveSum>(form_).members) m.collect_centers(out);
  }
}

Vec Objective::center_hint() const {
  std::vector<Vec> centers;
  collect_centers(centers);
  Vec mean = Vec::Zero(dim());
  for (const auto& c : centers) mean += c;
  return mean / static_cast<double>(centers.size());
}

bool Objective::operator==(const Objective& other) const {
  if (form_.index() != other.form_.index()) return false;
  if (const auto* a = std::get_if<ShiftedQuadratic>(&form_)) {
    const auto& b = std::get<ShiftedQuadratic>(other.form_);
    return same(a->center, b.center) && same(a->weights, b.weights);
  }
  if (const auto* a = std::get_if<ShiftedQuartic>(&form_)) {
    const auto& b = std::get<ShiftedQuartic>(other.form_);
    return same(a->center, b.center) && same(a->weights, b.weights);
  }
  return std::get<ObjectiveSum>(form_).members == std::get<ObjectiveSum>(other.form_).members;
}

Vec finite_diff_gradient(const Objective& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_gradient: step must be positive");
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    probe[d] = x[d] + h;
    const double up = f.eval(probe);
    probe[d] = x[d] - h;
    const double down = f.eval(probe);
    probe[d] = x[d];
    g[d] = (up - down) / (2.0 * h);
  }
  return g;
}

TeamObjective::TeamObjective(std::vector<Objective> members) : members_(std::move(members)) {
  if (members_.empty()) throw ValidationError("team objective: no members");
  for (const auto& m : members_) {
    if (m.dim() != members_.front().dim()) throw ValidationError("team objective: members have different dimensions");
  }
}

double TeamObjective::eval(const Vec& x) const {
  double total = 0.0;
  for (const auto& m : members_) total += m.eval(x);
  return total;
}

Vec TeamObjective::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim());
  for (const auto& m : members_) g += m.gradient(x);
  return g;
}

Vec TeamObjective::center_hint() const {
  Vec mean = Vec::Zero(dim());
  for (const auto& m : members_) mean += m.center_hint();
  return mean / static_cast<double>(members_.size());
}

Vec minimize_team(const TeamObjective& team, std::span<const ConvexRegion> regions, const MinimizeOptions& opts) {
  const ProjectionOptions proj{10000, 1e-13};
  const auto feasible = [&](const Vec& y) { return project_intersection(regions, y, proj); };
  Vec x = feasible(team.center_hint());
  double fx = team.eval(x);
  for (long it = 0; it < opts.max_iterations; ++it) {
    const Vec g = team.gradient(x);
    double step = opts.initial_step;
    Vec next;
    double fnext = 0.0;
    // Armijo condition along the projection arc.
    for (int tries = 0; tries < 200; ++tries) {
      next = feasible(x - step * g);
      fnext = team.eval(next);
      if (fnext <= fx + opts.sufficient_decrease * g.dot(next - x)) break;
      step *= opts.shrink;
    }
    const double moved = (next - x).norm();
    x = std::move(next);
    fx = fnext;
    if (moved < opts.tol) return x;
  }
  throw std::runtime_error("oracle failed");
}

}  // namespace swarm
