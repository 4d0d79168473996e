#pragma once

#include <span>
#include <variant>
#include <vector>

#include "swarm_opt/common.hpp"
#include "swarm_opt/geometry.hpp"

namespace swarm {

class Objective;

// sum_d w_d (x_d - c_d)^2
struct ShiftedQuadratic {
  Vec center;
  Vec weights;
};

// sum_d w_d (x_d - c_d)^4
struct ShiftedQuartic {
  Vec center;
  Vec weights;
};

struct ObjectiveSum {
  std::vector<Objective> members;
};

/// Differentiable convex local objective. Positive weights keep the
/// stationary set nonempty and bounded.
class Objective {
 public:
  using Form = std::variant<ShiftedQuadratic, ShiftedQuartic, ObjectiveSum>;

  static Objective quadratic(Vec center, Vec weights);
  static Objective quartic(Vec center, Vec weights);
  static Objective sum(std::vector<Objective> members);

  const Form& form() const { return form_; }
  Eigen::Index dim() const;

  double eval(const Vec& x) const;
  Vec gradient(const Vec& x) const;

  // Centroid of the member centers; the starting point of the oracle minimizer.
  Vec center_hint() const;

  bool operator==(const Objective& other) const;

 private:
  explicit Objective(Form f) : form_(std::move(f)) {}
  void collect_centers(std::vector<Vec>& out) const;
  Form form_;
};

/// Central differences, one coordinate at a time.
Vec finite_diff_gradient(const Objective& f, const Vec& x, double h);

class TeamObjective {
 public:
  explicit TeamObjective(std::vector<Objective> members);

  const std::vector<Objective>& members() const { return members_; }
  Eigen::Index dim() const { return members_.front().dim(); }
  double eval(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Vec center_hint() const;

 private:
  std::vector<Objective> members_;
};

struct MinimizeOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double tol = 1e-10;
  long max_iterations = 1'000'000;
};

/// Projected gradient descent with backtracking over the intersection of
/// `regions` (all of R^m when empty). Throws std::runtime_error("oracle
/// failed") when the iteration cap is hit.
Vec minimize_team(const TeamObjective& team, std::span<const ConvexRegion> regions,
                  const MinimizeOptions& opts = {});

}  // namespace swarm
