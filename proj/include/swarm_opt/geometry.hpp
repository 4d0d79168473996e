#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "swarm_opt/common.hpp"

namespace swarm {

// Inclusion tolerance applied to every primitive's defining inequalities.
inline constexpr double kTolMembership = 1e-12;

struct Ball {
  Vec center;
  double radius = 1.0;
};

struct Box {
  Vec lower;
  Vec upper;
};

// {x : normals[i] . x <= offsets[i] for all i}, with a point known to satisfy
// every inequality.
struct HalfspaceIntersection {
  std::vector<Vec> normals;
  std::vector<double> offsets;
  Vec witness;
};

struct WholeSpace {
  Eigen::Index dim = 0;
};

struct ProjectionOptions {
  int max_sweeps = 10000;
  double tol = 1e-10;
};

struct RayInterval {
  double lo = 1.0;
  double hi = 0.0;
  bool empty() const { return lo > hi; }
};

/// Closed convex set with an exact (Ball, Box, WholeSpace) or iterative
/// (HalfspaceIntersection) Euclidean projection. Instances are validated on
/// construction and immutable afterwards.
class ConvexRegion {
 public:
  using Shape = std::variant<Ball, Box, HalfspaceIntersection, WholeSpace>;

  static ConvexRegion ball(Vec center, double radius);
  static ConvexRegion box(Vec lower, Vec upper);
  static ConvexRegion halfspaces(std::vector<Vec> normals, std::vector<double> offsets, Vec witness);
  static ConvexRegion whole_space(Eigen::Index dim);

  const Shape& shape() const { return shape_; }
  Eigen::Index dim() const;
  bool is_bounded() const;
  bool contains(const Vec& x, double tol = kTolMembership) const;

  // Closed interval {t >= 0 : t * dir in region}. Only Ball and Box have a
  // closed form; other shapes return std::nullopt.
  std::optional<RayInterval> ray_interval(const Vec& dir) const;

  bool operator==(const ConvexRegion& other) const;

 private:
  explicit ConvexRegion(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

/// Nearest point of `region` to `x`. Throws ValidationError("invalid point")
/// for non-finite input.
Vec project(const ConvexRegion& region, const Vec& x, const ProjectionOptions& opts = {});

/// Nearest point of the intersection of `regions` (Dykstra's alternating
/// projections). Used for the constrained team optimum over H = H_1 ∩ ... ∩ H_n.
Vec project_intersection(std::span<const ConvexRegion> regions, const Vec& x,
                         const ProjectionOptions& opts = {});

struct SegmentOptions {
  int n_alpha = 256;
  double tol_beta = 1e-9;
};

/// Possibly nonconvex, bounded velocity set stored as a union of bounded
/// convex pieces. The origin must lie in at least one piece.
class VelocitySet {
 public:
  // bounding_radius may be omitted when every piece is a Ball or a Box.
  explicit VelocitySet(std::vector<ConvexRegion> pieces, std::optional<double> bounding_radius = std::nullopt);

  const std::vector<ConvexRegion>& pieces() const { return pieces_; }
  double bounding_radius() const { return bounding_radius_; }
  Eigen::Index dim() const { return pieces_.front().dim(); }
  // True when every piece has a closed-form ray interval.
  bool analytic() const { return analytic_; }

  bool contains(const Vec& x) const;

  bool operator==(const VelocitySet& other) const = default;

 private:
  std::vector<ConvexRegion> pieces_;
  double bounding_radius_ = 0.0;
  bool analytic_ = true;
};

/// Membership in the union; throws on non-finite input.
bool membership(const VelocitySet& set, const Vec& x);

/// Largest beta <= bounding_radius with the whole segment [0, beta * dir]
/// inside the set. Exact ray-interval merging for Ball/Box unions, otherwise
/// the sampled bisection below.
double max_segment_beta(const VelocitySet& set, const Vec& direction, const SegmentOptions& opts = {});

/// Bisection on beta, testing containment of the segment at n_alpha evenly
/// spaced sample points.
double max_segment_beta_bisect(const VelocitySet& set, const Vec& direction, const SegmentOptions& opts = {});

struct Shrunk {
  Vec value;           // scale * x
  double scale = 1.0;  // in [0, 1]; 1 for x = 0
};

/// Longest vector along x whose segment from the origin stays in the set,
/// capped at |x|. Returns x itself (bitwise) when no shrinking is needed.
Shrunk shrink(const VelocitySet& set, const Vec& x, const SegmentOptions& opts = {});

struct CertReport {
  double rho_upper = 0.0;  // max over sampled directions of max_segment_beta
  double rho_lower = 0.0;  // min over sampled directions that leave the set
  int n_dirs = 0;
  bool valid = false;
  bool sampled = true;  // estimates come from direction sampling, not exact extrema
};

/// Sampled estimates of the largest and smallest reach of the shrink
/// operator. Requires n_dirs >= 8.
CertReport certify_velocity_set(const VelocitySet& set, int n_dirs, const SegmentOptions& opts = {});

/// Deterministic set of unit directions in R^dim (evenly spaced angles for
/// dim 2, axes plus seeded Gaussian samples otherwise).
std::vector<Vec> sample_directions(Eigen::Index dim, int count, unsigned long long seed = 0x5eed);

}  // namespace swarm
