#include "swarm_opt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace swarm {
namespace {

bool same(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

void require_finite(const Vec& x, const char* what) {
  if (!x.allFinite()) throw ValidationError(what);
}

void require_dim(const Vec& x, Eigen::Index dim) {
  if (x.size() != dim) {
    throw ValidationError("dimension mismatch: expected " + std::to_string(dim) + ", got " +
                          std::to_string(x.size()));
  }
}

Vec project_halfspace(const Vec& normal, double offset, const Vec& x) {
  const double excess = normal.dot(x) - offset;
  if (excess <= 0.0) return x;
  return x - excess * normal;
}

// Dykstra's method: converges to the projection onto the intersection, unlike
// plain cyclic projection which only finds some point of it.
Vec dykstra(const std::vector<std::function<Vec(const Vec&)>>& projectors, const Vec& x0,
            const ProjectionOptions& opts) {
  Vec x = x0;
  std::vector<Vec> increments(projectors.size(), Vec::Zero(x0.size()));
  const double stop = opts.tol * 1e-3;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < projectors.size(); ++i) {
      const Vec shifted = x + increments[i];
      Vec next = projectors[i](shifted);
      Vec inc = shifted - next;
      change = std::max({change, (next - x).norm(), (inc - increments[i]).norm()});
      increments[i] = std::move(inc);
      x = std::move(next);
    }
    if (change < stop) break;
  }
  return x;
}

Vec project_halfspaces(const HalfspaceIntersection& h, const Vec& x, const ProjectionOptions& opts) {
  if (h.normals.size() == 1) return project_halfspace(h.normals[0], h.offsets[0], x);
  std::vector<std::function<Vec(const Vec&)>> projectors;
  projectors.reserve(h.normals.size());
  for (std::size_t i = 0; i < h.normals.size(); ++i) {
    projectors.emplace_back(
        [&n = h.normals[i], b = h.offsets[i]](const Vec& y) { return project_halfspace(n, b, y); });
  }
  return dykstra(projectors, x, opts);
}

// The polyhedron is bounded iff its recession cone {d : N d <= 0} is {0},
// iff every +-e_j lies in the polar cone, iff P_cone(+-e_j) = 0.
bool halfspaces_bounded(const HalfspaceIntersection& h) {
  HalfspaceIntersection cone{h.normals, std::vector<double>(h.normals.size(), 0.0), Vec::Zero(h.witness.size())};
  const Eigen::Index dim = h.witness.size();
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (double sign : {1.0, -1.0}) {
      Vec e = Vec::Zero(dim);
      e[j] = sign;
      if (project_halfspaces(cone, e, {}).norm() > 1e-8) return false;
    }
  }
  return true;
}

}  // namespace

ConvexRegion ConvexRegion::ball(Vec center, double radius) {
  if (center.size() == 0) throw ValidationError("ball: empty center");
  if (!center.allFinite() || !std::isfinite(radius)) throw ValidationError("ball: non-finite parameters");
  if (!(radius > 0.0)) throw ValidationError("ball: radius must be positive");
  return ConvexRegion(Ball{std::move(center), radius});
}

ConvexRegion ConvexRegion::box(Vec lower, Vec upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) throw ValidationError("box: bound dimensions differ");
  if (!lower.allFinite() || !upper.allFinite()) throw ValidationError("box: non-finite bounds");
  if ((lower.array() > upper.array()).any()) throw ValidationError("box: lower exceeds upper");
  return ConvexRegion(Box{std::move(lower), std::move(upper)});
}

ConvexRegion ConvexRegion::halfspaces(std::vector<Vec> normals, std::vector<double> offsets, Vec witness) {
  if (normals.empty()) throw ValidationError("halfspaces: no inequalities");
  if (normals.size() != offsets.size()) throw ValidationError("halfspaces: normals/offsets length mismatch");
  if (witness.size() == 0 || !witness.allFinite()) throw ValidationError("halfspaces: invalid witness");
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (normals[i].size() != witness.size()) throw ValidationError("halfspaces: normal dimension mismatch");
    if (!normals[i].allFinite() || !std::isfinite(offsets[i])) throw ValidationError("halfspaces: non-finite data");
    if (std::abs(normals[i].norm() - 1.0) > 1e-12) {
      throw ValidationError("halfspaces: normal " + std::to_string(i) + " is not unit norm");
    }
    if (normals[i].dot(witness) > offsets[i] + kTolMembership) {
      throw ValidationError("halfspaces: witness violates inequality " + std::to_string(i) + " (region may be empty)");
    }
  }
  return ConvexRegion(HalfspaceIntersection{std::move(normals), std::move(offsets), std::move(witness)});
}

ConvexRegion ConvexRegion::whole_space(Eigen::Index dim) {
  if (dim <= 0) throw ValidationError("whole_space: dimension must be positive");
  return ConvexRegion(WholeSpace{dim});
}

Eigen::Index ConvexRegion::dim() const {
  struct {
    Eigen::Index operator()(const Ball& b) const { return b.center.size(); }
    Eigen::Index operator()(const Box& b) const { return b.lower.size(); }
    Eigen::Index operator()(const HalfspaceIntersection& h) const { return h.witness.size(); }
    Eigen::Index operator()(const WholeSpace& w) const { return w.dim; }
  } visitor;
  return std::visit(visitor, shape_);
}

bool ConvexRegion::is_bounded() const {
  if (std::holds_alternative<WholeSpace>(shape_)) return false;
  if (const auto* h = std::get_if<HalfspaceIntersection>(&shape_)) return halfspaces_bounded(*h);
  return true;
}

bool ConvexRegion::contains(const Vec& x, double tol) const {
  require_dim(x, dim());
  struct {
    const Vec& x;
    double tol;
    bool operator()(const Ball& b) const { return (x - b.center).norm() <= b.radius + tol; }
    bool operator()(const Box& b) const {
      return ((x.array() >= b.lower.array() - tol) && (x.array() <= b.upper.array() + tol)).all();
    }
    bool operator()(const HalfspaceIntersection& h) const {
      for (std::size_t i = 0; i < h.normals.size(); ++i) {
        if (h.normals[i].dot(x) > h.offsets[i] + tol) return false;
      }
      return true;
    }
    bool operator()(const WholeSpace&) const { return true; }
  } visitor{x, tol};
  return std::visit(visitor, shape_);
}

std::optional<RayInterval> ConvexRegion::ray_interval(const Vec& dir) const {
  require_dim(dir, dim());
  if (const auto* b = std::get_if<Ball>(&shape_)) {
    // |t d - c|^2 = r^2 with |d| = 1
    const double half_b = dir.dot(b->center);
    const double disc = half_b * half_b - (b->center.squaredNorm() - b->radius * b->radius);
    if (disc < 0.0) return RayInterval{};
    const double root = std::sqrt(disc);
    const double hi = half_b + root;
    if (hi < 0.0) return RayInterval{};
    return RayInterval{std::max(0.0, half_b - root), hi};
  }
  if (const auto* box = std::get_if<Box>(&shape_)) {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < dir.size(); ++j) {
      if (dir[j] == 0.0) {
        if (box->lower[j] > 0.0 || box->upper[j] < 0.0) return RayInterval{};
        continue;
      }
      const double t1 = box->lower[j] / dir[j];
      const double t2 = box->upper[j] / dir[j];
      lo = std::max(lo, std::min(t1, t2));
      hi = std::min(hi, std::max(t1, t2));
    }
    return RayInterval{lo, hi};
  }
  return std::nullopt;
}

bool ConvexRegion::operator==(const ConvexRegion& other) const {
  if (shape_.index() != other.shape_.index()) return false;
  if (const auto* a = std::get_if<Ball>(&shape_)) {
    const auto& b = std::get<Ball>(other.shape_);
    return same(a->center, b.center) && a->radius == b.radius;
  }
  if (const auto* a = std::get_if<Box>(&shape_)) {
    const auto& b = std::get<Box>(other.shape_);
    return same(a->lower, b.lower) && same(a->upper, b.upper);
  }
  if (const auto* a = std::get_if<HalfspaceIntersection>(&shape_)) {
    const auto& b = std::get<HalfspaceIntersection>(other.shape_);
    if (a->normals.size() != b.normals.size() || a->offsets != b.offsets || !same(a->witness, b.witness)) return false;
    for (std::size_t i = 0; i < a->normals.size(); ++i) {
      if (!same(a->normals[i], b.normals[i])) return false;
    }
    return true;
  }
  return std::get<WholeSpace>(shape_).dim == std::get<WholeSpace>(other.shape_).dim;
}

Vec project(const ConvexRegion& region, const Vec& x, const ProjectionOptions& opts) {
  require_finite(x, "invalid point");
  require_dim(x, region.dim());
  const auto& shape = region.shape();
  if (const auto* b = std::get_if<Ball>(&shape)) {
    const Vec d = x - b->center;
    const double dist = d.norm();
    if (dist <= b->radius) return x;
    return b->center + d * (b->radius / dist);
  }
  if (const auto* box = std::get_if<Box>(&shape)) {
    return x.cwiseMax(box->lower).cwiseMin(box->upper);
  }
  if (const auto* h = std::get_if<HalfspaceIntersection>(&shape)) {
    return project_halfspaces(*h, x, opts);
  }
  return x;
}

Vec project_intersection(std::span<const ConvexRegion> regions, const Vec& x, const ProjectionOptions& opts) {
  require_finite(x, "invalid point");
  if (regions.empty()) return x;
  if (regions.size() == 1) return project(regions.front(), x, opts);
  std::vector<std::function<Vec(const Vec&)>> projectors;
  projectors.reserve(regions.size());
  for (const auto& region : regions) {
    projectors.emplace_back([&region, &opts](const Vec& y) { return project(region, y, opts); });
  }
  return dykstra(projectors, x, opts);
}

VelocitySet::VelocitySet(std::vector<ConvexRegion> pieces, std::optional<double> bounding_radius)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ValidationError("velocity set: no pieces");
  const Eigen::Index dim = pieces_.front().dim();
  double computed = 0.0;
  bool origin_inside = false;
  const Vec origin = Vec::Zero(dim);
  for (const auto& piece : pieces_) {
    if (piece.dim() != dim) throw ValidationError("velocity set: pieces have different dimensions");
    if (!piece.is_bounded()) throw ValidationError("velocity set: every piece must be bounded");
    if (const auto* b = std::get_if<Ball>(&piece.shape())) {
      computed = std::max(computed, b->center.norm() + b->radius);
    } else if (const auto* box = std::get_if<Box>(&piece.shape())) {
      computed = std::max(computed, box->lower.cwiseAbs().cwiseMax(box->upper.cwiseAbs()).norm());
    } else {
      analytic_ = false;
    }
    origin_inside = origin_inside || piece.contains(origin);
  }
  if (!origin_inside) throw ValidationError("velocity set: origin is not in any piece");
  if (bounding_radius) {
    if (!(*bounding_radius > 0.0) || !std::isfinite(*bounding_radius)) {
      throw ValidationError("velocity set: bounding_radius must be positive");
    }
    if (analytic_ && *bounding_radius < computed * (1.0 - 1e-12)) {
      throw ValidationError("velocity set: bounding_radius does not enclose the pieces");
    }
    bounding_radius_ = *bounding_radius;
  } else {
    if (!analytic_) throw ValidationError("velocity set: bounding_radius is required for halfspace pieces");
    bounding_radius_ = computed;
  }
}

bool VelocitySet::contains(const Vec& x) const {
  return std::any_of(pieces_.begin(), pieces_.end(), [&](const ConvexRegion& p) { return p.contains(x); });
}

bool membership(const VelocitySet& set, const Vec& x) {
  require_finite(x, "invalid point");
  return set.contains(x);
}

namespace {

void require_unit(const Vec& direction, Eigen::Index dim) {
  require_dim(direction, dim);
  require_finite(direction, "invalid direction");
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw ValidationError("direction not unit norm");
}

// Touching intervals closer than this are merged.
constexpr double kTouchTol = 1e-12;

double merged_reach(const VelocitySet& set, const Vec& direction) {
  std::vector<RayInterval> intervals;
  intervals.reserve(set.pieces().size());
  for (const auto& piece : set.pieces()) {
    const RayInterval iv = *piece.ray_interval(direction);
    if (!iv.empty()) intervals.push_back(iv);
  }
  double reach = 0.0;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& iv : intervals) {
      if (iv.lo <= reach + kTouchTol && iv.hi > reach) {
        reach = iv.hi;
        grew = true;
      }
    }
  }
  return reach;
}

}  // namespace

double max_segment_beta(const VelocitySet& set, const Vec& direction, const SegmentOptions& opts) {
  require_unit(direction, set.dim());
  if (!set.analytic()) return max_segment_beta_bisect(set, direction, opts);
  return std::min(merged_reach(set, direction), set.bounding_radius());
}

double max_segment_beta_bisect(const VelocitySet& set, const Vec& direction, const SegmentOptions& opts) {
  require_unit(direction, set.dim());
  if (opts.n_alpha < 2) throw ValidationError("n_alpha must be at least 2");
  const auto segment_inside = [&](double beta) {
    for (int j = 0; j < opts.n_alpha; ++j) {
      const double alpha = static_cast<double>(j) / (opts.n_alpha - 1);
      if (!set.contains(alpha * beta * direction)) return false;
    }
    return true;
  };
  const double radius = set.bounding_radius();
  if (segment_inside(radius)) return radius;
  double lo = 0.0;
  double hi = radius;
  while (hi - lo > opts.tol_beta) {
    const double mid = 0.5 * (lo + hi);
    (segment_inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

Shrunk shrink(const VelocitySet& set, const Vec& x, const SegmentOptions& opts) {
  require_finite(x, "invalid point");
  require_dim(x, set.dim());
  const double length = x.norm();
  if (length == 0.0) return {x, 1.0};
  const double beta = max_segment_beta(set, x / length, opts);
  if (beta >= length) return {x, 1.0};
  const double scale = beta / length;
  return {scale * x, scale};
}

std::vector<Vec> sample_directions(Eigen::Index dim, int count, unsigned long long seed) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / count;
      Vec d(2);
      d << std::cos(angle), std::sin(angle);
      dirs.push_back(d);
    }
    return dirs;
  }
  for (Eigen::Index j = 0; j < dim && static_cast<int>(dirs.size()) < count; ++j) {
    for (double sign : {1.0, -1.0}) {
      Vec e = Vec::Zero(dim);
      e[j] = sign;
      dirs.push_back(e);
    }
  }
  // Box-Muller on raw mt19937_64 output keeps the sequence identical across
  // standard libraries.
  std::mt19937_64 gen(seed);
  const auto uniform = [&gen] { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };
  while (static_cast<int>(dirs.size()) < count) {
    Vec d(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      d[j] = std::sqrt(-2.0 * std::log(uniform())) * std::cos(2.0 * std::numbers::pi * uniform());
    }
    const double len = d.norm();
    if (len > 1e-12) dirs.push_back(d / len);
  }
  return dirs;
}

CertReport certify_velocity_set(const VelocitySet& set, int n_dirs, const SegmentOptions& opts) {
  if (n_dirs < 8) throw ValidationError("certify_velocity_set: n_dirs must be at least 8");
  CertReport report;
  report.n_dirs = n_dirs;
  report.rho_upper = 0.0;
  report.rho_lower = std::numeric_limits<double>::infinity();
  for (const Vec& d : sample_directions(set.dim(), n_dirs)) {
    const double beta = max_segment_beta(set, d, opts);
    report.rho_upper = std::max(report.rho_upper, beta);
    // The set is bounded, so every ray eventually leaves it and each sampled
    // direction carries points outside the set.
    report.rho_lower = std::min(report.rho_lower, beta);
  }
  report.valid = report.rho_upper > kTolMembership && report.rho_lower > kTolMembership;
  return report;
}

}  // namespace swarm
