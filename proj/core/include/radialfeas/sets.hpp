#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <variant>

#include "radialfeas/common.hpp"

namespace radialfeas {

// Convex geometries with a validated interior anchor. All ray quantities are
// measured in units of the direction vector d = u - u0 (not the unit
// direction), so the boundary time t_bar, the gauge value 1/t_bar and the
// scaling factor min(1, t_bar) are exact algebraic companions.

struct Polytope {
  Mat A;  // m x n, one constraint normal per row
  Vec b;  // m offsets, feasible iff A x <= b
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

// {w : w >= 0, 1^T w = 1, w <= caps}, handled inside the affine hull
// {1^T w = 1}. The anchor is the uniform vector and rays never leave the
// hyperplane.
struct CappedSimplex {
  Vec caps;
};

// Sublevel set {x : h(x) <= 0} of a convex function. The callable returns
// (value, gradient) at a point.
struct LevelSet {
  std::function<std::pair<double, Vec>(const Vec&)> h;
};

/// Projects onto the hyperplane {w : 1^T w = 1}.
Vec hyperplane_project(const Vec& u);

class ConvexSet {
 public:
  using Geometry = std::variant<Polytope, Ball, CappedSimplex, LevelSet>;

  struct GaugeResult {
    double value = 0.0;  // anchored Minkowski gauge of u - u0
    Vec gradient;        // a.e. gradient; tangent to the hull for CappedSimplex
  };

  // Constructors validate the anchor strictly interior (strict relative
  // interior for the capped simplex, whose anchor is fixed at 1/N).
  static ConvexSet polytope(Mat A, Vec b, Vec anchor);
  static ConvexSet ball(Vec center, double radius, Vec anchor);
  static ConvexSet ball(Vec center, double radius);  // anchor = center
  static ConvexSet capped_simplex(Vec caps);
  static ConvexSet level_set(std::function<std::pair<double, Vec>(const Vec&)> h, Vec anchor);
  static ConvexSet box(const Vec& lower, const Vec& upper, Vec anchor);  // polytope convenience

  int dim() const { return static_cast<int>(anchor_.size()); }
  const Vec& anchor() const { return anchor_; }
  const Geometry& geometry() const { return geometry_; }
  bool is_capped_simplex() const { return std::holds_alternative<CappedSimplex>(geometry_); }

  /// True iff every defining inequality holds within additive tolerance tol
  /// (the capped simplex also checks |1^T x - 1| <= tol).
  bool contains(const Vec& x, double tol = 0.0) const;

  /// Ray direction used by all radial queries: u - u0, projected into the
  /// sum-one hyperplane for the capped simplex.
  Vec direction_from_anchor(const Vec& u) const;

  /// t_bar = sup{t >= 0 : u0 + t d in C} with d = direction_from_anchor(u).
  /// Returns +inf for u = u0 and for recession directions.
  double ray_boundary_time(const Vec& u) const;

  /// Gauge value lambda = 1/t_bar and its a.e. gradient. Throws
  /// DegenerateRayError for u = u0. Polytope ties broken by smallest index.
  GaugeResult gauge_and_gradient(const Vec& u) const;

  /// Validated interior margin radius of the anchor (distance to the
  /// boundary, relative to the hull for the capped simplex). Not available
  /// for level sets.
  std::optional<double> anchor_margin() const;

  /// Worst signed violation: max over constraints of (lhs - rhs). Negative
  /// strictly inside. The capped simplex reports inequality slack only and
  /// adds |1^T x - 1| as a violation term.
  double max_violation(const Vec& x) const;

 private:
  ConvexSet(Geometry g, Vec anchor);
  void validate() const;

  double ray_time_from_direction(const Vec& d) const;

  Geometry geometry_;
  Vec anchor_;
};

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

}  // namespace radialfeas
