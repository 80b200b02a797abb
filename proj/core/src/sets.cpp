#include "radialfeas/sets.hpp"

#include <algorithm>
#include <cmath>

namespace radialfeas {

namespace {

constexpr double kLevelRootTol = 1e-12;
constexpr double kBracketCap = 1e12;

double polytope_ray_time(const Polytope& p, const Vec& anchor, const Vec& d) {
  const Vec slack = p.b - p.A * anchor;  // validated > 0
  const Vec speed = p.A * d;
  double t = kInfiniteTime;
  for (int i = 0; i < speed.size(); ++i) {
    if (speed[i] > 0.0) t = std::min(t, slack[i] / speed[i]);
  }
  return t;
}

double ball_ray_time(const Ball& ball, const Vec& anchor, const Vec& d) {
  // Positive root of ||anchor + t d - c||^2 = R^2.
  const Vec e = anchor - ball.center;
  const double a = d.squaredNorm();
  if (a == 0.0) return kInfiniteTime;
  const double bq = e.dot(d);
  const double c = e.squaredNorm() - ball.radius * ball.radius;  // < 0 inside
  const double disc = bq * bq - a * c;
  return (-bq + std::sqrt(disc)) / a;
}

// Boundary faces of the capped simplex inside the hyperplane, in a fixed
// order: lower bounds w_i >= 0 first, then caps w_i <= c_i. Slacks are
// relative to the uniform anchor.
struct CappedFace {
  double speed;   // a_i^T d along the ray
  double margin;  // b_i - a_i^T u0
};

template <typename Fn>
void for_each_capped_face(const CappedSimplex& cs, const Vec& d, Fn&& fn) {
  const int n = static_cast<int>(cs.caps.size());
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) fn(i, CappedFace{-d[i], inv_n});
  for (int i = 0; i < n; ++i) fn(n + i, CappedFace{d[i], cs.caps[i] - inv_n});
}

}  // namespace

Vec hyperplane_project(const Vec& u) {
  require_finite(u, "hyperplane_project");
  const int n = static_cast<int>(u.size());
  return u - Vec::Constant(n, (u.sum() - 1.0) / n);
}

ConvexSet::ConvexSet(Geometry g, Vec anchor) : geometry_(std::move(g)), anchor_(std::move(anchor)) {
  validate();
}

ConvexSet ConvexSet::polytope(Mat A, Vec b, Vec anchor) {
  return ConvexSet(Polytope{std::move(A), std::move(b)}, std::move(anchor));
}

ConvexSet ConvexSet::ball(Vec center, double radius, Vec anchor) {
  return ConvexSet(Ball{std::move(center), radius}, std::move(anchor));
}

ConvexSet ConvexSet::ball(Vec center, double radius) {
  Vec anchor = center;
  return ConvexSet(Ball{std::move(center), radius}, std::move(anchor));
}

ConvexSet ConvexSet::capped_simplex(Vec caps) {
  const int n = static_cast<int>(caps.size());
  Vec anchor = Vec::Constant(n, 1.0 / n);
  return ConvexSet(CappedSimplex{std::move(caps)}, std::move(anchor));
}

ConvexSet ConvexSet::level_set(std::function<std::pair<double, Vec>(const Vec&)> h, Vec anchor) {
  return ConvexSet(LevelSet{std::move(h)}, std::move(anchor));
}

ConvexSet ConvexSet::box(const Vec& lower, const Vec& upper, Vec anchor) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n) throw InvalidInputError("box: bound size mismatch");
  Mat A(2 * n, n);
  Vec b(2 * n);
  A.topRows(n) = Mat::Identity(n, n);
  A.bottomRows(n) = -Mat::Identity(n, n);
  b.head(n) = upper;
  b.tail(n) = -lower;
  return polytope(std::move(A), std::move(b), std::move(anchor));
}

void ConvexSet::validate() const {
  require_finite(anchor_, "ConvexSet anchor");
  if (const auto* p = std::get_if<Polytope>(&geometry_)) {
    if (p->A.rows() < 1 || p->A.cols() < 1) throw InvalidInputError("Polytope: empty A");
    if (p->b.size() != p->A.rows()) throw InvalidInputError("Polytope: b size mismatch");
    if (p->A.cols() != anchor_.size()) throw InvalidInputError("Polytope: anchor dim mismatch");
    if (!all_finite(p->A) || !all_finite(p->b)) throw InvalidInputError("Polytope: non-finite data");
    for (int i = 0; i < p->A.rows(); ++i) {
      if (p->A.row(i).norm() == 0.0) throw InvalidInputError("Polytope: all-zero row");
    }
    const Vec slack = p->b - p->A * anchor_;
    if (slack.minCoeff() <= 0.0) throw InvalidInputError("Polytope: anchor not strictly interior");
  } else if (const auto* ball = std::get_if<Ball>(&geometry_)) {
    if (!(ball->radius > 0.0)) throw InvalidInputError("Ball: radius must be positive");
    if (ball->center.size() != anchor_.size()) throw InvalidInputError("Ball: dim mismatch");
    if ((anchor_ - ball->center).norm() >= ball->radius)
      throw InvalidInputError("Ball: anchor not strictly interior");
  } else if (const auto* cs = std::get_if<CappedSimplex>(&geometry_)) {
    const int n = static_cast<int>(cs->caps.size());
    if (n < 2) throw InvalidInputError("CappedSimplex: need at least 2 coordinates");
    for (int i = 0; i < n; ++i) {
      if (!(cs->caps[i] > 1.0 / n) || !(cs->caps[i] <= 1.0))
        throw InvalidInputError("CappedSimplex: caps must lie in (1/N, 1]");
    }
  } else if (const auto* ls = std::get_if<LevelSet>(&geometry_)) {
    if (!ls->h) throw InvalidInputError("LevelSet: missing callable");
    if (!(ls->h(anchor_).first < 0.0))
      throw InvalidInputError("LevelSet: anchor not strictly interior (h(u0) >= 0)");
  }
}

bool ConvexSet::contains(const Vec& x, double tol) const {
  require_finite(x, "contains");
  if (x.size() != anchor_.size()) throw InvalidInputError("contains: dimension mismatch");
  return max_violation(x) <= tol;
}

double ConvexSet::max_violation(const Vec& x) const {
  if (const auto* p = std::get_if<Polytope>(&geometry_)) {
    return (p->A * x - p->b).maxCoeff();
  }
  if (const auto* ball = std::get_if<Ball>(&geometry_)) {
    return (x - ball->center).norm() - ball->radius;
  }
  if (const auto* cs = std::get_if<CappedSimplex>(&geometry_)) {
    double v = std::abs(x.sum() - 1.0);
    v = std::max(v, (x - cs->caps).maxCoeff());
    v = std::max(v, (-x).maxCoeff());
    return v;
  }
  return std::get<LevelSet>(geometry_).h(x).first;
}

Vec ConvexSet::direction_from_anchor(const Vec& u) const {
  require_finite(u, "direction_from_anchor");
  if (u.size() != anchor_.size())
    throw InvalidInputError("direction_from_anchor: dimension mismatch");
  if (is_capped_simplex()) {
    // hyperplane_project(u) - u0 collapses to u - (1^T u / N) 1.
    const int n = dim();
    return u - Vec::Constant(n, u.sum() / n);
  }
  return u - anchor_;
}

double ConvexSet::ray_time_from_direction(const Vec& d) const {
  if (d.isZero(0.0)) return kInfiniteTime;
  if (const auto* p = std::get_if<Polytope>(&geometry_)) {
    return polytope_ray_time(*p, anchor_, d);
  }
  if (const auto* ball = std::get_if<Ball>(&geometry_)) {
    return ball_ray_time(*ball, anchor_, d);
  }
  if (const auto* cs = std::get_if<CappedSimplex>(&geometry_)) {
    double t = kInfiniteTime;
    for_each_capped_face(*cs, d, [&](int, const CappedFace& f) {
      if (f.speed > 0.0) t = std::min(t, f.margin / f.speed);
    });
    return t;
  }
  // Level set: phi(t) = h(u0 + t d) is convex in t with phi(0) < 0. Bracket
  // by doubling, bisect, then polish with Newton using the supplied gradient.
  const auto& h = std::get<LevelSet>(geometry_).h;
  auto phi = [&](double t) { return h(anchor_ + t * d); };
  const double scale = std::max(1.0, std::abs(phi(0.0).first));
  double hi = 1.0;
  while (phi(hi).first <= 0.0) {
    hi *= 2.0;
    if (hi > kBracketCap) return kInfiniteTime;
  }
  double lo = hi > 1.0 ? hi * 0.5 : 0.0;
  double mid = lo;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double v = phi(mid).first;
    if (std::abs(v) <= kLevelRootTol * scale) break;
    (v < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-17 * std::max(1.0, hi)) break;
  }
  // Newton polish; phi is increasing at its root along the ray.
  for (int it = 0; it < 4; ++it) {
    const auto [v, g] = phi(mid);
    const double slope = g.dot(d);
    if (slope <= 0.0) break;
    const double next = mid - v / slope;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    mid = next;
    if (std::abs(v) <= kLevelRootTol * scale) break;
  }
  return mid;
}

double ConvexSet::ray_boundary_time(const Vec& u) const {
  return ray_time_from_direction(direction_from_anchor(u));
}

ConvexSet::GaugeResult ConvexSet::gauge_and_gradient(const Vec& u) const {
  const Vec d = direction_from_anchor(u);
  if (d.isZero(0.0)) throw DegenerateRayError("gauge_and_gradient: u equals the anchor");

  GaugeResult out;
  out.gradient = Vec::Zero(dim());

  if (const auto* p = std::get_if<Polytope>(&geometry_)) {
    const Vec slack = p->b - p->A * anchor_;
    const Vec speed = p->A * d;
    double best = 0.0;
    int best_i = -1;
    for (int i = 0; i < speed.size(); ++i) {
      const double v = speed[i] / slack[i];
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    out.value = best;
    if (best_i >= 0) out.gradient = p->A.row(best_i).transpose() / slack[best_i];
    return out;
  }

  if (const auto* ball = std::get_if<Ball>(&geometry_)) {
    if ((anchor_ - ball->center).isZero(0.0)) {
      const double nd = d.norm();
      out.value = nd / ball->radius;
      out.gradient = d / (ball->radius * nd);
      return out;
    }
    // Off-center anchor: implicit differentiation through the boundary point.
    const double tbar = ball_ray_time(*ball, anchor_, d);
    const Vec z = anchor_ + tbar * d;
    const Vec grad_h = 2.0 * (z - ball->center);
    out.value = 1.0 / tbar;
    out.gradient = grad_h / (tbar * grad_h.dot(d));
    return out;
  }

  if (const auto* cs = std::get_if<CappedSimplex>(&geometry_)) {
    const int n = dim();
    double best = 0.0;
    int best_face = -1;
    for_each_capped_face(*cs, d, [&](int face, const CappedFace& f) {
      const double v = f.speed / f.margin;
      if (v > best) {
        best = v;
        best_face = face;
      }
    });
    out.value = best;
    if (best_face >= 0) {
      const bool lower = best_face < n;
      const int coord = lower ? best_face : best_face - n;
      const double margin = lower ? 1.0 / n : cs->caps[coord] - 1.0 / n;
      Vec a = Vec::Zero(n);
      a[coord] = lower ? -1.0 : 1.0;
      // Tangent representative of the face normal inside the hull.
      a.array() -= a.sum() / n;
      out.gradient = a / margin;
    }
    return out;
  }

  const double tbar = ray_time_from_direction(d);
  if (!std::isfinite(tbar)) {
    out.value = 0.0;
    return out;
  }
  const auto& h = std::get<LevelSet>(geometry_).h;
  const Vec grad_h = h(anchor_ + tbar * d).second;
  require_finite(grad_h, "LevelSet gradient");
  out.value = 1.0 / tbar;
  out.gradient = grad_h / (tbar * grad_h.dot(d));
  return out;
}

std::optional<double> ConvexSet::anchor_margin() const {
  if (const auto* p = std::get_if<Polytope>(&geometry_)) {
    const Vec slack = p->b - p->A * anchor_;
    double m = kInfiniteTime;
    for (int i = 0; i < p->A.rows(); ++i) m = std::min(m, slack[i] / p->A.row(i).norm());
    return m;
  }
  if (const auto* ball = std::get_if<Ball>(&geometry_)) {
    return ball->radius - (anchor_ - ball->center).norm();
  }
  if (const auto* cs = std::get_if<CappedSimplex>(&geometry_)) {
    const int n = dim();
    // Face normals lose 1/N of their length inside the hyperplane.
    const double tangent_norm = std::sqrt(1.0 - 1.0 / n);
    double m = (1.0 / n) / tangent_norm;
    for (int i = 0; i < n; ++i) m = std::min(m, (cs->caps[i] - 1.0 / n) / tangent_norm);
    return m;
  }
  return std::nullopt;
}

}  // namespace radialfeas
