#include "radialfeas/radial.hpp"

#include <cmath>

namespace radialfeas {

namespace {

// Strict-interior headroom kept in floating point; see RadialContraction.
constexpr double kMaxContraction = 1.0 - 1e-12;
constexpr double kBoundaryBand = 1e-12;

Vec tangent_project(const Vec& g) {
  const int n = static_cast<int>(g.size());
  return g - Vec::Constant(n, g.sum() / n);
}

}  // namespace

const char* to_string(ContractionFamily f) {
  switch (f) {
    case ContractionFamily::rational: return "rational";
    case ContractionFamily::exponential: return "exponential";
    case ContractionFamily::hyperbolic: return "hyperbolic";
  }
  return "?";
}

ContractionFamily contraction_family_from_string(const std::string& s) {
  if (s == "rational") return ContractionFamily::rational;
  if (s == "exponential") return ContractionFamily::exponential;
  if (s == "hyperbolic") return ContractionFamily::hyperbolic;
  throw InvalidInputError("unknown contraction family: " + s);
}

ContractionValue RadialContraction::eval(double rho) const {
  if (!(rho >= 0.0)) throw InvalidInputError("RadialContraction: rho must be >= 0");
  const double one_m_eps = 1.0 - epsilon;
  ContractionValue out;
  switch (family) {
    case ContractionFamily::rational: {
      // r = eps + (1-eps) rho/(rho+lambda), written overflow-safe.
      out.r = epsilon + one_m_eps / (1.0 + lambda / std::max(rho, 1e-300));
      if (rho == 0.0) out.r = epsilon;
      const double denom = rho + lambda;
      out.r_prime = one_m_eps * lambda / (denom * denom);
      break;
    }
    case ContractionFamily::exponential: {
      const double e = std::exp(-rho / lambda);
      out.r = epsilon + one_m_eps * (1.0 - e);
      out.r_prime = one_m_eps / lambda * e;
      break;
    }
    case ContractionFamily::hyperbolic: {
      const double t = std::tanh(rho / lambda);
      out.r = epsilon + one_m_eps * t;
      out.r_prime = one_m_eps / lambda * (1.0 - t * t);
      break;
    }
  }
  if (out.r > kMaxContraction) out.r = kMaxContraction;
  return out;
}

SoftRadialLayer::SoftRadialLayer(ConvexSet set, RadialContraction contraction)
    : set_(std::move(set)), contraction_(contraction) {
  if (!(contraction_.epsilon > 0.0) || !(contraction_.epsilon < 1.0))
    throw InvalidInputError("SoftRadialLayer: epsilon must lie in (0,1)");
  if (!(contraction_.lambda > 0.0))
    throw InvalidInputError("SoftRadialLayer: lambda must be positive");
}

SoftRadialLayer::RayState SoftRadialLayer::ray_state(const Vec& u) const {
  RayState st;
  st.d = set_.direction_from_anchor(u);
  st.rho = st.d.squaredNorm();
  if (st.rho == 0.0) return st;  // anchor: interior fixed point
  const double tbar = set_.ray_boundary_time(u);
  st.gauge = std::isfinite(tbar) ? 1.0 / tbar : 0.0;
  st.exterior = st.gauge >= 1.0;
  st.on_boundary = std::abs(st.gauge - 1.0) <= kBoundaryBand;
  return st;
}

Vec SoftRadialLayer::hard_project(const Vec& u) const {
  const RayState st = ray_state(u);
  const Vec base = set_.is_capped_simplex() ? Vec(set_.anchor() + st.d) : u;
  if (!st.exterior) return base;
  return set_.anchor() + st.d / st.gauge;
}

Vec SoftRadialLayer::soft_project(const Vec& u) const {
  const RayState st = ray_state(u);
  const double alpha = st.exterior ? 1.0 / st.gauge : 1.0;
  const double r = contraction_.eval(st.rho).r;
  return set_.anchor() + (r * alpha) * st.d;
}

SoftRadialLayer::JacobianResult SoftRadialLayer::jacobian(const Vec& u) const {
  const RayState st = ray_state(u);
  const auto [r, rp] = contraction_.eval(st.rho);
  const int n = set_.dim();
  const bool capped = set_.is_capped_simplex();

  Mat J;
  if (!st.exterior) {
    J = r * Mat::Identity(n, n) + (2.0 * rp) * (st.d * st.d.transpose());
  } else {
    const Vec grad = set_.gauge_and_gradient(u).gradient;
    const double lam = st.gauge;
    J = (r / lam) * Mat::Identity(n, n) - (r / (lam * lam)) * (st.d * grad.transpose()) +
        (2.0 * rp / lam) * (st.d * st.d.transpose());
  }
  if (capped) {
    const Mat hull = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / n);
    J = J * hull;
  }
  return {std::move(J), st.on_boundary};
}

SoftRadialLayer::VjpResult SoftRadialLayer::vjp(const Vec& u, const Vec& cotangent) const {
  require_finite(cotangent, "vjp cotangent");
  const RayState st = ray_state(u);
  const auto [r, rp] = contraction_.eval(st.rho);
  const Vec g = set_.is_capped_simplex() ? tangent_project(cotangent) : cotangent;

  if (!st.exterior) {
    Vec out = r * g + (2.0 * rp * st.d.dot(g)) * st.d;
    return {std::move(out), st.on_boundary};
  }
  const Vec grad = set_.gauge_and_gradient(u).gradient;
  const double lam = st.gauge;
  const double dg = st.d.dot(g);
  Vec out = (r / lam) * g - (r / (lam * lam) * dg) * grad + (2.0 * rp / lam * dg) * st.d;
  return {std::move(out), st.on_boundary};
}

Vec SoftRadialLayer::inverse(const Vec& x) const {
  require_finite(x, "inverse");
  const Vec& u0 = set_.anchor();
  constexpr double kInteriorSlack = 1e-12;

  if (set_.is_capped_simplex()) {
    const auto& cs = std::get<CappedSimplex>(set_.geometry());
    if (std::abs(x.sum() - 1.0) > 1e-9)
      throw NotInvertibleError("inverse: point not on the simplex hyperplane");
    if (x.minCoeff() <= kInteriorSlack || (cs.caps - x).minCoeff() <= kInteriorSlack)
      throw NotInvertibleError("inverse: point not strictly inside the capped simplex");
  } else if (!(set_.max_violation(x) < -kInteriorSlack)) {
    throw NotInvertibleError("inverse: point not strictly interior");
  }

  const Vec dx = x - u0;
  const double s = dx.norm();
  if (s == 0.0) return u0;
  const Vec v = dx / s;

  const double tbar = set_.ray_boundary_time(u0 + v);
  if (s >= tbar * kMaxContraction)
    throw NotInvertibleError("inverse: point beyond the invertible range of the ray");

  auto psi = [&](double t) {
    return contraction_.eval(t * t).r * std::min(t, tbar);
  };

  double hi = std::max(s, 1.0);
  while (psi(hi) < s) {
    hi *= 2.0;
    if (hi > 1e13) throw NotInvertibleError("inverse: bracket expansion failed");
  }
  double lo = 0.0;
  double mid = hi;
  const double tol = 1e-13 * std::max(1.0, s);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double val = psi(mid);
    if (std::abs(val - s) <= tol) break;
    (val < s ? lo : hi) = mid;
    if (hi - lo <= 1e-17 * hi) break;
  }
  return u0 + mid * v;
}

}  // namespace radialfeas
