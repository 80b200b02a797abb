#include "radialfeas/oracles.hpp"

#include <cmath>
#include <sstream>

namespace radialfeas::oracles {

OracleReport make_report(std::string quantity, double analytic, double oracle,
                         std::string tolerance_name, double tolerance) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.analytic = analytic;
  r.oracle = oracle;
  r.abs_error = std::abs(analytic - oracle);
  r.rel_error = r.abs_error / std::max(1.0, std::abs(oracle));
  r.tolerance_name = std::move(tolerance_name);
  r.tolerance = tolerance;
  r.pass = r.rel_error <= tolerance;
  return r;
}

std::string report_csv_header() {
  return "quantity,analytic,oracle,abs_error,rel_error,tolerance_name,tolerance,pass";
}

std::string report_csv_row(const OracleReport& r) {
  std::ostringstream os;
  os << r.quantity << ',' << fmt_g17(r.analytic) << ',' << fmt_g17(r.oracle) << ','
     << fmt_g17(r.abs_error) << ',' << fmt_g17(r.rel_error) << ',' << r.tolerance_name << ','
     << fmt_g17(r.tolerance) << ',' << (r.pass ? "1" : "0");
  return os.str();
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& u, double h) {
  const Vec f0 = map(u);
  Mat J(f0.size(), u.size());
  Vec up = u;
  for (int i = 0; i < u.size(); ++i) {
    up[i] = u[i] + h;
    const Vec fp = map(up);
    up[i] = u[i] - h;
    const Vec fm = map(up);
    up[i] = u[i];
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& u, double h) {
  Vec g(u.size());
  Vec up = u;
  for (int i = 0; i < u.size(); ++i) {
    up[i] = u[i] + h;
    const double fp = f(up);
    up[i] = u[i] - h;
    const double fm = f(up);
    up[i] = u[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double bisect_boundary(const ConvexSet& set, const Vec& u, int iters) {
  const Vec d = set.direction_from_anchor(u);
  if (d.isZero(0.0)) throw InvalidInputError("bisect_boundary: u equals the anchor");
  const Vec& u0 = set.anchor();
  auto inside = [&](double t) { return set.contains(u0 + t * d, 0.0); };

  double hi = 1.0;
  while (inside(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return kInfiniteTime;
  }
  double lo = hi > 1.0 ? hi * 0.5 : 0.0;
  for (int it = 0; it < iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vec qp_projection_oracle(const Vec& u, const Vec& caps, int iters) {
  require_finite(u, "qp_projection_oracle");
  if (caps.sum() < 1.0) throw InvalidInputError("qp_projection_oracle: infeasible caps");
  const int n = static_cast<int>(u.size());

  Vec x = u;
  Vec p = Vec::Zero(n);  // box correction
  Vec q = Vec::Zero(n);  // hyperplane correction
  Vec prev = x;
  for (int it = 0; it < iters; ++it) {
    const Vec y = (x + p).cwiseMax(0.0).cwiseMin(caps);
    p = x + p - y;
    const Vec z = y + q;
    x = z - Vec::Constant(n, (z.sum() - 1.0) / n);
    q = z - x;
    const double residual =
        (x - prev).norm() + std::abs(x.sum() - 1.0) + (x - x.cwiseMax(0.0).cwiseMin(caps)).norm();
    if (it > 0 && residual <= 1e-9) return x.cwiseMax(0.0).cwiseMin(caps);
    prev = x;
  }
  throw FactorizationError("qp_projection_oracle: no convergence within iteration budget");
}

}  // namespace radialfeas::oracles
