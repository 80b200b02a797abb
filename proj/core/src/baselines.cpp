#include "radialfeas/baselines.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace radialfeas::baselines {

namespace {

Vec relu(const Vec& v) { return v.cwiseMax(0.0); }

// Free coordinates of a projected point; ties at the clamp levels count as
// clamped so the a.e. Jacobian is deterministic.
std::vector<int> free_set(const Vec& w, const Vec& caps) {
  std::vector<int> free;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0 && w[i] < caps[i]) free.push_back(i);
  }
  return free;
}

}  // namespace

Vec softmax_temp(const Vec& u, double tau) {
  require_finite(u, "softmax_temp");
  if (!(tau > 0.0)) throw InvalidInputError("softmax_temp: tau must be positive");
  const Vec z = (u.array() - u.maxCoeff()) / tau;
  Vec e = z.array().exp();
  return e / e.sum();
}

Vec softmax_temp_vjp(const Vec& u, double tau, const Vec& g) {
  const Vec w = softmax_temp(u, tau);
  return (w.array() * (g.array() - w.dot(g))).matrix() / tau;
}

Vec project_capped_simplex(const Vec& u, const Vec& caps) {
  require_finite(u, "project_capped_simplex");
  if (caps.size() != u.size()) throw InvalidInputError("project_capped_simplex: size mismatch");
  if (caps.minCoeff() <= 0.0 || caps.maxCoeff() > 1.0)
    throw InvalidInputError("project_capped_simplex: caps must lie in (0,1]");
  if (caps.sum() < 1.0)
    throw InvalidInputError("project_capped_simplex: infeasible caps (sum < 1)");

  auto sum_at = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += std::clamp(u[i] - mu, 0.0, caps[i]);
    return s;
  };

  // sum_at is nonincreasing in mu; bracket so the target 1 is enclosed.
  double lo = (u - caps).minCoeff();  // all coordinates at their caps
  double hi = u.maxCoeff();           // all coordinates at zero
  double mu = lo;
  for (int it = 0; it < 300; ++it) {
    mu = 0.5 * (lo + hi);
    const double s = sum_at(mu);
    if (std::abs(s - 1.0) <= 1e-12) break;
    (s > 1.0 ? lo : hi) = mu;
  }
  Vec w(u.size());
  for (int i = 0; i < u.size(); ++i) w[i] = std::clamp(u[i] - mu, 0.0, caps[i]);
  return w;
}

Vec orth_projection_vjp(const Vec& u, const Vec& caps, const Vec& g) {
  const Vec w = project_capped_simplex(u, caps);
  const auto free = free_set(w, caps);
  Vec out = Vec::Zero(u.size());
  if (free.empty()) return out;
  double mean = 0.0;
  for (int i : free) mean += g[i];
  mean /= static_cast<double>(free.size());
  for (int i : free) out[i] = g[i] - mean;
  return out;
}

Vec hardnet_correct(const Vec& u, const AffineBounds& bounds) {
  require_finite(u, "hardnet_correct");
  const Vec au = bounds.A * u;
  const Vec v = relu(bounds.lower - au) - relu(au - bounds.upper);
  Eigen::LDLT<Mat> ldlt(bounds.A.transpose() * bounds.A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw FactorizationError("hardnet_correct: A^T A is not positive definite");
  return u + ldlt.solve(bounds.A.transpose() * v);
}

Vec hardnet_correct_vjp(const Vec& u, const AffineBounds& bounds, const Vec& g) {
  const Vec au = bounds.A * u;
  // Active violation masks; relu' taken as 0 exactly at the kink.
  Vec mask = Vec::Zero(au.size());
  for (int i = 0; i < au.size(); ++i) {
    if (bounds.lower[i] - au[i] > 0.0) mask[i] += 1.0;
    if (au[i] - bounds.upper[i] > 0.0) mask[i] += 1.0;
  }
  Eigen::LDLT<Mat> ldlt(bounds.A.transpose() * bounds.A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw FactorizationError("hardnet_correct_vjp: A^T A is not positive definite");
  // J = I - Apinv D A with Apinv = (A^T A)^{-1} A^T and D = diag(mask),
  // so J^T g = g - A^T D A (A^T A)^{-1} g.
  const Vec t = bounds.A * ldlt.solve(g);
  return g - bounds.A.transpose() * (mask.asDiagonal() * t);
}

double dc3_energy(const Vec& w, const Vec& caps) {
  return relu(-w).squaredNorm() + relu(w - caps).squaredNorm();
}

Vec dc3_project(const Vec& u, const Vec& caps, const Dc3Config& cfg) {
  require_finite(u, "dc3_project");
  const int n = static_cast<int>(u.size());
  if (n < 2) throw InvalidInputError("dc3_project: need at least 2 coordinates");
  if (!(cfg.step_size > 0.0)) throw InvalidInputError("dc3_project: step size must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw InvalidInputError("dc3_project: momentum must lie in [0,1)");

  const Vec w0 = u - Vec::Constant(n, (u.sum() - 1.0) / n);
  Vec xi = w0.head(n - 1);
  Vec velocity = Vec::Zero(n - 1);
  for (int step = 0; step < cfg.steps; ++step) {
    Vec w(n);
    w.head(n - 1) = xi;
    w[n - 1] = 1.0 - xi.sum();
    // dV/dw_i = 2 relu(w_i - c_i) - 2 relu(-w_i); completion maps the last
    // coordinate's contribution onto every free variable with weight -1.
    const Vec gw = 2.0 * (relu(w - caps) - relu(-w));
    const Vec gxi = gw.head(n - 1) - Vec::Constant(n - 1, gw[n - 1]);
    velocity = cfg.momentum * velocity + gxi;
    xi -= cfg.step_size * velocity;
  }
  Vec w(n);
  w.head(n - 1) = xi;
  w[n - 1] = 1.0 - xi.sum();
  return w;
}

Vec eval_feasibility_wrapper(const Vec& w, const Vec& caps) {
  return project_capped_simplex(w, caps);
}

}  // namespace radialfeas::baselines
