#pragma once

#include "radialfeas/common.hpp"

namespace radialfeas::baselines {

/// Temperature softmax onto the open simplex, max-subtracted for stability.
Vec softmax_temp(const Vec& u, double tau);

/// Exact VJP of softmax_temp: ((diag(w) - w w^T)/tau)^T g.
Vec softmax_temp_vjp(const Vec& u, double tau, const Vec& g);

/// Euclidean projection onto {w : 1^T w = 1, 0 <= w <= caps} by monotone
/// bisection on the shift multiplier, w_i(mu) = clamp(u_i - mu, 0, c_i).
Vec project_capped_simplex(const Vec& u, const Vec& caps);

/// a.e. vector-Jacobian product of project_capped_simplex: the cotangent is
/// restricted to the free set and recentred there; clamped coordinates get
/// zero (ties resolved toward clamped).
Vec orth_projection_vjp(const Vec& u, const Vec& caps, const Vec& g);

// Affine two-sided bounds lower <= A x <= upper with A full column rank.
struct AffineBounds {
  Mat A;
  Vec lower;
  Vec upper;
};

/// Least-squares feasibility correction: u + (A^T A)^{-1} A^T v with the
/// signed violation v = relu(lower - A u) - relu(A u - upper).
Vec hardnet_correct(const Vec& u, const AffineBounds& bounds);

/// VJP of hardnet_correct; relu subgradient at a kink is 0.
Vec hardnet_correct_vjp(const Vec& u, const AffineBounds& bounds, const Vec& g);

struct Dc3Config {
  int steps = 5;
  double step_size = 0.1;
  double momentum = 0.0;
};

/// Symmetric DC3 for the capped simplex: hyperplane init, first N-1
/// coordinates free, equality enforced by completion, then `steps` heavy-ball
/// gradient descent iterations on the squared hinge-residual energy. The
/// output sums to one exactly; bound violations shrink with the iterations.
Vec dc3_project(const Vec& u, const Vec& caps, const Dc3Config& cfg);

/// Hinge-residual energy of a completed iterate (diagnostic for tests).
double dc3_energy(const Vec& w, const Vec& caps);

/// Evaluation-only repair used by HardNet/DC3: exact orthogonal projection
/// onto the capped simplex. Never part of a training graph.
Vec eval_feasibility_wrapper(const Vec& w, const Vec& caps);

}  // namespace radialfeas::baselines
