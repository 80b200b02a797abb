#pragma once

#include "radialfeas/sets.hpp"

namespace radialfeas {

enum class ContractionFamily { rational, exponential, hyperbolic };

const char* to_string(ContractionFamily f);
ContractionFamily contraction_family_from_string(const std::string& s);

struct ContractionValue {
  double r = 0.0;
  double r_prime = 0.0;
};

// Scalar contraction r(rho) of the squared anchor distance, strictly
// increasing from r(0) = epsilon and saturating below 1. Values are capped at
// 1 - 1e-12 so that downstream outputs stay strictly interior in floating
// point even for extreme inputs.
struct RadialContraction {
  ContractionFamily family = ContractionFamily::rational;
  double epsilon = 0.1;
  double lambda = 1.0;

  ContractionValue eval(double rho) const;
};

// The soft-radial projection layer: a radial homeomorphism from ambient space
// into the interior of the set, with exact Jacobians and matrix-free VJPs.
class SoftRadialLayer {
 public:
  SoftRadialLayer(ConvexSet set, RadialContraction contraction);

  const ConvexSet& set() const { return set_; }
  const RadialContraction& contraction() const { return contraction_; }

  /// Identity on the set; otherwise the ray-boundary point u0 + t_bar (u-u0).
  Vec hard_project(const Vec& u) const;

  /// u0 + r(||d||^2) (q(u) - u0). Strictly interior for every finite input.
  Vec soft_project(const Vec& u) const;

  struct JacobianResult {
    Mat jacobian;
    bool on_boundary = false;  // exterior branch returned for a boundary point
  };
  JacobianResult jacobian(const Vec& u) const;

  struct VjpResult {
    Vec grad;
    bool on_boundary = false;
  };
  /// jacobian(u)^T * cotangent without materializing the matrix.
  VjpResult vjp(const Vec& u, const Vec& cotangent) const;

  /// Unique preimage of a strictly interior point. Throws NotInvertibleError
  /// if x is on or outside the boundary.
  Vec inverse(const Vec& x) const;

 private:
  struct RayState {
    Vec d;            // direction from anchor (hyperplane-projected if needed)
    double rho = 0.0; // squared length of d
    double gauge = 0.0;
    bool exterior = false;
    bool on_boundary = false;
  };
  RayState ray_state(const Vec& u) const;

  ConvexSet set_;
  RadialContraction contraction_;
};

}  // namespace radialfeas
