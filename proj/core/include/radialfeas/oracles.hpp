#pragma once

#include <functional>
#include <string>
#include <vector>

#include "radialfeas/sets.hpp"

namespace radialfeas::oracles {

// One verified quantity: analytic value against an independent oracle.
struct OracleReport {
  std::string quantity;
  double analytic = 0.0;
  double oracle = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // denominator max(1, |oracle|)
  std::string tolerance_name;
  double tolerance = 0.0;
  bool pass = false;
};

OracleReport make_report(std::string quantity, double analytic, double oracle,
                         std::string tolerance_name, double tolerance);

std::string report_csv_header();
std::string report_csv_row(const OracleReport& r);

/// Central-difference Jacobian of a vector map, columnwise.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& u, double h);

/// Central-difference gradient of a scalar function.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& u, double h);

/// Boundary time along the anchor ray found by pure bisection on membership.
/// Returns +inf when the ray never leaves the set (bracket cap 1e12).
double bisect_boundary(const ConvexSet& set, const Vec& u, int iters = 80);

/// Reference projection onto the capped simplex: Dykstra's alternating
/// projections between the box [0, caps] and the sum-one hyperplane, with
/// correction terms, run to fixed-point residual <= 1e-9. Independent of the
/// closed-form bisection projection it is used to check.
Vec qp_projection_oracle(const Vec& u, const Vec& caps, int iters = 20000);

}  // namespace radialfeas::oracles
