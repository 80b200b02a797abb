#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <stdexcept>
#include <string>

namespace radialfeas {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy shared by all modules. Callers that only care about
// "bad input vs. internal failure" can catch the std bases.
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateRayError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NotInvertibleError : std::domain_error {
  using std::domain_error::domain_error;
};
struct InfeasibleSetError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when a tape graph is built with inconsistent shapes.
struct GraphError : std::logic_error {
  using std::logic_error::logic_error;
};
struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidInputError(std::string(what) + ": non-finite input");
}

// Shortest round-trippable decimal form (17 significant digits).
inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double rel_error(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace radialfeas
