#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "radialfeas/common.hpp"

namespace radialfeas::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid for its tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Append-only reverse-mode tape over dense vectors. Scalars are 1-vectors.
// Construction and the backward pass are single-threaded; distinct tapes may
// run concurrently. Shapes are checked eagerly at graph build time.
class Tape {
 public:
  Var input(Vec value);               // differentiable leaf
  Var constant(Vec value) { return input(std::move(value)); }

  const Vec& value(Var v) const { return nodes_[check(v)].value; }
  int size_of(Var v) const { return static_cast<int>(value(v).size()); }
  size_t node_count() const { return nodes_.size(); }

  /// Reverse pass from a scalar output (seed 1), or from any node with an
  /// explicit seed cotangent. Cotangents accumulate additively in strict
  /// reverse node order.
  void backward(Var output);
  void backward(Var output, Vec seed);

  /// Accumulated cotangent of a node (zero vector if none reached it).
  Vec grad(Var v) const;

  // --- internal plumbing used by the op constructors ---
  using BackwardFn = std::function<void(const Vec& gout, Tape& tape)>;
  Var emit(Vec value, BackwardFn backward);
  void accumulate(int id, const Vec& g);
  const Vec& value_at(int id) const { return nodes_[id].value; }

 private:
  struct Node {
    Vec value;
    BackwardFn backward;  // empty for leaves
  };

  int check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Vec> grads_;
};

// Builtin operations. All enforce exact shape agreement (no broadcasting);
// scalar-vector interactions are explicit ops.
Var affine(Var w_flat, Var bias, Var x, int rows, int cols);  // W col-major
Var relu(Var v);
Var tanh_op(Var v);
Var sqrt_op(Var v);
Var log_op(Var v);
Var exp_op(Var v);
Var pow_const(Var v, double p);
Var clamp(Var v, double lo, double hi);  // cotangent passes on the open interior only
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var v);
Var scale(Var v, double c);
Var add_scalar(Var v, double c);
Var add_constvec(Var v, Vec c);
Var mul_constvec(Var v, Vec c);
Var sum(Var v);   // 1-vector
Var mean(Var v);  // 1-vector
Var dot(Var a, Var b);
Var vs_mul(Var v, Var s);  // vector times scalar node
Var vs_div(Var v, Var s);
Var broadcast(Var s, int n);
Var slice(Var v, int start, int len);
Var concat(const std::vector<Var>& parts);
/// Elementwise smooth minimum against constant data: -tau log(e^{-a/tau} + e^{-d/tau}).
Var softmin_const(Var a, Vec d, double tau);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var v) { return neg(v); }
inline Var operator*(double c, Var v) { return scale(v, c); }

// Custom differentiable operation: a forward map plus a VJP that maps the
// output cotangent back to input cotangents. The VJP must be linear in the
// cotangent; every registered primitive carries a gradient-check obligation
// (enforced by the test suite).
struct Primitive {
  std::string name;
  std::function<Vec(std::span<const Vec>)> forward;
  std::function<std::vector<Vec>(std::span<const Vec> inputs, const Vec& output,
                                 const Vec& gout)>
      vjp;
};

Var apply(const Primitive& prim, const std::vector<Var>& inputs);

// Name registry backing register_projection_primitives(). Registration is
// idempotent; returns false when the name was already present.
bool register_primitive_name(const std::string& name);
bool primitive_registered(const std::string& name);

/// Max relative error between the tape gradient of a scalar function and
/// central finite differences, over all coordinates of x. The denominator is
/// max(1, |numeric|).
double grad_check(const std::function<Var(Tape&, Var)>& f, const Vec& x, double h);

}  // namespace radialfeas::ad
