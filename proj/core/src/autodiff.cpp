#include "radialfeas/autodiff.hpp"

#include <cmath>
#include <mutex>
#include <set>

namespace radialfeas::ad {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw GraphError("operands belong to different tapes");
  return *a.tape;
}

void require_same_size(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size())
    throw GraphError(std::string(op) + ": shape mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
}

void require_scalar(const Vec& v, const char* op) {
  if (v.size() != 1) throw GraphError(std::string(op) + ": expected a scalar (1-vector)");
}

}  // namespace

int Tape::check(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw GraphError("Var does not belong to this tape");
  return v.id;
}

Var Tape::input(Vec value) {
  if (!value.allFinite()) throw GraphError("input: non-finite leaf value");
  nodes_.push_back(Node{std::move(value), BackwardFn{}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::emit(Vec value, BackwardFn backward) {
  if (!value.allFinite()) throw GraphError("emit: non-finite node value");
  nodes_.push_back(Node{std::move(value), std::move(backward)});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Vec& g) {
  Vec& slot = grads_[id];
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

void Tape::backward(Var output) {
  require_scalar(value(output), "backward");
  backward(output, Vec::Ones(1));
}

void Tape::backward(Var output, Vec seed) {
  const int out = check(output);
  if (seed.size() != nodes_[out].value.size()) throw GraphError("backward: seed shape mismatch");
  grads_.assign(nodes_.size(), Vec());
  accumulate(out, seed);
  for (int i = out; i >= 0; --i) {
    if (grads_[i].size() != 0 && nodes_[i].backward) nodes_[i].backward(grads_[i], *this);
  }
}

Vec Tape::grad(Var v) const {
  const int id = check(v);
  if (grads_.size() != nodes_.size() || grads_[id].size() == 0)
    return Vec::Zero(nodes_[id].value.size());
  return grads_[id];
}

// ---------------------------------------------------------------------------
// Builtins

Var affine(Var w_flat, Var bias, Var x, int rows, int cols) {
  same_tape(w_flat, bias);
  Tape& t = same_tape(w_flat, x);
  const Vec& wv = t.value(w_flat);
  const Vec& bv = t.value(bias);
  const Vec& xv = t.value(x);
  if (wv.size() != static_cast<long>(rows) * cols) throw GraphError("affine: W size mismatch");
  if (bv.size() != rows) throw GraphError("affine: bias size mismatch");
  if (xv.size() != cols) throw GraphError("affine: input size mismatch");

  Eigen::Map<const Mat> W(wv.data(), rows, cols);
  Vec out = W * xv + bv;
  const int wid = w_flat.id, bid = bias.id, xid = x.id;
  return t.emit(std::move(out), [wid, bid, xid, rows, cols](const Vec& g, Tape& tp) {
    Eigen::Map<const Mat> Wm(tp.value_at(wid).data(), rows, cols);
    const Vec& xvv = tp.value_at(xid);
    Mat gw = g * xvv.transpose();
    tp.accumulate(wid, gw.reshaped());
    tp.accumulate(bid, g);
    tp.accumulate(xid, Wm.transpose() * g);
  });
}

Var relu(Var v) {
  Tape& t = *v.tape;
  const Vec& x = t.value(v);
  Vec out = x.cwiseMax(0.0);
  const int id = v.id;
  return t.emit(std::move(out), [id](const Vec& g, Tape& tp) {
    const Vec& x = tp.value_at(id);
    Vec gx = (x.array() > 0.0).select(g.array(), 0.0).matrix();
    tp.accumulate(id, gx);
  });
}

Var tanh_op(Var v) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array().tanh();
  const int id = v.id;
  const int self = static_cast<int>(t.node_count());
  return t.emit(std::move(out), [id, self](const Vec& g, Tape& tp) {
    const Vec& y = tp.value_at(self);
    tp.accumulate(id, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var sqrt_op(Var v) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array().sqrt();
  const int id = v.id;
  const int self = static_cast<int>(t.node_count());
  return t.emit(std::move(out), [id, self](const Vec& g, Tape& tp) {
    const Vec& y = tp.value_at(self);
    tp.accumulate(id, (g.array() / (2.0 * y.array())).matrix());
  });
}

Var log_op(Var v) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array().log();
  const int id = v.id;
  return t.emit(std::move(out), [id](const Vec& g, Tape& tp) {
    tp.accumulate(id, (g.array() / tp.value_at(id).array()).matrix());
  });
}

Var exp_op(Var v) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array().exp();
  const int id = v.id;
  const int self = static_cast<int>(t.node_count());
  return t.emit(std::move(out), [id, self](const Vec& g, Tape& tp) {
    tp.accumulate(id, (g.array() * tp.value_at(self).array()).matrix());
  });
}

Var pow_const(Var v, double p) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array().pow(p);
  const int id = v.id;
  return t.emit(std::move(out), [id, p](const Vec& g, Tape& tp) {
    const auto x = tp.value_at(id).array();
    tp.accumulate(id, (g.array() * p * x.pow(p - 1.0)).matrix());
  });
}

Var clamp(Var v, double lo, double hi) {
  Tape& t = *v.tape;
  if (!(lo <= hi)) throw GraphError("clamp: lo > hi");
  Vec out = t.value(v).cwiseMax(lo).cwiseMin(hi);
  const int id = v.id;
  return t.emit(std::move(out), [id, lo, hi](const Vec& g, Tape& tp) {
    const auto x = tp.value_at(id).array();
    Vec gx = ((x > lo) && (x < hi)).select(g.array(), 0.0).matrix();
    tp.accumulate(id, gx);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(t.value(a), t.value(b), "add");
  Vec out = t.value(a) + t.value(b);
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), [ia, ib](const Vec& g, Tape& tp) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(t.value(a), t.value(b), "sub");
  Vec out = t.value(a) - t.value(b);
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), [ia, ib](const Vec& g, Tape& tp) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, -g);
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(t.value(a), t.value(b), "mul");
  Vec out = t.value(a).cwiseProduct(t.value(b));
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), [ia, ib](const Vec& g, Tape& tp) {
    tp.accumulate(ia, g.cwiseProduct(tp.value_at(ib)));
    tp.accumulate(ib, g.cwiseProduct(tp.value_at(ia)));
  });
}

Var div(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(t.value(a), t.value(b), "div");
  Vec out = t.value(a).cwiseQuotient(t.value(b));
  const int ia = a.id, ib = b.id;
  const int self = static_cast<int>(t.node_count());
  return t.emit(std::move(out), [ia, ib, self](const Vec& g, Tape& tp) {
    const Vec& bv = tp.value_at(ib);
    tp.accumulate(ia, g.cwiseQuotient(bv));
    tp.accumulate(ib, -g.cwiseProduct(tp.value_at(self)).cwiseQuotient(bv));
  });
}

Var neg(Var v) { return scale(v, -1.0); }

Var scale(Var v, double c) {
  Tape& t = *v.tape;
  Vec out = c * t.value(v);
  const int id = v.id;
  return t.emit(std::move(out), [id, c](const Vec& g, Tape& tp) { tp.accumulate(id, c * g); });
}

Var add_scalar(Var v, double c) {
  Tape& t = *v.tape;
  Vec out = t.value(v).array() + c;
  const int id = v.id;
  return t.emit(std::move(out), [id](const Vec& g, Tape& tp) { tp.accumulate(id, g); });
}

Var add_constvec(Var v, Vec c) {
  Tape& t = *v.tape;
  require_same_size(t.value(v), c, "add_constvec");
  Vec out = t.value(v) + c;
  const int id = v.id;
  return t.emit(std::move(out), [id](const Vec& g, Tape& tp) { tp.accumulate(id, g); });
}

Var mul_constvec(Var v, Vec c) {
  Tape& t = *v.tape;
  require_same_size(t.value(v), c, "mul_constvec");
  Vec out = t.value(v).cwiseProduct(c);
  const int id = v.id;
  return t.emit(std::move(out), [id, c = std::move(c)](const Vec& g, Tape& tp) {
    tp.accumulate(id, g.cwiseProduct(c));
  });
}

Var sum(Var v) {
  Tape& t = *v.tape;
  Vec out(1);
  out[0] = t.value(v).sum();
  const int id = v.id;
  const int n = t.size_of(v);
  return t.emit(std::move(out), [id, n](const Vec& g, Tape& tp) {
    tp.accumulate(id, Vec::Constant(n, g[0]));
  });
}

Var mean(Var v) {
  Tape& t = *v.tape;
  const int n = t.size_of(v);
  Vec out(1);
  out[0] = t.value(v).mean();
  const int id = v.id;
  return t.emit(std::move(out), [id, n](const Vec& g, Tape& tp) {
    tp.accumulate(id, Vec::Constant(n, g[0] / n));
  });
}

Var dot(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(t.value(a), t.value(b), "dot");
  Vec out(1);
  out[0] = t.value(a).dot(t.value(b));
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), [ia, ib](const Vec& g, Tape& tp) {
    tp.accumulate(ia, g[0] * tp.value_at(ib));
    tp.accumulate(ib, g[0] * tp.value_at(ia));
  });
}

Var vs_mul(Var v, Var s) {
  Tape& t = same_tape(v, s);
  require_scalar(t.value(s), "vs_mul");
  Vec out = t.value(s)[0] * t.value(v);
  const int iv = v.id, is = s.id;
  return t.emit(std::move(out), [iv, is](const Vec& g, Tape& tp) {
    tp.accumulate(iv, tp.value_at(is)[0] * g);
    Vec gs(1);
    gs[0] = g.dot(tp.value_at(iv));
    tp.accumulate(is, gs);
  });
}

Var vs_div(Var v, Var s) {
  Tape& t = same_tape(v, s);
  require_scalar(t.value(s), "vs_div");
  const double sv = t.value(s)[0];
  Vec out = t.value(v) / sv;
  const int iv = v.id, is = s.id;
  return t.emit(std::move(out), [iv, is](const Vec& g, Tape& tp) {
    const double sv = tp.value_at(is)[0];
    tp.accumulate(iv, g / sv);
    Vec gs(1);
    gs[0] = -g.dot(tp.value_at(iv)) / (sv * sv);
    tp.accumulate(is, gs);
  });
}

Var broadcast(Var s, int n) {
  Tape& t = *s.tape;
  require_scalar(t.value(s), "broadcast");
  Vec out = Vec::Constant(n, t.value(s)[0]);
  const int is = s.id;
  return t.emit(std::move(out), [is](const Vec& g, Tape& tp) {
    Vec gs(1);
    gs[0] = g.sum();
    tp.accumulate(is, gs);
  });
}

Var slice(Var v, int start, int len) {
  Tape& t = *v.tape;
  const int n = t.size_of(v);
  if (start < 0 || len < 1 || start + len > n) throw GraphError("slice: range out of bounds");
  Vec out = t.value(v).segment(start, len);
  const int id = v.id;
  return t.emit(std::move(out), [id, start, len, n](const Vec& g, Tape& tp) {
    Vec gx = Vec::Zero(n);
    gx.segment(start, len) = g;
    tp.accumulate(id, gx);
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw GraphError("concat: no parts");
  Tape& t = *parts.front().tape;
  int total = 0;
  std::vector<int> ids;
  std::vector<int> sizes;
  for (Var p : parts) {
    same_tape(parts.front(), p);
    ids.push_back(p.id);
    sizes.push_back(t.size_of(p));
    total += sizes.back();
  }
  Vec out(total);
  int off = 0;
  for (size_t k = 0; k < ids.size(); ++k) {
    out.segment(off, sizes[k]) = t.value_at(ids[k]);
    off += sizes[k];
  }
  return t.emit(std::move(out), [ids, sizes](const Vec& g, Tape& tp) {
    int off = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      tp.accumulate(ids[k], g.segment(off, sizes[k]));
      off += sizes[k];
    }
  });
}

Var softmin_const(Var a, Vec d, double tau) {
  Tape& t = *a.tape;
  require_same_size(t.value(a), d, "softmin_const");
  if (!(tau > 0.0)) throw GraphError("softmin_const: tau must be positive");
  const Vec& av = t.value(a);
  Vec out(av.size());
  for (int i = 0; i < av.size(); ++i) {
    const double lo = std::min(av[i], d[i]);
    const double gap = std::abs(av[i] - d[i]);
    out[i] = lo - tau * std::log1p(std::exp(-gap / tau));
  }
  const int id = a.id;
  return t.emit(std::move(out), [id, d = std::move(d), tau](const Vec& g, Tape& tp) {
    const Vec& av = tp.value_at(id);
    Vec gx(av.size());
    for (int i = 0; i < av.size(); ++i) {
      // d(softmin)/da = sigma((d - a)/tau)
      gx[i] = g[i] / (1.0 + std::exp((av[i] - d[i]) / tau));
    }
    tp.accumulate(id, gx);
  });
}

Var apply(const Primitive& prim, const std::vector<Var>& inputs) {
  if (inputs.empty()) throw GraphError("apply: primitive needs at least one input");
  if (!prim.forward || !prim.vjp) throw GraphError("apply: incomplete primitive " + prim.name);
  Tape& t = *inputs.front().tape;
  std::vector<int> ids;
  std::vector<Vec> vals;
  for (Var v : inputs) {
    same_tape(inputs.front(), v);
    ids.push_back(v.id);
    vals.push_back(t.value(v));
  }
  Vec out = prim.forward(vals);
  const int self = static_cast<int>(t.node_count());
  auto vjp = prim.vjp;
  return t.emit(std::move(out), [ids, vjp, self](const Vec& g, Tape& tp) {
    std::vector<Vec> vals;
    vals.reserve(ids.size());
    for (int id : ids) vals.push_back(tp.value_at(id));
    std::vector<Vec> grads = vjp(vals, tp.value_at(self), g);
    if (grads.size() != ids.size()) throw GraphError("primitive vjp arity mismatch");
    for (size_t k = 0; k < ids.size(); ++k) tp.accumulate(ids[k], grads[k]);
  });
}

namespace {
std::mutex registry_mutex;
std::set<std::string>& registry() {
  static std::set<std::string> names;
  return names;
}
}  // namespace

bool register_primitive_name(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex);
  return registry().insert(name).second;
}

bool primitive_registered(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex);
  return registry().count(name) > 0;
}

double grad_check(const std::function<Var(Tape&, Var)>& f, const Vec& x, double h) {
  Tape tape;
  Var in = tape.input(x);
  Var out = f(tape, in);
  if (tape.size_of(out) != 1) throw GraphError("grad_check: function must produce a scalar");
  tape.backward(out);
  const Vec analytic = tape.grad(in);

  auto eval = [&](const Vec& point) {
    Tape t2;
    Var v = t2.input(point);
    return t2.value(f(t2, v))[0];
  };

  double worst = 0.0;
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = eval(xp);
    xp[i] = x[i] - h;
    const double fm = eval(xp);
    xp[i] = x[i];
    const double numeric = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

}  // namespace radialfeas::ad
