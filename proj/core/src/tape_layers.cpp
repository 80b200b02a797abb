#include "radialfeas/tape_layers.hpp"

namespace radialfeas::ad {

namespace {

constexpr const char* kSoftProject = "soft_project";
constexpr const char* kCappedProject = "project_capped_simplex";
constexpr const char* kSoftmax = "softmax_temp";
constexpr const char* kHardnet = "hardnet_correct";

void require_registered(const char* name) {
  if (!primitive_registered(name))
    throw GraphError(std::string(name) + ": call register_projection_primitives() first");
}

}  // namespace

void register_projection_primitives() {
  register_primitive_name(kSoftProject);
  register_primitive_name(kCappedProject);
  register_primitive_name(kSoftmax);
  register_primitive_name(kHardnet);
}

bool projection_primitives_registered() {
  return primitive_registered(kSoftProject) && primitive_registered(kCappedProject) &&
         primitive_registered(kSoftmax) && primitive_registered(kHardnet);
}

Var soft_project(Var u, std::shared_ptr<const SoftRadialLayer> layer) {
  require_registered(kSoftProject);
  Primitive prim;
  prim.name = kSoftProject;
  prim.forward = [layer](std::span<const Vec> in) { return layer->soft_project(in[0]); };
  prim.vjp = [layer](std::span<const Vec> in, const Vec&, const Vec& g) {
    return std::vector<Vec>{layer->vjp(in[0], g).grad};
  };
  return apply(prim, {u});
}

Var soft_project(Var u, const SoftRadialLayer& layer) {
  return soft_project(u, std::make_shared<const SoftRadialLayer>(layer));
}

Var capped_simplex_project(Var u, Vec caps) {
  require_registered(kCappedProject);
  Primitive prim;
  prim.name = kCappedProject;
  prim.forward = [caps](std::span<const Vec> in) {
    return baselines::project_capped_simplex(in[0], caps);
  };
  prim.vjp = [caps](std::span<const Vec> in, const Vec&, const Vec& g) {
    return std::vector<Vec>{baselines::orth_projection_vjp(in[0], caps, g)};
  };
  return apply(prim, {u});
}

Var softmax_temp(Var u, double tau) {
  require_registered(kSoftmax);
  Primitive prim;
  prim.name = kSoftmax;
  prim.forward = [tau](std::span<const Vec> in) { return baselines::softmax_temp(in[0], tau); };
  prim.vjp = [tau](std::span<const Vec> in, const Vec&, const Vec& g) {
    return std::vector<Vec>{baselines::softmax_temp_vjp(in[0], tau, g)};
  };
  return apply(prim, {u});
}

Var hardnet_correct(Var u, baselines::AffineBounds bounds) {
  require_registered(kHardnet);
  auto shared = std::make_shared<baselines::AffineBounds>(std::move(bounds));
  Primitive prim;
  prim.name = kHardnet;
  prim.forward = [shared](std::span<const Vec> in) {
    return baselines::hardnet_correct(in[0], *shared);
  };
  prim.vjp = [shared](std::span<const Vec> in, const Vec&, const Vec& g) {
    return std::vector<Vec>{baselines::hardnet_correct_vjp(in[0], *shared, g)};
  };
  return apply(prim, {u});
}

Var hyperplane_project(Var u) {
  Tape& t = *u.tape;
  const int n = t.size_of(u);
  Var excess = add_scalar(sum(u), -1.0);
  return sub(u, scale(broadcast(excess, n), 1.0 / n));
}

Var dc3_project(Var u, const Vec& caps, const baselines::Dc3Config& cfg) {
  Tape& t = *u.tape;
  const int n = t.size_of(u);
  if (n < 2) throw GraphError("dc3_project: need at least 2 coordinates");
  if (caps.size() != n) throw GraphError("dc3_project: caps size mismatch");

  auto complete = [&](Var xi) {
    Var last = sub(t.constant(Vec::Ones(1)), sum(xi));
    return concat({xi, last});
  };

  Var xi = slice(hyperplane_project(u), 0, n - 1);
  Var velocity = t.constant(Vec::Zero(n - 1));
  for (int step = 0; step < cfg.steps; ++step) {
    Var w = complete(xi);
    // dV/dw = 2 relu(w - c) - 2 relu(-w), pulled back through the completion.
    Var gw = scale(sub(relu(add_constvec(w, Vec(-caps))), relu(neg(w))), 2.0);
    Var head = slice(gw, 0, n - 1);
    Var tail = broadcast(slice(gw, n - 1, 1), n - 1);
    Var gxi = sub(head, tail);
    velocity = cfg.momentum == 0.0 ? gxi : add(scale(velocity, cfg.momentum), gxi);
    xi = sub(xi, scale(velocity, cfg.step_size));
  }
  return complete(xi);
}

}  // namespace radialfeas::ad
