#pragma once

#include <memory>

#include "radialfeas/autodiff.hpp"
#include "radialfeas/baselines.hpp"
#include "radialfeas/radial.hpp"

namespace radialfeas::ad {

/// Makes the projection layers available as tape primitives:
/// soft_project, project_capped_simplex, softmax_temp and hardnet_correct
/// get custom VJPs; dc3_project is traced through builtin ops. Idempotent.
void register_projection_primitives();
bool projection_primitives_registered();

// Tape-level layer applications. Each throws GraphError if
// register_projection_primitives() has not run.
Var soft_project(Var u, std::shared_ptr<const SoftRadialLayer> layer);
Var soft_project(Var u, const SoftRadialLayer& layer);  // copies the layer
Var capped_simplex_project(Var u, Vec caps);
Var softmax_temp(Var u, double tau);
Var hardnet_correct(Var u, baselines::AffineBounds bounds);

/// Hyperplane projection u - (1^T u - 1)/N traced with builtin ops.
Var hyperplane_project(Var u);

/// Unrolled symmetric DC3 on the tape; gradients flow through every
/// correction step and the completion map.
Var dc3_project(Var u, const Vec& caps, const baselines::Dc3Config& cfg);

}  // namespace radialfeas::ad
