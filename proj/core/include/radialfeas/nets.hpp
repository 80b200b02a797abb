#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "radialfeas/autodiff.hpp"

namespace radialfeas::nets {

enum class Activation { relu, tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Multilayer perceptron with Glorot-uniform initialisation,
// U(+-sqrt(6/(fan_in+fan_out))), reproducible from the seed.
class Mlp {
 public:
  Mlp(std::vector<int> layer_sizes, Activation activation, uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  std::vector<Mat>& weights() { return weights_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }

  // Parameter leaves on a tape; reused across every forward call recorded on
  // that tape so cotangents accumulate over a whole batch window.
  struct ParamVars {
    std::vector<ad::Var> w_flat;
    std::vector<ad::Var> b;
  };
  ParamVars push_params(ad::Tape& tape) const;

  /// Forward pass recorded on the tape: alternating affine + activation,
  /// final layer affine. Optional dropout masks one hidden layer activation
  /// set per call (training only; pass empty for none).
  ad::Var forward(ad::Tape& tape, const ParamVars& params, const Vec& z,
                  const std::vector<Vec>& dropout_masks = {}) const;

  /// Plain forward pass without a tape (evaluation path).
  Vec forward_plain(const Vec& z) const;

  /// Sample inverted-dropout masks for the hidden layers (scale 1/(1-rate)).
  std::vector<Vec> sample_dropout_masks(double rate, std::mt19937_64& rng) const;

  /// Gradients of the parameters after tape.backward, in push order.
  static void collect_grads(const ad::Tape& tape, const ParamVars& params,
                            std::vector<Mat>& grad_w, std::vector<Vec>& grad_b,
                            const std::vector<int>& sizes);

  void save_checkpoint(std::ostream& os) const;
  static Mlp load_checkpoint(std::istream& is);

 private:
  std::vector<int> sizes_;
  Activation activation_;
  std::vector<Mat> weights_;
  std::vector<Vec> biases_;
};

// Standard bias-corrected Adam over the MLP parameter list.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;

  static AdamState init(const Mlp& net, double lr);
};

/// One Adam step. Throws TrainingDivergedError on non-finite gradients.
void adam_step(AdamState& state, Mlp& net, const std::vector<Mat>& grad_w,
               const std::vector<Vec>& grad_b);

enum class SgdSchedule { constant, invsqrt_total, diminishing };

SgdSchedule sgd_schedule_from_string(const std::string& s);

/// Plain (sub)gradient step with the configured schedule:
/// constant eta, eta/sqrt(T), or eta/sqrt(t+1).
void sgd_step(Mlp& net, const std::vector<Mat>& grad_w, const std::vector<Vec>& grad_b,
              double base_lr, SgdSchedule schedule, long t, long total_steps);

}  // namespace radialfeas::nets
