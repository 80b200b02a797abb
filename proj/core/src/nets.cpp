#include "radialfeas/nets.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace radialfeas::nets {

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw InvalidInputError("unknown activation: " + s);
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation activation, uint64_t seed)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw InvalidInputError("Mlp: need at least input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw InvalidInputError("Mlp: layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat W(fan_out, fan_in);
    for (int j = 0; j < fan_in; ++j) {
      for (int i = 0; i < fan_out; ++i) W(i, j) = dist(rng);
    }
    weights_.push_back(std::move(W));
    biases_.push_back(Vec::Zero(fan_out));
  }
}

Mlp::ParamVars Mlp::push_params(ad::Tape& tape) const {
  ParamVars p;
  for (size_t l = 0; l < weights_.size(); ++l) {
    p.w_flat.push_back(tape.input(weights_[l].reshaped()));
    p.b.push_back(tape.input(biases_[l]));
  }
  return p;
}

ad::Var Mlp::forward(ad::Tape& tape, const ParamVars& params, const Vec& z,
                     const std::vector<Vec>& dropout_masks) const {
  if (z.size() != input_dim()) throw InvalidInputError("Mlp::forward: input dim mismatch");
  ad::Var h = tape.constant(z);
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    h = ad::affine(params.w_flat[l], params.b[l], h, sizes_[l + 1], sizes_[l]);
    if (l + 1 < layers) {
      h = activation_ == Activation::relu ? ad::relu(h) : ad::tanh_op(h);
      if (!dropout_masks.empty()) h = ad::mul_constvec(h, dropout_masks[l]);
    }
  }
  return h;
}

Vec Mlp::forward_plain(const Vec& z) const {
  if (z.size() != input_dim()) throw InvalidInputError("Mlp::forward_plain: input dim mismatch");
  Vec h = z;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    h = weights_[l] * h + biases_[l];
    if (l + 1 < layers) {
      if (activation_ == Activation::relu) {
        h = h.cwiseMax(0.0);
      } else {
        h = h.array().tanh();
      }
    }
  }
  return h;
}

std::vector<Vec> Mlp::sample_dropout_masks(double rate, std::mt19937_64& rng) const {
  std::vector<Vec> masks;
  if (rate <= 0.0) return masks;
  if (rate >= 1.0) throw InvalidInputError("dropout rate must lie in [0,1)");
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (size_t l = 1; l + 1 < sizes_.size(); ++l) {
    Vec m(sizes_[l]);
    for (int i = 0; i < m.size(); ++i) m[i] = keep(rng) ? scale : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

void Mlp::collect_grads(const ad::Tape& tape, const ParamVars& params, std::vector<Mat>& grad_w,
                        std::vector<Vec>& grad_b, const std::vector<int>& sizes) {
  grad_w.clear();
  grad_b.clear();
  for (size_t l = 0; l < params.w_flat.size(); ++l) {
    const Vec gw = tape.grad(params.w_flat[l]);
    grad_w.push_back(Eigen::Map<const Mat>(gw.data(), sizes[l + 1], sizes[l]));
    grad_b.push_back(tape.grad(params.b[l]));
  }
}

void Mlp::save_checkpoint(std::ostream& os) const {
  os << "radialfeas-checkpoint v1\n";
  os << "sizes";
  for (int s : sizes_) os << ' ' << s;
  os << "\nactivation " << to_string(activation_) << "\n";
  for (size_t l = 0; l < weights_.size(); ++l) {
    os << "tensor W" << l << ' ' << weights_[l].rows() << ' ' << weights_[l].cols() << '\n';
    for (int i = 0; i < weights_[l].rows(); ++i) {
      for (int j = 0; j < weights_[l].cols(); ++j) {
        os << (j ? " " : "") << fmt_g17(weights_[l](i, j));
      }
      os << '\n';
    }
    os << "tensor b" << l << ' ' << biases_[l].size() << '\n';
    for (int i = 0; i < biases_[l].size(); ++i) os << (i ? " " : "") << fmt_g17(biases_[l][i]);
    os << '\n';
  }
}

Mlp Mlp::load_checkpoint(std::istream& is) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "radialfeas-checkpoint" || version != "v1")
    throw InvalidInputError("checkpoint: unrecognized header");
  std::string key;
  is >> key;
  if (key != "sizes") throw InvalidInputError("checkpoint: expected sizes");
  std::string sizes_line;
  std::getline(is, sizes_line);
  std::vector<int> sizes;
  {
    std::istringstream ls(sizes_line);
    int s;
    while (ls >> s) sizes.push_back(s);
  }
  if (sizes.size() < 2) throw InvalidInputError("checkpoint: bad sizes line");
  std::string act_key, act_name;
  is >> act_key >> act_name;
  if (act_key != "activation") throw InvalidInputError("checkpoint: expected activation");
  Mlp net(sizes, activation_from_string(act_name), 0);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::string tensor, name;
    long rows, cols;
    is >> tensor >> name >> rows >> cols;
    if (tensor != "tensor") throw InvalidInputError("checkpoint: expected weight tensor");
    Mat W(rows, cols);
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) is >> W(i, j);
    }
    long blen;
    is >> tensor >> name >> blen;
    Vec b(blen);
    for (long i = 0; i < blen; ++i) is >> b[i];
    net.weights_[l] = std::move(W);
    net.biases_[l] = std::move(b);
  }
  if (!is) throw InvalidInputError("checkpoint: truncated file");
  return net;
}

AdamState AdamState::init(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Mat& W : net.weights()) {
    s.m_w.push_back(Mat::Zero(W.rows(), W.cols()));
    s.v_w.push_back(Mat::Zero(W.rows(), W.cols()));
  }
  for (const Vec& b : net.biases()) {
    s.m_b.push_back(Vec::Zero(b.size()));
    s.v_b.push_back(Vec::Zero(b.size()));
  }
  return s;
}

namespace {

void require_finite_grads(const std::vector<Mat>& gw, const std::vector<Vec>& gb) {
  for (const Mat& g : gw) {
    if (!g.allFinite()) throw TrainingDivergedError("non-finite weight gradient");
  }
  for (const Vec& g : gb) {
    if (!g.allFinite()) throw TrainingDivergedError("non-finite bias gradient");
  }
}

}  // namespace

void adam_step(AdamState& s, Mlp& net, const std::vector<Mat>& grad_w,
               const std::vector<Vec>& grad_b) {
  require_finite_grads(grad_w, grad_b);
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (size_t l = 0; l < grad_w.size(); ++l) {
    s.m_w[l] = s.beta1 * s.m_w[l] + (1.0 - s.beta1) * grad_w[l];
    s.v_w[l] = s.beta2 * s.v_w[l] + (1.0 - s.beta2) * grad_w[l].cwiseProduct(grad_w[l]);
    net.weights()[l] -=
        (s.lr * (s.m_w[l] / bc1).array() / ((s.v_w[l] / bc2).array().sqrt() + s.eps)).matrix();
    s.m_b[l] = s.beta1 * s.m_b[l] + (1.0 - s.beta1) * grad_b[l];
    s.v_b[l] = s.beta2 * s.v_b[l] + (1.0 - s.beta2) * grad_b[l].cwiseProduct(grad_b[l]);
    net.biases()[l] -=
        (s.lr * (s.m_b[l] / bc1).array() / ((s.v_b[l] / bc2).array().sqrt() + s.eps)).matrix();
  }
}

SgdSchedule sgd_schedule_from_string(const std::string& s) {
  if (s == "constant") return SgdSchedule::constant;
  if (s == "invsqrt_total") return SgdSchedule::invsqrt_total;
  if (s == "diminishing") return SgdSchedule::diminishing;
  throw InvalidInputError("unknown sgd schedule: " + s);
}

void sgd_step(Mlp& net, const std::vector<Mat>& grad_w, const std::vector<Vec>& grad_b,
              double base_lr, SgdSchedule schedule, long t, long total_steps) {
  require_finite_grads(grad_w, grad_b);
  double eta = base_lr;
  if (schedule == SgdSchedule::invsqrt_total) {
    eta = base_lr / std::sqrt(std::max<long>(total_steps, 1));
  } else if (schedule == SgdSchedule::diminishing) {
    eta = base_lr / std::sqrt(static_cast<double>(t + 1));
  }
  for (size_t l = 0; l < grad_w.size(); ++l) {
    net.weights()[l] -= eta * grad_w[l];
    net.biases()[l] -= eta * grad_b[l];
  }
}

}  // namespace radialfeas::nets
