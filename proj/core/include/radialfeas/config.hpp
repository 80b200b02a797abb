#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "radialfeas/common.hpp"

namespace radialfeas::cli {

// Flat experiment configuration: every field has a documented default, loads
// from key=value text files, and is echoed verbatim (sorted) into the comment
// header of every output file so runs can be reproduced from their artifacts.
struct ExperimentConfig {
  // experiment selection
  std::string task = "toy2d";          // toy2d | portfolio | dispatch
  std::string method = "soft-radial";  // soft-radial | orthogonal | softmax | hardnet | dc3

  // projection layer
  std::string family = "rational";  // rational | exponential | hyperbolic
  double epsilon = 0.1;
  double lambda = 1.0;
  double softmax_tau = 1.0;
  double huber_delta = 1e-3;
  double softmin_tau = 0.0;  // 0 = auto (0.05 x mean demand)

  // network + optimizer
  std::string hidden = "32";        // comma-separated hidden layer sizes
  std::string activation = "relu";  // relu | tanh
  std::string optimizer = "adam";   // adam | sgd
  double lr = 1e-3;
  std::string sgd_schedule = "constant";  // constant | invsqrt_total | diminishing
  double dropout = 0.0;

  // protocol
  std::string seeds = "0";  // comma-separated seed list
  int epochs = 50;
  int batch = 64;
  double train_frac = 1.0;

  // data (synthetic unless data= points at a CSV)
  int assets = 10;  // assets (portfolio) or zones (dispatch)
  int horizon = 500;
  int factors = 3;
  int lookback = 10;
  double gamma = 0.1;
  double caps = 0.2;   // uniform per-asset cap; 1 = plain simplex
  double kappa = 0.1;  // per-zone cap fraction of supply
  std::string data;

  // toy2d demo
  double target_x = 0.5;
  double target_y = 0.0;
  double init_x = 2.0;
  double init_y = 0.0;
  int toy_steps = 500;
  double toy_lr = 0.05;

  // dc3
  int dc3_steps = 5;
  double dc3_lr = 0.1;
  double dc3_momentum = 0.0;

  // output
  std::string out = "out";

  /// Assigns one field by key name; throws InvalidInputError on unknown keys
  /// or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// All fields as sorted (key, value) pairs; doubles printed round-trip safe.
  std::vector<std::pair<std::string, std::string>> items() const;

  /// `# key=value` comment lines (version first) for output file headers.
  std::string header_comment() const;

  std::vector<uint64_t> seed_list() const;
  std::vector<int> hidden_sizes() const;

  static ExperimentConfig from_file(const std::string& path);
  /// Applies `key=value` override strings on top of the current values.
  void apply_overrides(const std::vector<std::string>& overrides);
};

/// Worker cap: RADIALFEAS_THREADS if set (>=1), otherwise hardware
/// concurrency, clamped to job count by callers.
int worker_cap();

}  // namespace radialfeas::cli
