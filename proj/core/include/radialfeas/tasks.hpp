#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radialfeas/autodiff.hpp"
#include "radialfeas/radial.hpp"

namespace radialfeas::tasks {

// ---------------------------------------------------------------------------
// Portfolio task

struct PortfolioBatch {
  Mat features;   // T x d, one feature row per decision step
  Mat price_rel;  // T x N, strictly positive price relatives y_t
  double gamma = 0.1;   // transaction cost per unit of one-way turnover
  double delta = 1e-3;  // pseudo-Huber steepness
  Vec caps;
  int lookback = 10;
  int train_end = 0;  // feature normalization fitted on rows [0, train_end)
};

/// Passive drift: w+ = diag(y) w / (y^T w).
Vec drift_weights(const Vec& w, const Vec& y);

/// Smooth turnover surrogate: sum_i (sqrt(delta^2 + (w_i - w_prev_i)^2) - delta).
double pseudo_huber_turnover(const Vec& w, const Vec& w_prev_drifted, double delta);

struct SharpeResult {
  double sharpe = 0.0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_turnover = 0.0;  // exact one-way L1 turnover per step
};

/// Net Sharpe of a weight path. weights holds w_0..w_T (T+1 entries) and
/// price_rel holds the T realized relatives, so that
/// R_t = w_{t-1}^T y_t - (gamma/2) L_delta(w_t - drift(w_{t-1}, y_t)).
/// Population std with an epsilon guard of 1e-8; gamma = 0 recovers the
/// gross Sharpe exactly.
SharpeResult sharpe_objective(const std::vector<Vec>& weights, const Mat& price_rel,
                              double gamma, double delta);

/// Same objective recorded on a tape for end-to-end training; w0 is the fixed
/// initial weight (not differentiated).
ad::Var sharpe_objective_tape(ad::Tape& tape, const Vec& w0,
                              const std::vector<ad::Var>& weights, const Mat& price_rel,
                              double gamma, double delta);

/// Low-rank factor market with AR(1) factors plus idiosyncratic noise.
/// Deterministic per seed; y > 0 always.
PortfolioBatch synth_market(uint64_t seed, int n_assets, int steps, int factor_count,
                            int lookback = 10, double train_frac = 0.8);

/// Reads `date,asset_1..asset_N` rows of price relatives and derives the same
/// feature layout as synth_market.
PortfolioBatch load_returns_csv(const std::string& path, int lookback = 10,
                                double train_frac = 0.8);

// ---------------------------------------------------------------------------
// Dispatch task

struct DispatchBatch {
  Mat features;  // T x d
  Mat demand;    // T x N realized demand served by allocation a_t
  Vec supply;    // T, fleet size S_t > 0
  double kappa = 0.1;
  int lookback = 8;
  int train_end = 0;
};

/// Smooth minimum -tau log(e^{-x/tau} + e^{-y/tau}), always <= min(x, y).
double softmin(double x, double y, double tau);

enum class ServedMode { soft, hard };

/// Fraction of demand served; soft mode uses SoftMin (training), hard mode the
/// exact minimum (reported metrics). Empty when total demand is zero.
std::optional<double> served_rate(const Vec& alloc, const Vec& demand, double tau,
                                  ServedMode mode);

/// Homothety wrapper: supply * unit_projector(u / supply). Works with any
/// unit capped-simplex operator; requires kappa * N > 1.
Vec scaled_capped_projection(const std::function<Vec(const Vec&)>& unit_projector,
                             const Vec& u, double supply, double kappa);

/// Zone base rates x daily/weekly seasonality + Poisson-like noise; supply is
/// a smoothed fraction of total demand. Deterministic per seed.
DispatchBatch synth_demand(uint64_t seed, int zones, int steps, int lookback = 8,
                           double train_frac = 0.8, double kappa = 0.1);

/// Reads `timestamp,zone_1..zone_N,supply` rows.
DispatchBatch load_demand_csv(const std::string& path, int lookback = 8,
                              double train_frac = 0.8, double kappa = 0.1);

/// Default SoftMin temperature: 0.05 x mean demand entry.
double default_softmin_tau(const Mat& demand);

// ---------------------------------------------------------------------------
// 2D saturation demo

struct Toy2dConfig {
  std::string method = "soft-radial";  // soft-radial | orthogonal
  Vec target;                          // must lie in the box [-1,1]^2
  Vec init;                            // starting candidate, typically outside
  int steps = 500;
  double lr = 0.05;
  RadialContraction contraction;
};

struct Toy2dRecord {
  Vec u;
  Vec projected;
  double loss = 0.0;
};

/// Plain gradient descent on ||Proj(u) - target||^2 over the box [-1,1]^2
/// with anchor 0. Returns the full trajectory including the initial point.
std::vector<Toy2dRecord> run_toy2d(const Toy2dConfig& cfg);

struct WarpSample {
  Vec before;
  Vec after;
};

/// Uniform grid over [-extent, extent]^2 mapped through the layer.
std::vector<WarpSample> grid_warp(const SoftRadialLayer& layer, double extent,
                                  int points_per_axis);

}  // namespace radialfeas::tasks
