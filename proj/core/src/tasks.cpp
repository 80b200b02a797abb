#include "radialfeas/tasks.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "radialfeas/baselines.hpp"

namespace radialfeas::tasks {

namespace {

constexpr double kStdEps = 1e-8;

// Feature layout shared by the generator and the CSV loader: the flattened
// lookback window of returns, then per-asset rolling volatility, then rolling
// correlation to the cross-sectional mean proxy.
Mat portfolio_features(const Mat& returns, int lookback) {
  const int total = static_cast<int>(returns.rows());
  const int n = static_cast<int>(returns.cols());
  const int steps = total - lookback;
  if (steps < 1) throw InvalidInputError("portfolio features: series shorter than lookback");
  Mat feats(steps, lookback * n + 2 * n);
  for (int t = 0; t < steps; ++t) {
    const Mat window = returns.middleRows(t, lookback);  // rows t .. t+lookback-1
    int col = 0;
    for (int k = 0; k < lookback; ++k) {
      for (int i = 0; i < n; ++i) feats(t, col++) = window(k, i);
    }
    const Vec mean = window.colwise().mean();
    Vec vol(n);
    for (int i = 0; i < n; ++i) {
      vol[i] = std::sqrt((window.col(i).array() - mean[i]).square().mean());
    }
    const Vec market = window.rowwise().mean();
    const double mmean = market.mean();
    const double mstd = std::sqrt((market.array() - mmean).square().mean());
    for (int i = 0; i < n; ++i) feats(t, col++) = vol[i];
    for (int i = 0; i < n; ++i) {
      const double cov = ((window.col(i).array() - mean[i]) * (market.array() - mmean)).mean();
      feats(t, col++) = cov / (vol[i] * mstd + kStdEps);
    }
  }
  return feats;
}

void normalize_features(Mat& feats, int train_end) {
  const int rows = static_cast<int>(feats.rows());
  const int fit = std::min(std::max(train_end, 2), rows);
  for (int j = 0; j < feats.cols(); ++j) {
    const double mu = feats.col(j).head(fit).mean();
    const double sd = std::sqrt((feats.col(j).head(fit).array() - mu).square().mean());
    feats.col(j) = (feats.col(j).array() - mu) / (sd + kStdEps);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

Vec drift_weights(const Vec& w, const Vec& y) {
  if (w.size() != y.size()) throw InvalidInputError("drift_weights: size mismatch");
  const Vec grown = w.cwiseProduct(y);
  const double total = grown.sum();
  if (!(total > 0.0)) throw InvalidInputError("drift_weights: nonpositive portfolio growth");
  return grown / total;
}

double pseudo_huber_turnover(const Vec& w, const Vec& w_prev_drifted, double delta) {
  if (!(delta > 0.0)) throw InvalidInputError("pseudo_huber_turnover: delta must be positive");
  const Vec d = w - w_prev_drifted;
  return (d.array().square() + delta * delta).sqrt().sum() - delta * d.size();
}

SharpeResult sharpe_objective(const std::vector<Vec>& weights, const Mat& price_rel,
                              double gamma, double delta) {
  const int t_steps = static_cast<int>(price_rel.rows());
  if (t_steps < 2) throw InvalidInputError("sharpe_objective: need at least 2 return steps");
  if (static_cast<int>(weights.size()) != t_steps + 1)
    throw InvalidInputError("sharpe_objective: weights must hold one more entry than returns");

  Vec rets(t_steps);
  double turnover = 0.0;
  for (int t = 0; t < t_steps; ++t) {
    const Vec y = price_rel.row(t).transpose();
    const Vec& w_prev = weights[t];
    const Vec& w_now = weights[t + 1];
    const Vec drifted = drift_weights(w_prev, y);
    const double gross = w_prev.dot(y);
    rets[t] = gross - 0.5 * gamma * pseudo_huber_turnover(w_now, drifted, delta);
    turnover += 0.5 * (w_now - drifted).lpNorm<1>();
  }
  SharpeResult out;
  out.mean_return = rets.mean();
  out.std_return = std::sqrt((rets.array() - out.mean_return).square().mean());
  out.sharpe = out.mean_return / (out.std_return + kStdEps);
  out.mean_turnover = turnover / t_steps;
  return out;
}

ad::Var sharpe_objective_tape(ad::Tape& tape, const Vec& w0,
                              const std::vector<ad::Var>& weights, const Mat& price_rel,
                              double gamma, double delta) {
  using namespace ad;
  const int t_steps = static_cast<int>(price_rel.rows());
  if (t_steps < 2) throw InvalidInputError("sharpe_objective_tape: need at least 2 return steps");
  if (static_cast<int>(weights.size()) != t_steps)
    throw InvalidInputError("sharpe_objective_tape: one weight per return step expected");

  std::vector<Var> rets;
  Var w_prev = tape.constant(w0);
  for (int t = 0; t < t_steps; ++t) {
    const Vec y = price_rel.row(t).transpose();
    Var grown = mul_constvec(w_prev, y);
    Var gross = sum(grown);               // w_prev . y
    Var drifted = vs_div(grown, gross);   // diag(y) w / (y^T w)
    Var dv = sub(weights[t], drifted);
    Var ph = add_scalar(sum(sqrt_op(add_scalar(mul(dv, dv), delta * delta))),
                        -delta * static_cast<double>(y.size()));
    rets.push_back(sub(gross, scale(ph, 0.5 * gamma)));
    w_prev = weights[t];
  }
  Var r = concat(rets);
  Var m = mean(r);
  Var dev = sub(r, broadcast(m, t_steps));
  Var sd = sqrt_op(mean(mul(dev, dev)));
  return div(m, add_scalar(sd, kStdEps));
}

PortfolioBatch synth_market(uint64_t seed, int n_assets, int steps, int factor_count,
                            int lookback, double train_frac) {
  if (n_assets < 2 || steps < 2 || factor_count < 1)
    throw InvalidInputError("synth_market: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int total = steps + lookback;
  Mat loadings(n_assets, factor_count);
  for (int i = 0; i < n_assets; ++i) {
    for (int k = 0; k < factor_count; ++k)
      loadings(i, k) = gauss(rng) / std::sqrt(static_cast<double>(factor_count));
  }
  Vec drift(n_assets);
  for (int i = 0; i < n_assets; ++i) drift[i] = 5e-4 * gauss(rng);

  // AR(1) factors make the return window genuinely predictive.
  const double phi = 0.9;
  const double factor_vol = 0.01;
  const double idio_vol = 0.01;
  Vec f = Vec::Zero(factor_count);
  Mat returns(total, n_assets);
  for (int t = 0; t < total; ++t) {
    for (int k = 0; k < factor_count; ++k)
      f[k] = phi * f[k] + factor_vol * std::sqrt(1.0 - phi * phi) * gauss(rng);
    for (int i = 0; i < n_assets; ++i) {
      returns(t, i) = drift[i] + loadings.row(i).dot(f) + idio_vol * gauss(rng);
    }
  }

  PortfolioBatch batch;
  batch.lookback = lookback;
  batch.features = portfolio_features(returns, lookback);
  batch.price_rel = (returns.bottomRows(steps).array() + 1.0).cwiseMax(0.01);
  batch.train_end = static_cast<int>(steps * train_frac);
  normalize_features(batch.features, batch.train_end);
  batch.caps = Vec::Ones(n_assets);
  return batch;
}

PortfolioBatch load_returns_csv(const std::string& path, int lookback, double train_frac) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("load_returns_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("load_returns_csv: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date")
    throw InvalidInputError("load_returns_csv: expected header date,asset_1..asset_N");
  const int n = static_cast<int>(header.size()) - 1;

  std::vector<Vec> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 1)
      throw InvalidInputError("load_returns_csv: ragged row");
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = std::stod(cells[i + 1]);
    if (!(y.minCoeff() > 0.0))
      throw InvalidInputError("load_returns_csv: price relatives must be positive");
    rows.push_back(std::move(y));
  }
  const int total = static_cast<int>(rows.size());
  if (total <= lookback + 1) throw InvalidInputError("load_returns_csv: series too short");

  Mat returns(total, n);
  for (int t = 0; t < total; ++t) returns.row(t) = rows[t].transpose().array() - 1.0;

  PortfolioBatch batch;
  batch.lookback = lookback;
  batch.features = portfolio_features(returns, lookback);
  const int steps = total - lookback;
  Mat price(steps, n);
  for (int t = 0; t < steps; ++t) price.row(t) = rows[t + lookback].transpose();
  batch.price_rel = std::move(price);
  batch.train_end = static_cast<int>(steps * train_frac);
  normalize_features(batch.features, batch.train_end);
  batch.caps = Vec::Ones(n);
  return batch;
}

double softmin(double x, double y, double tau) {
  if (!(tau > 0.0)) throw InvalidInputError("softmin: tau must be positive");
  const double lo = std::min(x, y);
  return lo - tau * std::log1p(std::exp(-std::abs(x - y) / tau));
}

std::optional<double> served_rate(const Vec& alloc, const Vec& demand, double tau,
                                  ServedMode mode) {
  if (alloc.size() != demand.size()) throw InvalidInputError("served_rate: size mismatch");
  const double total = demand.sum();
  if (!(total > 0.0)) return std::nullopt;
  double served = 0.0;
  for (int i = 0; i < alloc.size(); ++i) {
    served += mode == ServedMode::soft ? softmin(alloc[i], demand[i], tau)
                                       : std::min(alloc[i], demand[i]);
  }
  return served / total;
}

Vec scaled_capped_projection(const std::function<Vec(const Vec&)>& unit_projector,
                             const Vec& u, double supply, double kappa) {
  if (!(supply > 0.0)) throw InvalidInputError("scaled_capped_projection: supply must be > 0");
  if (!(kappa * u.size() > 1.0))
    throw InfeasibleSetError("scaled_capped_projection: kappa * N must exceed 1");
  return supply * unit_projector(u / supply);
}

DispatchBatch synth_demand(uint64_t seed, int zones, int steps, int lookback,
                           double train_frac, double kappa) {
  if (zones < 2 || steps < 2) throw InvalidInputError("synth_demand: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int day = 24, week = 168;
  Vec base(zones), phase_d(zones), phase_w(zones), amp_d(zones), amp_w(zones);
  for (int i = 0; i < zones; ++i) {
    base[i] = 10.0 * std::exp(0.5 * gauss(rng));
    phase_d[i] = day * unif(rng);
    phase_w[i] = week * unif(rng);
    amp_d[i] = 0.3 + 0.3 * unif(rng);
    amp_w[i] = 0.1 + 0.2 * unif(rng);
  }

  const int total = steps + lookback;
  Mat demand(total, zones);
  for (int t = 0; t < total; ++t) {
    for (int i = 0; i < zones; ++i) {
      const double season =
          (1.0 + amp_d[i] * std::sin(2.0 * M_PI * (t + phase_d[i]) / day)) *
          (1.0 + amp_w[i] * std::sin(2.0 * M_PI * (t + phase_w[i]) / week));
      const double m = base[i] * season;
      demand(t, i) = std::max(0.0, m + std::sqrt(std::max(m, 1e-9)) * gauss(rng));
    }
  }

  // Supply: smoothed fraction of total demand, mildly time varying.
  Vec supply(total);
  double ema = demand.row(0).sum();
  for (int t = 0; t < total; ++t) {
    ema = 0.9 * ema + 0.1 * demand.row(t).sum();
    supply[t] = (0.7 + 0.1 * std::sin(2.0 * M_PI * t / 100.0)) * ema;
  }

  DispatchBatch batch;
  batch.kappa = kappa;
  batch.lookback = lookback;
  const int d_feat = lookback * zones + 5;
  batch.features = Mat(steps, d_feat);
  batch.demand = demand.bottomRows(steps);
  batch.supply = supply.tail(steps);
  batch.train_end = static_cast<int>(steps * train_frac);

  for (int t = 0; t < steps; ++t) {
    int col = 0;
    for (int k = 0; k < lookback; ++k) {
      for (int i = 0; i < zones; ++i) batch.features(t, col++) = demand(t + k, i);
    }
    const double tt = t + lookback;
    batch.features(t, col++) = std::sin(2.0 * M_PI * tt / day);
    batch.features(t, col++) = std::cos(2.0 * M_PI * tt / day);
    batch.features(t, col++) = std::sin(2.0 * M_PI * tt / week);
    batch.features(t, col++) = std::cos(2.0 * M_PI * tt / week);
    batch.features(t, col++) = batch.supply[t];
  }
  normalize_features(batch.features, batch.train_end);
  return batch;
}

DispatchBatch load_demand_csv(const std::string& path, int lookback, double train_frac,
                              double kappa) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("load_demand_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("load_demand_csv: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "timestamp" || header.back() != "supply")
    throw InvalidInputError("load_demand_csv: expected header timestamp,zone_1..zone_N,supply");
  const int n = static_cast<int>(header.size()) - 2;

  std::vector<Vec> rows;
  std::vector<double> sup;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 2)
      throw InvalidInputError("load_demand_csv: ragged row");
    Vec d(n);
    for (int i = 0; i < n; ++i) d[i] = std::stod(cells[i + 1]);
    if (d.minCoeff() < 0.0) throw InvalidInputError("load_demand_csv: negative demand");
    rows.push_back(std::move(d));
    sup.push_back(std::stod(cells.back()));
    if (!(sup.back() > 0.0)) throw InvalidInputError("load_demand_csv: supply must be positive");
  }
  const int total = static_cast<int>(rows.size());
  if (total <= lookback + 1) throw InvalidInputError("load_demand_csv: series too short");

  const int day = 24, week = 168;
  const int steps = total - lookback;
  DispatchBatch batch;
  batch.kappa = kappa;
  batch.lookback = lookback;
  batch.features = Mat(steps, lookback * n + 5);
  batch.demand = Mat(steps, n);
  batch.supply = Vec(steps);
  batch.train_end = static_cast<int>(steps * train_frac);
  for (int t = 0; t < steps; ++t) {
    batch.demand.row(t) = rows[t + lookback].transpose();
    batch.supply[t] = sup[t + lookback];
    int col = 0;
    for (int k = 0; k < lookback; ++k) {
      for (int i = 0; i < n; ++i) batch.features(t, col++) = rows[t + k][i];
    }
    const double tt = t + lookback;
    batch.features(t, col++) = std::sin(2.0 * M_PI * tt / day);
    batch.features(t, col++) = std::cos(2.0 * M_PI * tt / day);
    batch.features(t, col++) = std::sin(2.0 * M_PI * tt / week);
    batch.features(t, col++) = std::cos(2.0 * M_PI * tt / week);
    batch.features(t, col++) = batch.supply[t];
  }
  normalize_features(batch.features, batch.train_end);
  return batch;
}

double default_softmin_tau(const Mat& demand) {
  return 0.05 * demand.mean();
}

std::vector<Toy2dRecord> run_toy2d(const Toy2dConfig& cfg) {
  if (cfg.target.size() != 2 || cfg.init.size() != 2)
    throw InvalidInputError("run_toy2d: target and init must be 2-vectors");
  const ConvexSet box = ConvexSet::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0),
                                       Vec::Zero(2));
  if (!box.contains(cfg.target, 0.0))
    throw InvalidInputError("run_toy2d: target lies outside the feasible box");
  const bool soft = cfg.method == "soft-radial";
  if (!soft && cfg.method != "orthogonal")
    throw InvalidInputError("run_toy2d: method must be soft-radial or orthogonal");

  const SoftRadialLayer layer(box, cfg.contraction);
  auto project = [&](const Vec& u) -> Vec {
    if (soft) return layer.soft_project(u);
    return u.cwiseMax(-1.0).cwiseMin(1.0);
  };
  auto pullback = [&](const Vec& u, const Vec& g) -> Vec {
    if (soft) return layer.vjp(u, g).grad;
    Vec out = Vec::Zero(2);
    for (int i = 0; i < 2; ++i) {
      if (u[i] > -1.0 && u[i] < 1.0) out[i] = g[i];
    }
    return out;
  };

  std::vector<Toy2dRecord> trace;
  Vec u = cfg.init;
  for (int k = 0; k <= cfg.steps; ++k) {
    const Vec p = project(u);
    const double loss = (p - cfg.target).squaredNorm();
    trace.push_back({u, p, loss});
    if (k == cfg.steps) break;
    const Vec grad = pullback(u, 2.0 * (p - cfg.target));
    u -= cfg.lr * grad;
  }
  return trace;
}

std::vector<WarpSample> grid_warp(const SoftRadialLayer& layer, double extent,
                                  int points_per_axis) {
  std::vector<WarpSample> out;
  out.reserve(static_cast<size_t>(points_per_axis) * points_per_axis);
  for (int i = 0; i < points_per_axis; ++i) {
    for (int j = 0; j < points_per_axis; ++j) {
      Vec u(2);
      u[0] = -extent + 2.0 * extent * i / (points_per_axis - 1);
      u[1] = -extent + 2.0 * extent * j / (points_per_axis - 1);
      out.push_back({u, layer.soft_project(u)});
    }
  }
  return out;
}

}  // namespace radialfeas::tasks
