#pragma once

// Crossbar read channel: stored data, selector failures, sneak-path events and
// noisy resistance readback under Gaussian or lognormal variation.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "sneakbp/grid.hpp"
#include "sneakbp/random.hpp"

namespace sneakbp {

enum class NoiseModel { gaussian, lognormal };

inline std::string to_string(NoiseModel m) {
  return m == NoiseModel::gaussian ? "gaussian" : "lognormal";
}

inline NoiseModel parse_noise_model(const std::string& s) {
  if (s == "gaussian") return NoiseModel::gaussian;
  if (s == "lognormal") return NoiseModel::lognormal;
  throw std::invalid_argument("unknown noise model '" + s + "'");
}

/// The three noiseless resistance levels a cell can present.
enum class Level : std::uint8_t { high, sneak, low };

struct ChannelParams {
  int rows = 16;
  int cols = 16;
  double r_high = 1000.0;  // R0, stored 0
  double r_low = 100.0;    // R1, stored 1
  double q = 0.5;          // Pr(stored bit = 1)
  double p_sf = 0.001;     // selector failure probability
  double sigma = 40.0;     // noise standard deviation in ohms
  NoiseModel noise = NoiseModel::gaussian;

  /// Resistance of a high cell read in parallel with a three-cell sneak path.
  double r_sneak() const { return 1.0 / (1.0 / r_high + 1.0 / (3.0 * r_low)); }

  double level(Level l) const {
    switch (l) {
      case Level::high: return r_high;
      case Level::sneak: return r_sneak();
      case Level::low: return r_low;
    }
    return r_high;
  }

  void validate() const {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("array dimensions must be positive");
    if (!(r_low > 0.0) || !(r_high > r_low)) throw std::invalid_argument("need R0 > R1 > 0");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
    if (!(p_sf >= 0.0 && p_sf <= 1.0)) throw std::invalid_argument("p_sf must lie in [0,1]");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  }
};

using DataArray = BitGrid;
using SelectorFailureMap = BitGrid;
using SneakEventMap = BitGrid;

/// Generating realisation of one array. Used for metrics and the genie bound
/// only; detectors receive the readout signal alone.
struct GroundTruth {
  DataArray data;
  SelectorFailureMap selectors;
  SneakEventMap sneaks;
};

class ReadbackMatrix {
 public:
  ReadbackMatrix(Grid<double> signal, GroundTruth truth)
      : signal_(std::move(signal)), truth_(std::move(truth)) {}

  const Grid<double>& signal() const { return signal_; }
  const GroundTruth& truth() const { return truth_; }
  int rows() const { return signal_.rows(); }
  int cols() const { return signal_.cols(); }

 private:
  Grid<double> signal_;
  GroundTruth truth_;
};

inline DataArray sample_data(const ChannelParams& params, Rng& rng) {
  DataArray x(params.rows, params.cols);
  std::bernoulli_distribution bit(params.q);
  for (auto& v : x.values()) v = bit(rng) ? 1 : 0;
  return x;
}

inline SelectorFailureMap sample_selector_failures(const ChannelParams& params, Rng& rng) {
  SelectorFailureMap s(params.rows, params.cols);
  std::bernoulli_distribution failed(params.p_sf);
  for (auto& v : s.values()) v = failed(rng) ? 1 : 0;
  return s;
}

/// e(i,j) = 1 iff x(i,j) = 0 and some (i',j') with i' != i, j' != j has
/// x(i',j) = x(i,j') = x(i',j') = 1 and a failed selector at (i',j').
inline SneakEventMap compute_sneak_events(const DataArray& x, const SelectorFailureMap& s) {
  if (!x.same_shape(s)) throw std::invalid_argument("data and selector maps differ in shape");
  const int m = x.rows();
  const int n = x.cols();
  // A failed low cell (i',j') reaches (i,j) through (i',j) and (i,j'):
  // mark every column j of row i' and row i of column j' holding a one.
  SneakEventMap e(m, n);
  for (int fi = 0; fi < m; ++fi) {
    for (int fj = 0; fj < n; ++fj) {
      if (!s(fi, fj) || !x(fi, fj)) continue;
      for (int i = 0; i < m; ++i) {
        if (i == fi || !x(i, fj)) continue;
        for (int j = 0; j < n; ++j) {
          if (j == fj || !x(fi, j) || x(i, j)) continue;
          e(i, j) = 1;
        }
      }
    }
  }
  return e;
}

inline double noiseless_resistance(int x, int e, const ChannelParams& params) {
  if (x == 1 && e == 1) throw std::invalid_argument("a low-resistance cell cannot be sneak-affected");
  if (x == 1) return params.r_low;
  return e == 1 ? params.r_sneak() : params.r_high;
}

inline Level level_of(int x, int e) {
  if (x == 1) return Level::low;
  return e == 1 ? Level::sneak : Level::high;
}

struct LognormalParams {
  double mu;
  double s_squared;
};

/// Log-space mean and variance of a lognormal whose linear mean is R and
/// linear standard deviation is sigma.
inline LognormalParams lognormal_params(double r, double sigma) {
  if (!(r > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("lognormal_params needs R > 0, sigma > 0");
  const double r2 = r * r;
  return {std::log(r2 / std::sqrt(r2 + sigma * sigma)), std::log1p(sigma * sigma / r2)};
}

/// Draws the readback. One standard normal is consumed per cell in row-major
/// order regardless of the stored data, so two arrays read with the same
/// stream see the same noise realisation.
inline ReadbackMatrix read_array(const DataArray& x, const SelectorFailureMap& s,
                                 const ChannelParams& params, Rng& rng) {
  SneakEventMap e = compute_sneak_events(x, s);
  Grid<double> y(x.rows(), x.cols());
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      const double r = noiseless_resistance(x(i, j), e(i, j), params);
      const double draw = z(rng);
      if (params.noise == NoiseModel::gaussian) {
        y(i, j) = r + params.sigma * draw;
      } else {
        const auto lp = lognormal_params(r, params.sigma);
        y(i, j) = std::exp(lp.mu + std::sqrt(lp.s_squared) * draw);
      }
    }
  }
  return ReadbackMatrix(std::move(y), GroundTruth{x, s, std::move(e)});
}

inline double gaussian_likelihood(double y, double r, double sigma) {
  const double d = (y - r) / sigma;
  return std::exp(-0.5 * d * d) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

inline double lognormal_likelihood(double y, double r, double sigma) {
  if (!(y > 0.0)) throw std::invalid_argument("lognormal likelihood needs a positive reading");
  const auto lp = lognormal_params(r, sigma);
  const double s = std::sqrt(lp.s_squared);
  const double d = (std::log(y) - lp.mu) / s;
  return std::exp(-0.5 * d * d) / (y * s * std::sqrt(2.0 * std::numbers::pi));
}

/// Log densities of a reading under each of the three levels for the
/// configured noise model. Detectors only ever need log-ratios of these.
class LevelLikelihood {
 public:
  explicit LevelLikelihood(const ChannelParams& params) : model_(params.noise), sigma_(params.sigma) {
    for (Level l : {Level::high, Level::sneak, Level::low}) {
      const auto k = static_cast<std::size_t>(l);
      level_[k] = params.level(l);
      if (model_ == NoiseModel::lognormal) {
        const auto lp = lognormal_params(level_[k], sigma_);
        mu_[k] = lp.mu;
        s_[k] = std::sqrt(lp.s_squared);
        log_norm_[k] = std::log(s_[k]) + kHalfLog2Pi;
      } else {
        s_[k] = sigma_;
        log_norm_[k] = std::log(sigma_) + kHalfLog2Pi;
      }
    }
  }

  double log_density(double y, Level l) const {
    const auto k = static_cast<std::size_t>(l);
    if (model_ == NoiseModel::gaussian) {
      const double d = (y - level_[k]) / sigma_;
      return -0.5 * d * d - log_norm_[k];
    }
    if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
    const double ly = std::log(y);
    const double d = (ly - mu_[k]) / s_[k];
    return -0.5 * d * d - log_norm_[k] - ly;
  }

  /// log phi(y, a) - log phi(y, b), finite even when both densities underflow.
  double log_ratio(double y, Level a, Level b) const {
    if (model_ == NoiseModel::lognormal && !(y > 0.0)) return 0.0;
    return log_density(y, a) - log_density(y, b);
  }

  /// Maximum-likelihood level among the candidates (nearest level for
  /// Gaussian noise). Ties resolve to the earlier candidate.
  template <std::size_t K>
  Level most_likely(double y, const std::array<Level, K>& candidates) const {
    Level best = candidates[0];
    double best_ll = log_density(y, best);
    for (std::size_t k = 1; k < K; ++k) {
      const double ll = log_density(y, candidates[k]);
      if (ll > best_ll) {
        best_ll = ll;
        best = candidates[k];
      }
    }
    return best;
  }

  NoiseModel model() const { return model_; }

 private:
  static constexpr double kHalfLog2Pi = 0.91893853320467274178;

  NoiseModel model_;
  double sigma_;
  std::array<double, 3> level_{};
  std::array<double, 3> mu_{};
  std::array<double, 3> s_{};
  std::array<double, 3> log_norm_{};
};

namespace detail {

inline double binomial_pmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_c + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace detail

/// Pr(e = 1 | x = 0) for a cell of an M x N array with i.i.d. Bernoulli(q)
/// data and i.i.d. selector failures. u and v count the ones in the cell's
/// column and row; each of the u*v corner cells closes a path with
/// probability p_sf * q.
inline double theoretical_sneak_rate(const ChannelParams& params) {
  const int m1 = params.rows - 1;
  const int n1 = params.cols - 1;
  const double close = params.p_sf * params.q;
  if (close <= 0.0) return 0.0;
  double no_sneak = 0.0;
  for (int u = 0; u <= m1; ++u) {
    const double pu = detail::binomial_pmf(m1, u, params.q);
    if (pu == 0.0) continue;
    for (int v = 0; v <= n1; ++v) {
      const double pv = detail::binomial_pmf(n1, v, params.q);
      if (pv == 0.0) continue;
      no_sneak += pu * pv * std::pow(1.0 - close, static_cast<double>(u) * v);
    }
  }
  const double rate = 1.0 - no_sneak;
  return rate < 0.0 ? 0.0 : (rate > 1.0 ? 1.0 : rate);
}

}  // namespace sneakbp
