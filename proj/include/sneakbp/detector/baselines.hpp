#pragma once

#include <array>
#include <cmath>

#include "sneakbp/channel.hpp"
#include "sneakbp/grid.hpp"

namespace sneakbp {

namespace detail {
inline double log_add(double a, double b) {
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  if (lo == -INFINITY) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}
}  // namespace detail

struct EseResult {
  Grid<double> llr;  // log Pr(y | x=0) / Pr(y | x=1), positive favours 0
  BitGrid x_hat;
  double sneak_rate = 0.0;
};

/// Fraction of readings whose nearest level is R0' among those nearest to R0'
/// or R0; 0 when neither occurs.
inline double estimate_sneak_rate(const Grid<double>& y, const LevelLikelihood& lik) {
  constexpr std::array<Level, 3> levels{Level::high, Level::low, Level::sneak};
  long n_sneak = 0;
  long n_high = 0;
  for (double v : y.values()) {
    const Level l = lik.most_likely(v, levels);
    if (l == Level::sneak) ++n_sneak;
    if (l == Level::high) ++n_high;
  }
  return n_sneak + n_high == 0 ? 0.0 : static_cast<double>(n_sneak) / static_cast<double>(n_sneak + n_high);
}

/// LLR of one reading when sneak interference is an i.i.d. mixture with rate eps.
inline double ese_llr(double y, double eps, const LevelLikelihood& lik) {
  const double ll_sneak = eps > 0.0 ? std::log(eps) + lik.log_density(y, Level::sneak) : -INFINITY;
  const double ll_high = eps < 1.0 ? std::log1p(-eps) + lik.log_density(y, Level::high) : -INFINITY;
  return detail::log_add(ll_sneak, ll_high) - lik.log_density(y, Level::low);
}

inline EseResult ese_detector(const Grid<double>& y, const ChannelParams& params) {
  const LevelLikelihood lik(params);
  EseResult out{Grid<double>(y.rows(), y.cols()), BitGrid(y.rows(), y.cols()),
                estimate_sneak_rate(y, lik)};
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double l = ese_llr(y.at_flat(t), out.sneak_rate, lik);
    out.llr.at_flat(t) = l;
    out.x_hat.at_flat(t) = l < 0.0 ? 1 : 0;
  }
  return out;
}

/// Two-level decision ignoring sneak paths: 1 iff R1 is the more likely of
/// {R0, R1} (the nearer level under Gaussian noise).
inline BitGrid threshold_detector(const Grid<double>& y, const ChannelParams& params) {
  const LevelLikelihood lik(params);
  constexpr std::array<Level, 2> levels{Level::high, Level::low};
  BitGrid x(y.rows(), y.cols());
  for (std::size_t t = 0; t < y.size(); ++t)
    x.at_flat(t) = lik.most_likely(y.at_flat(t), levels) == Level::low ? 1 : 0;
  return x;
}

}  // namespace sneakbp
