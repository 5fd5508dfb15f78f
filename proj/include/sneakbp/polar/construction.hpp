#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <stdexcept>
#include <vector>

#include "sneakbp/channel.hpp"
#include "sneakbp/polar/code_spec.hpp"

namespace sneakbp::polar {

/// Polarization weight of index i: sum over set bits j of 2^(j/4).
inline double polarization_weight(int i) {
  double w = 0.0;
  for (int j = 0; (i >> j) != 0; ++j)
    if ((i >> j) & 1) w += std::pow(2.0, j / 4.0);
  return w;
}

/// All indices of a length-N code, most reliable first.
inline std::vector<int> pw_reliability(int block_length) {
  log2_exact(block_length);
  std::vector<double> w(static_cast<std::size_t>(block_length));
  for (int i = 0; i < block_length; ++i) w[static_cast<std::size_t>(i)] = polarization_weight(i);
  std::vector<int> order(static_cast<std::size_t>(block_length));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return w[static_cast<std::size_t>(a)] > w[static_cast<std::size_t>(b)];
  });
  return order;
}

/// The K most reliable indices by polarization weight.
inline PolarCodeSpec pw_construct(int block_length, int dimension) {
  if (dimension < 0 || dimension > block_length) throw std::invalid_argument("dimension must lie in [0, N]");
  const auto order = pw_reliability(block_length);
  return PolarCodeSpec(block_length, std::vector<int>(order.begin(), order.begin() + dimension));
}

/// Bhattacharyya parameter of binary antipodal signalling with level
/// separation d under Gaussian noise of standard deviation sigma.
inline double bhattacharyya_base(double separation, double sigma) {
  return std::exp(-separation * separation / (8.0 * sigma * sigma));
}

/// Z of every synthesized sub-channel, by the upper-bound recursion
/// Z- = 2Z - Z^2 and Z+ = Z^2. The most significant index bit selects the
/// first (outermost) polarization step of the natural-order transform.
inline std::vector<double> bhattacharyya_parameters(int block_length, double z_base) {
  const int n = log2_exact(block_length);
  std::vector<double> z(static_cast<std::size_t>(block_length));
  for (int i = 0; i < block_length; ++i) {
    double v = z_base;
    for (int b = n - 1; b >= 0; --b) v = ((i >> b) & 1) ? v * v : 2.0 * v - v * v;
    z[static_cast<std::size_t>(i)] = v;
  }
  return z;
}

struct ConstructionParams {
  double beta1 = 0.45;
  double beta2 = 0.45;
  double sigma_design = 40.0;

  void validate() const {
    if (!(beta1 > 0.0 && beta1 < 0.5) || !(beta2 > 0.0 && beta2 < 0.5))
      throw std::invalid_argument("beta1 and beta2 must lie in (0, 1/2)");
    if (!(sigma_design > 0.0)) throw std::invalid_argument("sigma_design must be positive");
  }
};

/// Z_base of the all-sneak state (R0' against R1) and of the sneak-free
/// state (R0 against R1).
inline double fsp_base(const ChannelParams& channel, double sigma) {
  return bhattacharyya_base(channel.r_sneak() - channel.r_low, sigma);
}
inline double spf_base(const ChannelParams& channel, double sigma) {
  return bhattacharyya_base(channel.r_high - channel.r_low, sigma);
}

/// Reliability threshold 2^(-N^beta) / N.
inline double reliability_threshold(int block_length, double beta) {
  return std::exp2(-std::pow(static_cast<double>(block_length), beta)) / block_length;
}

struct PredeterminedSets {
  std::vector<int> reliable;    // A_pre: good even when every high cell is sneak-affected
  std::vector<int> unreliable;  // F_pre: bad even without any sneak path
  std::vector<int> searchable;  // Q: everything else

  std::size_t size() const { return reliable.size() + unreliable.size() + searchable.size(); }
};

inline PredeterminedSets predetermined_sets(int block_length, const ConstructionParams& params,
                                            const ChannelParams& channel) {
  params.validate();
  const auto z_fsp = bhattacharyya_parameters(block_length, fsp_base(channel, params.sigma_design));
  const auto z_spf = bhattacharyya_parameters(block_length, spf_base(channel, params.sigma_design));
  const double t1 = reliability_threshold(block_length, params.beta1);
  const double t2 = reliability_threshold(block_length, params.beta2);
  PredeterminedSets out;
  for (int i = 0; i < block_length; ++i) {
    const bool good = z_fsp[static_cast<std::size_t>(i)] < t1;
    const bool bad = z_spf[static_cast<std::size_t>(i)] > t2;
    if (good && bad) throw std::invalid_argument("index " + std::to_string(i) +
                                                 " is both reliable and unreliable; adjust beta1/beta2");
    if (good)
      out.reliable.push_back(i);
    else if (bad)
      out.unreliable.push_back(i);
    else
      out.searchable.push_back(i);
  }
  return out;
}

}  // namespace sneakbp::polar
