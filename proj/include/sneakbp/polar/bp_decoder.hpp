#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sneakbp/polar/code_spec.hpp"
#include "sneakbp/polar/encoder.hpp"

namespace sneakbp::polar {

/// Finite stand-in for an infinite LLR; every message is clamped to this.
inline constexpr double kLlrClamp = 50.0;

inline double clamp_llr(double l, double limit = kLlrClamp) { return std::clamp(l, -limit, limit); }

/// Min-sum approximation of the check-node (box-plus) operation.
inline double min_sum(double a, double b) {
  const double m = std::min(std::fabs(a), std::fabs(b));
  return (a < 0.0) != (b < 0.0) ? -m : m;
}

/// Flooding belief propagation on the (n+1) x N polar factor graph. Layer 0 is
/// the u domain, layer n the codeword. L messages travel from the channel
/// towards u, R messages from the frozen-bit priors towards the channel.
/// LLRs are log Pr(0)/Pr(1). The state persists between calls so an outer
/// loop can refresh the channel LLRs and continue.
class PolarBpDecoder {
 public:
  explicit PolarBpDecoder(const PolarCodeSpec& spec)
      : spec_(spec),
        n_(spec.block_length()),
        stages_(spec.stages()),
        left_(static_cast<std::size_t>(stages_ + 1) * n_, 0.0),
        right_(static_cast<std::size_t>(stages_ + 1) * n_, 0.0) {
    reset();
  }

  /// Clears all messages; frozen positions get the +clamp prior.
  void reset() {
    std::fill(left_.begin(), left_.end(), 0.0);
    std::fill(right_.begin(), right_.end(), 0.0);
    for (int i = 0; i < n_; ++i) R(0, i) = spec_.is_frozen(i) ? kLlrClamp : 0.0;
  }

  void set_channel_llrs(const std::vector<double>& llrs) {
    if (static_cast<int>(llrs.size()) != n_) throw std::invalid_argument("channel LLR count does not match the code");
    for (int i = 0; i < n_; ++i) L(stages_, i) = clamp_llr(llrs[static_cast<std::size_t>(i)]);
  }

  /// Each iteration sweeps L from the channel to u, then R from u to the channel.
  void iterate(int iterations) {
    for (int it = 0; it < iterations; ++it) {
      for (int s = stages_ - 1; s >= 0; --s) {
        const int h = 1 << s;
        for (int base = 0; base < n_; base += 2 * h)
          for (int j = base; j < base + h; ++j) {
            const double l_top = L(s + 1, j);
            const double l_bot = L(s + 1, j + h);
            L(s, j) = clamp_llr(min_sum(l_top, l_bot + R(s, j + h)));
            L(s, j + h) = clamp_llr(min_sum(R(s, j), l_top) + l_bot);
          }
      }
      for (int s = 0; s < stages_; ++s) {
        const int h = 1 << s;
        for (int base = 0; base < n_; base += 2 * h)
          for (int j = base; j < base + h; ++j) {
            const double r_top = R(s, j);
            const double r_bot = R(s, j + h);
            R(s + 1, j) = clamp_llr(min_sum(r_top, L(s + 1, j + h) + r_bot));
            R(s + 1, j + h) = clamp_llr(min_sum(r_top, L(s + 1, j)) + r_bot);
          }
      }
      ++iterations_;
    }
  }

  /// Decision LLR of u_i.
  double u_llr(int i) const { return L(0, i) + R(0, i); }
  /// What the code says about codeword bit t, excluding its own channel LLR.
  double x_extrinsic(int t) const { return R(stages_, t); }
  double x_channel(int t) const { return L(stages_, t); }

  std::vector<double> info_llrs() const {
    std::vector<double> out;
    out.reserve(spec_.info_set().size());
    for (int i : spec_.info_set()) out.push_back(u_llr(i));
    return out;
  }

  std::vector<double> extrinsic_llrs() const {
    std::vector<double> out(static_cast<std::size_t>(n_));
    for (int t = 0; t < n_; ++t) out[static_cast<std::size_t>(t)] = x_extrinsic(t);
    return out;
  }

  /// Info bit is 0 iff its decision LLR is nonnegative.
  Bits info_decisions() const {
    Bits out;
    out.reserve(spec_.info_set().size());
    for (int i : spec_.info_set()) out.push_back(u_llr(i) >= 0.0 ? 0 : 1);
    return out;
  }

  const PolarCodeSpec& spec() const { return spec_; }
  int iterations_run() const { return iterations_; }

 private:
  double& L(int s, int i) { return left_[static_cast<std::size_t>(s) * n_ + i]; }
  double L(int s, int i) const { return left_[static_cast<std::size_t>(s) * n_ + i]; }
  double& R(int s, int i) { return right_[static_cast<std::size_t>(s) * n_ + i]; }
  double R(int s, int i) const { return right_[static_cast<std::size_t>(s) * n_ + i]; }

  PolarCodeSpec spec_;
  int n_;
  int stages_;
  int iterations_ = 0;
  std::vector<double> left_;
  std::vector<double> right_;
};

struct DecodeOutput {
  std::vector<double> info_llrs;       // u-domain decision LLRs on A
  std::vector<double> extrinsic_llrs;  // x-domain, total minus channel input
};

inline DecodeOutput bp_decode(const std::vector<double>& channel_llrs, const PolarCodeSpec& spec,
                              int iterations) {
  PolarBpDecoder dec(spec);
  dec.set_channel_llrs(channel_llrs);
  dec.iterate(iterations);
  return {dec.info_llrs(), dec.extrinsic_llrs()};
}

}  // namespace sneakbp::polar
