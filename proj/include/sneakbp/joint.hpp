#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sneakbp/channel.hpp"
#include "sneakbp/detector/baselines.hpp"
#include "sneakbp/detector/detect.hpp"
#include "sneakbp/polar/bp_decoder.hpp"
#include "sneakbp/polar/code_spec.hpp"
#include "sneakbp/polar/encoder.hpp"

namespace sneakbp {

struct JointConfig {
  int outer_iterations = 10;
  int detector_iterations_per_outer = 2;
  int decoder_iterations_per_outer = 5;
  double fixed_llr_magnitude = 50.0;
  bool strict = false;  // rerun the detector from scratch on every outer pass

  void validate() const {
    if (outer_iterations < 1 || detector_iterations_per_outer < 1 || decoder_iterations_per_outer < 1)
      throw std::invalid_argument("joint iteration counts must be at least 1");
    if (!(fixed_llr_magnitude > 0.0)) throw std::invalid_argument("fixed LLR magnitude must be positive");
  }
};

enum class CodedScheme { joint, ese_iteration, pipeline };

inline std::string to_string(CodedScheme s) {
  switch (s) {
    case CodedScheme::joint: return "joint";
    case CodedScheme::ese_iteration: return "ese-iter";
    case CodedScheme::pipeline: return "pipeline";
  }
  return "?";
}

inline CodedScheme parse_scheme(const std::string& s) {
  if (s == "joint") return CodedScheme::joint;
  if (s == "ese-iter") return CodedScheme::ese_iteration;
  if (s == "pipeline") return CodedScheme::pipeline;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

/// Row-major cell <-> codeword position map: cell (i, j) holds bit i * N + j.
class CellCodeMap {
 public:
  CellCodeMap(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("array dimensions must be positive");
  }
  int size() const { return rows_ * cols_; }
  int position(Cell c) const { return c.row * cols_ + c.col; }
  Cell cell(int t) const { return {t / cols_, t % cols_}; }

 private:
  int rows_;
  int cols_;
};

inline DataArray store_codeword(const polar::Bits& codeword, int rows, int cols) {
  const CellCodeMap map(rows, cols);
  if (static_cast<int>(codeword.size()) != map.size())
    throw std::invalid_argument("codeword length " + std::to_string(codeword.size()) + " does not fill a " +
                                std::to_string(rows) + "x" + std::to_string(cols) + " array");
  DataArray x(rows, cols);
  for (int t = 0; t < map.size(); ++t) x[map.cell(t)] = codeword[static_cast<std::size_t>(t)];
  return x;
}

inline polar::Bits flatten(const DataArray& x) {
  const CellCodeMap map(x.rows(), x.cols());
  polar::Bits out(static_cast<std::size_t>(map.size()));
  for (int t = 0; t < map.size(); ++t) out[static_cast<std::size_t>(t)] = x[map.cell(t)];
  return out;
}

/// log((1 - P) / P) of a clamped Pr(r = R1); positive favours bit 0.
inline double spn_to_llr(double posterior_r1) {
  const double p = clamp_prob(posterior_r1);
  return std::log1p(-p) - std::log(p);
}

/// Pr(x = 1) implied by a decoder LLR.
inline double llr_to_prior_one(double llr) { return 1.0 / (1.0 + std::exp(std::clamp(llr, -700.0, 700.0))); }

/// Channel LLRs of decided cells: +magnitude for confident highs, -magnitude
/// for definite lows. `pinned` marks those positions.
struct FixedLlrs {
  std::vector<double> llr;
  std::vector<std::uint8_t> pinned;
};

inline FixedLlrs fixed_llrs(const LabelGrid& labels, const JointConfig& config) {
  const CellCodeMap map(labels.rows(), labels.cols());
  FixedLlrs out{std::vector<double>(static_cast<std::size_t>(map.size()), 0.0),
                std::vector<std::uint8_t>(static_cast<std::size_t>(map.size()), 0)};
  for (int t = 0; t < map.size(); ++t) {
    const CellLabel l = labels[map.cell(t)];
    if (l == CellLabel::uncertain) continue;
    out.llr[static_cast<std::size_t>(t)] = l == CellLabel::high ? config.fixed_llr_magnitude : -config.fixed_llr_magnitude;
    out.pinned[static_cast<std::size_t>(t)] = 1;
  }
  return out;
}

/// Replaces every graph node's data prior with the decoder's extrinsic belief.
inline void decoder_feedback_to_detector(const std::vector<double>& extrinsic_llrs, BpDetector& detector) {
  const CellCodeMap map(detector.labels().rows(), detector.labels().cols());
  const auto& graph = detector.graph();
  for (int a = 0; a < graph.node_count(); ++a)
    detector.set_prior_one(a, llr_to_prior_one(extrinsic_llrs[static_cast<std::size_t>(map.position(graph.cell(a)))]));
}

struct JointResult {
  polar::Bits info_hat;
  std::vector<double> channel_llrs;  // last LLRs handed to the decoder
};

/// Detector/decoder loop. The first pass runs the detector's full iteration
/// budget; later passes continue it incrementally (or restart it in strict
/// mode) with the decoder's extrinsic beliefs as data priors. The detector
/// sends its extrinsic LLR, which equals the Pr(r = R1) LLR at a uniform prior.
inline JointResult run_joint(const ReadbackMatrix& y, const polar::PolarCodeSpec& spec, const ChannelParams& params,
                             const JointConfig& config, const DetectorConfig& detector_config) {
  config.validate();
  detector_config.validate();
  if (y.rows() * y.cols() != spec.block_length())
    throw std::invalid_argument("array size does not match the code length");
  if (detector_config.variant == DetectorVariant::ese || detector_config.variant == DetectorVariant::threshold)
    throw std::invalid_argument("joint decoding needs a message-passing detector");

  const bool aiding = detector_config.variant == DetectorVariant::improved;
  BpDetector det = detail::make_bp(y.signal(), params, detector_config, aiding);
  if (detector_config.variant == DetectorVariant::genie) det.pin_failures(y.truth().selectors);
  const CellCodeMap map(y.rows(), y.cols());
  FixedLlrs ch = fixed_llrs(det.labels(), config);
  polar::PolarBpDecoder dec(spec);
  const auto& graph = det.graph();

  for (int o = 0; o < config.outer_iterations; ++o) {
    if (!graph.empty()) {
      if (o == 0 || config.strict) {
        if (o > 0) det.reset();
        det.iterate(detector_config.max_iterations);
      } else {
        det.iterate(config.detector_iterations_per_outer);
      }
    }
    for (int a = 0; a < graph.node_count(); ++a)
      ch.llr[static_cast<std::size_t>(map.position(graph.cell(a)))] =
          std::clamp(det.extrinsic_llr(a), -config.fixed_llr_magnitude, config.fixed_llr_magnitude);
    dec.set_channel_llrs(ch.llr);
    dec.iterate(config.decoder_iterations_per_outer);
    if (o + 1 < config.outer_iterations) decoder_feedback_to_detector(dec.extrinsic_llrs(), det);
  }
  return {dec.info_decisions(), ch.llr};
}

/// Single detector pass followed by decoding with the whole decoder budget.
inline JointResult run_pipeline(const ReadbackMatrix& y, const polar::PolarCodeSpec& spec, const ChannelParams& params,
                                const JointConfig& config, const DetectorConfig& detector_config) {
  JointConfig once = config;
  once.validate();
  once.decoder_iterations_per_outer = config.outer_iterations * config.decoder_iterations_per_outer;
  once.outer_iterations = 1;
  return run_joint(y, spec, params, once, detector_config);
}

/// Sneak-rate estimate from the current bit decisions: among cells decided
/// as 0, the fraction whose reading is more likely R0' than R0.
inline double reestimate_sneak_rate(const Grid<double>& y, const std::vector<std::uint8_t>& x_hat,
                                    const LevelLikelihood& lik) {
  constexpr std::array<Level, 2> levels{Level::high, Level::sneak};
  long zeros = 0;
  long sneaks = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (x_hat[t]) continue;
    ++zeros;
    if (lik.most_likely(y.at_flat(t), levels) == Level::sneak) ++sneaks;
  }
  return zeros == 0 ? 0.0 : static_cast<double>(sneaks) / static_cast<double>(zeros);
}

/// ESE detector inside the same outer loop. Each pass after the first
/// re-estimates the sneak rate from decisions that weigh the ESE LLR with the
/// decoder's prior odds; the decoder receives the ESE LLR itself.
inline JointResult ese_with_iteration(const ReadbackMatrix& y, const polar::PolarCodeSpec& spec,
                                      const ChannelParams& params, const JointConfig& config) {
  config.validate();
  if (y.rows() * y.cols() != spec.block_length())
    throw std::invalid_argument("array size does not match the code length");
  const LevelLikelihood lik(params);
  const Grid<double>& signal = y.signal();
  const auto n = static_cast<std::size_t>(spec.block_length());
  std::vector<double> ch(n);
  std::vector<double> prior_llr(n, 0.0);
  std::vector<std::uint8_t> x_hat(n);
  polar::PolarBpDecoder dec(spec);

  double eps = estimate_sneak_rate(signal, lik);
  for (int o = 0; o < config.outer_iterations; ++o) {
    if (o > 0) {
      for (std::size_t t = 0; t < n; ++t) x_hat[t] = ese_llr(signal.at_flat(t), eps, lik) + prior_llr[t] < 0.0;
      eps = reestimate_sneak_rate(signal, x_hat, lik);
    }
    for (std::size_t t = 0; t < n; ++t)
      ch[t] = std::clamp(ese_llr(signal.at_flat(t), eps, lik), -config.fixed_llr_magnitude, config.fixed_llr_magnitude);
    dec.set_channel_llrs(ch);
    dec.iterate(config.decoder_iterations_per_outer);
    prior_llr = dec.extrinsic_llrs();
  }
  return {dec.info_decisions(), ch};
}

}  // namespace sneakbp
