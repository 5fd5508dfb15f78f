#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "sneakbp/channel.hpp"
#include "sneakbp/detector/baselines.hpp"
#include "sneakbp/detector/bp_detector.hpp"
#include "sneakbp/detector/labels.hpp"

namespace sneakbp {

enum class DetectorVariant { basic, improved, ese, threshold, genie };

inline std::string to_string(DetectorVariant v) {
  switch (v) {
    case DetectorVariant::basic: return "bp";
    case DetectorVariant::improved: return "bp-improved";
    case DetectorVariant::ese: return "ese";
    case DetectorVariant::threshold: return "threshold";
    case DetectorVariant::genie: return "genie";
  }
  return "?";
}

inline DetectorVariant parse_detector(const std::string& s) {
  if (s == "bp" || s == "basic") return DetectorVariant::basic;
  if (s == "bp-improved" || s == "improved") return DetectorVariant::improved;
  if (s == "ese") return DetectorVariant::ese;
  if (s == "threshold") return DetectorVariant::threshold;
  if (s == "genie") return DetectorVariant::genie;
  throw std::invalid_argument("unknown detector '" + s + "'");
}

struct DetectorConfig {
  DetectorVariant variant = DetectorVariant::improved;
  int max_iterations = 15;
  double sf_decision_threshold = 0.99;
  RefineMode refine = RefineMode::fixed_point;

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("detector needs at least one iteration");
    if (!(sf_decision_threshold > 0.0 && sf_decision_threshold < 1.0))
      throw std::invalid_argument("selector-failure threshold must lie in (0,1)");
  }
};

struct DetectionResult {
  BitGrid x_hat;
  Grid<double> posterior_r1;  // Pr(x = 1 | y) per cell
  Grid<double> p_sf_post;     // Pr(selector failed | Y) per cell, 0 off-graph
  int iterations = 0;
};

namespace detail {

inline DetectionResult finish(const BpDetector& det) {
  return {det.hard_decisions(), det.posterior_r1(), det.failure_posterior_grid(),
          det.iterations_run()};
}

inline BpDetector make_bp(const Grid<double>& y, const ChannelParams& params,
                          const DetectorConfig& config, bool aiding) {
  return BpDetector(y, refine_definite_low(pre_detect(y, params), config.refine), params, aiding);
}

}  // namespace detail

/// Pre-detection, definite-low refinement, graph construction and
/// max_iterations rounds of message passing. An empty graph runs no rounds.
inline DetectionResult run_detection(const ReadbackMatrix& y, const ChannelParams& params,
                                     const DetectorConfig& config) {
  config.validate();
  const bool aiding = config.variant == DetectorVariant::improved;
  BpDetector det = detail::make_bp(y.signal(), params, config, aiding);
  if (!det.graph().empty()) det.iterate(config.max_iterations);
  return detail::finish(det);
}

/// Lower-bound detector that knows which selectors failed.
inline DetectionResult genie_detector(const ReadbackMatrix& y, const ChannelParams& params,
                                      const DetectorConfig& config) {
  config.validate();
  BpDetector det = detail::make_bp(y.signal(), params, config, false);
  det.pin_failures(y.truth().selectors);
  if (!det.graph().empty()) det.iterate(config.max_iterations);
  return detail::finish(det);
}

/// Fraction of truly failed selectors whose posterior exceeds the threshold;
/// empty when the array has no failed selector.
inline std::optional<double> sfdr(const DetectionResult& result, const SelectorFailureMap& truth,
                                  double threshold = 0.99) {
  long n_sf = 0;
  long n_det = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!truth.at_flat(t)) continue;
    ++n_sf;
    if (result.p_sf_post.at_flat(t) > threshold) ++n_det;
  }
  if (n_sf == 0) return std::nullopt;
  return static_cast<double>(n_det) / static_cast<double>(n_sf);
}

/// Dispatch over every detector variant with a uniform result shape.
inline DetectionResult detect(const ReadbackMatrix& y, const ChannelParams& params,
                              const DetectorConfig& config) {
  switch (config.variant) {
    case DetectorVariant::basic:
    case DetectorVariant::improved: return run_detection(y, params, config);
    case DetectorVariant::genie: return genie_detector(y, params, config);
    case DetectorVariant::ese: {
      EseResult ese = ese_detector(y.signal(), params);
      Grid<double> post(y.rows(), y.cols());
      for (std::size_t t = 0; t < post.size(); ++t)
        post.at_flat(t) = 1.0 / (1.0 + std::exp(std::clamp(ese.llr.at_flat(t), -700.0, 700.0)));
      return {std::move(ese.x_hat), std::move(post), Grid<double>(y.rows(), y.cols(), 0.0), 0};
    }
    case DetectorVariant::threshold: {
      BitGrid x = threshold_detector(y.signal(), params);
      Grid<double> post(y.rows(), y.cols());
      for (std::size_t t = 0; t < post.size(); ++t) post.at_flat(t) = x.at_flat(t);
      return {std::move(x), std::move(post), Grid<double>(y.rows(), y.cols(), 0.0), 0};
    }
  }
  throw std::logic_error("unhandled detector variant");
}

}  // namespace sneakbp
