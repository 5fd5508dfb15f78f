#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sneakbp/channel.hpp"
#include "sneakbp/detector/detect.hpp"
#include "sneakbp/harness/parallel.hpp"
#include "sneakbp/harness/results.hpp"
#include "sneakbp/joint.hpp"
#include "sneakbp/polar/code_spec.hpp"
#include "sneakbp/polar/construction.hpp"
#include "sneakbp/polar/encoder.hpp"
#include "sneakbp/polar/gena.hpp"
#include "sneakbp/random.hpp"

namespace sneakbp::harness {

/// Stream tags keep the experiment families on unrelated random streams.
inline constexpr std::uint64_t kTagDetection = 1;
inline constexpr std::uint64_t kTagCoded = 2;
inline constexpr std::uint64_t kTagConstruct = 3;

/// Trials are simulated in fixed-size batches; the stopping rule is checked
/// only between batches so the result never depends on the worker count.
inline constexpr long kBatchSize = 250;

struct SimulationConfig {
  std::string experiment = "detect-ber";
  ChannelParams channel;
  std::vector<double> sigmas{40.0};
  std::vector<DetectorVariant> detectors{DetectorVariant::improved};
  DetectorConfig detector;
  JointConfig joint;
  std::vector<CodedScheme> schemes{CodedScheme::joint};
  long trials = 1000;
  long min_block_errors = 100;  // stop a sigma point once every detector has this many; 0 disables
  std::uint64_t seed = 1;
  int threads = default_threads();

  int block_length = 256;
  int dimension = 204;
  std::string method = "gena";
  polar::ConstructionParams construction;
  polar::GenAConfig gena;

  void validate() const {
    ChannelParams c = channel;
    for (double s : sigmas) {
      c.sigma = s;
      c.validate();
    }
    if (sigmas.empty()) throw std::invalid_argument("sigma list is empty");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (min_block_errors < 0) throw std::invalid_argument("min block errors must be nonnegative");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    detector.validate();
    joint.validate();
  }

  ChannelParams channel_at(double sigma) const {
    ChannelParams c = channel;
    c.sigma = sigma;
    return c;
  }
};

/// What one detector did on one array (or one decoder on one frame).
struct TrialOutcome {
  long bit_errors = 0;
  bool block_error = false;
  std::optional<double> sfdr;
};

/// One array: data, selector failures and readback drawn from the trial's own stream.
inline ReadbackMatrix draw_array(const ChannelParams& params, Rng& rng) {
  DataArray x = sample_data(params, rng);
  SelectorFailureMap s = sample_selector_failures(params, rng);
  return read_array(x, s, params, rng);
}

inline bool reports_sfdr(DetectorVariant v) { return v == DetectorVariant::basic || v == DetectorVariant::improved; }

/// Every configured detector on the same realisation of array `trial`.
inline std::vector<TrialOutcome> detection_trial(const SimulationConfig& config, std::size_t sigma_index, long trial) {
  const ChannelParams params = config.channel_at(config.sigmas[sigma_index]);
  Rng rng = make_stream(config.seed, {kTagDetection, sigma_index, static_cast<std::uint64_t>(trial)});
  const ReadbackMatrix y = draw_array(params, rng);
  std::vector<TrialOutcome> out;
  for (DetectorVariant v : config.detectors) {
    DetectorConfig dc = config.detector;
    dc.variant = v;
    const DetectionResult r = detect(y, params, dc);
    TrialOutcome o;
    for (std::size_t t = 0; t < r.x_hat.size(); ++t) o.bit_errors += r.x_hat.at_flat(t) != y.truth().data.at_flat(t);
    o.block_error = o.bit_errors > 0;
    if (reports_sfdr(v)) o.sfdr = sfdr(r, y.truth().selectors, dc.sf_decision_threshold);
    out.push_back(o);
  }
  return out;
}

/// Runs trials in batches until the trial budget is spent or every column
/// has at least min_block_errors block errors. Returns outcomes[trial][column].
template <typename TrialFn>
std::vector<std::vector<TrialOutcome>> collect_trials(long trials, long min_block_errors, int threads,
                                                      std::size_t columns, TrialFn&& trial_fn) {
  std::vector<std::vector<TrialOutcome>> all;
  std::vector<long> block_errors(columns, 0);
  for (long begin = 0; begin < trials; begin += kBatchSize) {
    const long end = std::min(trials, begin + kBatchSize);
    auto batch = parallel_map(begin, end, threads, trial_fn);
    for (auto& outcome : batch) {
      for (std::size_t c = 0; c < columns; ++c) block_errors[c] += outcome[c].block_error;
      all.push_back(std::move(outcome));
    }
    if (min_block_errors > 0 &&
        std::all_of(block_errors.begin(), block_errors.end(), [&](long e) { return e >= min_block_errors; }))
      break;
  }
  return all;
}

inline ResultRow aggregate(const std::vector<std::vector<TrialOutcome>>& outcomes, std::size_t column,
                           const std::string& experiment, double sigma, const std::string& detector,
                           long bits_per_trial, std::uint64_t seed) {
  ResultRow row;
  row.experiment = experiment;
  row.sigma = sigma;
  row.detector = detector;
  row.seed = seed;
  row.trials = static_cast<long>(outcomes.size());
  row.total_bits = row.trials * bits_per_trial;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& trial : outcomes) {
    const TrialOutcome& o = trial[column];
    row.bit_errors += o.bit_errors;
    row.block_errors += o.block_error;
    if (o.sfdr) {
      ++row.sfdr_n;
      sum += *o.sfdr;
      sum_sq += *o.sfdr * *o.sfdr;
    }
  }
  row.ber = row.total_bits == 0 ? 0.0 : static_cast<double>(row.bit_errors) / static_cast<double>(row.total_bits);
  row.bler = row.trials == 0 ? 0.0 : static_cast<double>(row.block_errors) / static_cast<double>(row.trials);
  if (row.sfdr_n > 0) {
    const double n = static_cast<double>(row.sfdr_n);
    const double mean = sum / n;
    row.sfdr_mean = mean;
    const double var = row.sfdr_n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    row.sfdr_std_error = std::sqrt(var / n);
  }
  return row;
}

/// Uncoded BER of every configured detector; SFDR is filled for the BP variants.
inline std::vector<ResultRow> run_raw_ber(const SimulationConfig& config, const std::string& experiment = "detect-ber") {
  config.validate();
  std::vector<ResultRow> rows;
  const long bits = static_cast<long>(config.channel.rows) * config.channel.cols;
  for (std::size_t si = 0; si < config.sigmas.size(); ++si) {
    const auto outcomes = collect_trials(config.trials, config.min_block_errors, config.threads, config.detectors.size(),
                                         [&](long t) { return detection_trial(config, si, t); });
    for (std::size_t d = 0; d < config.detectors.size(); ++d)
      rows.push_back(aggregate(outcomes, d, experiment, config.sigmas[si], to_string(config.detectors[d]), bits,
                               config.seed));
  }
  return rows;
}

/// SFDR of the BP detectors; the arrays are the ones run_raw_ber would draw.
inline std::vector<ResultRow> run_sfdr(const SimulationConfig& config) {
  for (DetectorVariant v : config.detectors)
    if (!reports_sfdr(v)) throw std::invalid_argument("SFDR needs detector bp or bp-improved, got " + to_string(v));
  return run_raw_ber(config, "sfdr");
}

/// Encode random info, store, read, decode with every scheme on the same frame.
inline std::vector<TrialOutcome> coded_trial(const SimulationConfig& config, const polar::PolarCodeSpec& spec,
                                             const ChannelParams& params, std::uint64_t stream_key,
                                             std::uint64_t sigma_index, long frame) {
  Rng rng = make_stream(config.seed, {stream_key, sigma_index, static_cast<std::uint64_t>(frame)});
  polar::Bits info(static_cast<std::size_t>(spec.dimension()));
  std::bernoulli_distribution bit(0.5);
  for (auto& b : info) b = bit(rng) ? 1 : 0;
  const DataArray x = store_codeword(polar::encode(info, spec), params.rows, params.cols);
  const SelectorFailureMap s = sample_selector_failures(params, rng);
  const ReadbackMatrix y = read_array(x, s, params, rng);
  std::vector<TrialOutcome> out;
  for (CodedScheme scheme : config.schemes) {
    JointResult r;
    switch (scheme) {
      case CodedScheme::joint: r = run_joint(y, spec, params, config.joint, config.detector); break;
      case CodedScheme::pipeline: r = run_pipeline(y, spec, params, config.joint, config.detector); break;
      case CodedScheme::ese_iteration: r = ese_with_iteration(y, spec, params, config.joint); break;
    }
    TrialOutcome o;
    for (std::size_t k = 0; k < info.size(); ++k) o.bit_errors += r.info_hat[k] != info[k];
    o.block_error = o.bit_errors > 0;
    out.push_back(o);
  }
  return out;
}

inline void check_code_fits(const SimulationConfig& config, const polar::PolarCodeSpec& spec) {
  if (config.channel.rows * config.channel.cols != spec.block_length())
    throw std::invalid_argument("code length " + std::to_string(spec.block_length()) + " does not match a " +
                                std::to_string(config.channel.rows) + "x" + std::to_string(config.channel.cols) +
                                " array");
}

/// Info-bit BER and BLER of every configured scheme.
inline std::vector<ResultRow> run_coded(const SimulationConfig& config, const polar::PolarCodeSpec& spec) {
  config.validate();
  check_code_fits(config, spec);
  std::vector<ResultRow> rows;
  for (std::size_t si = 0; si < config.sigmas.size(); ++si) {
    const ChannelParams params = config.channel_at(config.sigmas[si]);
    const auto outcomes = collect_trials(config.trials, config.min_block_errors, config.threads, config.schemes.size(),
                                         [&](long f) { return coded_trial(config, spec, params, kTagCoded, si, f); });
    for (std::size_t k = 0; k < config.schemes.size(); ++k)
      rows.push_back(aggregate(outcomes, k, "coded-ber", config.sigmas[si], to_string(config.schemes[k]),
                               spec.dimension(), config.seed));
  }
  return rows;
}

/// Joint-system BLER at the design noise level. Frame f always uses the same
/// stream, so every candidate code sees the same channel realisations.
inline polar::Evaluator make_construction_evaluator(const SimulationConfig& config) {
  SimulationConfig eval = config;
  eval.schemes = {CodedScheme::joint};
  const ChannelParams params = config.channel_at(config.construction.sigma_design);
  return [eval, params](const polar::PolarCodeSpec& spec) {
    const auto outcomes =
        collect_trials(eval.gena.frames_per_eval, eval.gena.error_target, eval.threads, 1,
                       [&](long f) { return coded_trial(eval, spec, params, kTagConstruct, 0, f); });
    polar::Evaluation e;
    e.frames = static_cast<long>(outcomes.size());
    for (const auto& o : outcomes) e.block_errors += o[0].block_error;
    return e;
  };
}

struct ConstructionOutcome {
  polar::PolarCodeSpec spec;
  polar::PredeterminedSets sets;
  std::optional<polar::GenAResult> gena;  // empty for the PW method
};

/// PW or GenA code for the configured array size.
inline ConstructionOutcome construct_code(const SimulationConfig& config) {
  config.validate();
  if (config.channel.rows * config.channel.cols != config.block_length)
    throw std::invalid_argument("N must equal rows * cols");
  if (config.dimension < 1 || config.dimension > config.block_length)
    throw std::invalid_argument("K must lie in [1, N]");
  ConstructionOutcome out;
  out.sets = polar::predetermined_sets(config.block_length, config.construction, config.channel);
  if (config.method == "pw") {
    out.spec = polar::pw_construct(config.block_length, config.dimension);
    return out;
  }
  if (config.method != "gena") throw std::invalid_argument("unknown construction method '" + config.method + "'");
  polar::GenAConfig gc = config.gena;
  gc.seed = config.seed;
  SimulationConfig eval = config;
  eval.gena = gc;
  out.gena = polar::gena_construct(gc, make_construction_evaluator(eval), config.block_length, config.dimension,
                                   out.sets);
  out.spec = out.gena->spec;
  return out;
}

}  // namespace sneakbp::harness
