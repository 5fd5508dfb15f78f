#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sneakbp/channel.hpp"
#include "sneakbp/detector/graph.hpp"
#include "sneakbp/detector/labels.hpp"

namespace sneakbp {

/// Probabilities are kept inside [kProbFloor, 1 - kProbFloor] before any
/// ratio or logarithm is taken.
inline constexpr double kProbFloor = 1e-12;

inline double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

/// Pr(r = R0' | cell labelled R_s) given the probability that the cell is
/// sneak-affected when it stores a zero and the prior Pr(x = 1).
inline double sneak_affected_fraction(double p_sneak, double prior_one) {
  const double p0 = (1.0 - prior_one) * p_sneak;
  return p0 / (p0 + prior_one);
}

/// f(m,n,u,v): probability that the three corner cells closing a sneak path
/// from (u,v) to (m,n) are all low.
inline double sneak_function_f(Cell target, Cell source, const Grid<double>& posterior_r1) {
  return posterior_r1(target.row, source.col) * posterior_r1(source.row, target.col) *
         posterior_r1(source.row, source.col);
}

/// Output of a sneak-path node: Pr(r = R1 | y) for a cell whose reading has
/// density phi_low under R1 and phi_sneak under R0', with sneak fraction eps.
inline double spn_posterior(double phi_low, double phi_sneak, double eps) {
  const double num = phi_low * (1.0 - eps);
  return num / (num + phi_sneak * eps);
}

/// One factor of the failure-node likelihood ratio: the diagonal reading's
/// density under "selector failed" over its density without that knowledge.
/// rho is phi(y, R0') / phi(y, R1).
inline double failure_likelihood_ratio(double rho, double eps_given_failure, double eps) {
  return (eps_given_failure * (rho - 1.0) + 1.0) / (eps * (rho - 1.0) + 1.0);
}

/// Message-passing state for one array. Decided cells enter only through
/// their constant posteriors (1 for definite low, 0 for confident high).
class BpDetector {
 public:
  BpDetector(const Grid<double>& y, LabelGrid refined, const ChannelParams& params,
             bool use_aiding_nodes)
      : labels_(std::move(refined)),
        graph_(labels_),
        p_sf_(params.p_sf),
        p_init_(theoretical_sneak_rate(params)),
        use_aiding_(use_aiding_nodes),
        posterior_(labels_.rows(), labels_.cols(), 0.0) {
    if (!y.same_shape(labels_)) throw std::invalid_argument("readout and labels differ in shape");
    const LevelLikelihood lik(params);
    const int nodes = graph_.node_count();
    log_rho_.resize(nodes);
    rho_minus_one_.resize(nodes);
    prior_one_.assign(nodes, clamp_prob(params.q));
    p_sneak_.resize(nodes);
    llr_.resize(nodes);
    failure_post_.resize(nodes);
    for (int a = 0; a < nodes; ++a) {
      const double lr = lik.log_ratio(y[graph_.cell(a)], Level::sneak, Level::low);
      log_rho_[a] = lr;
      rho_minus_one_[a] = std::exp(std::clamp(lr, -60.0, 60.0)) - 1.0;
    }
    const int edges = graph_.edge_count();
    failure_msg_.resize(edges);
    sneak_msg_.resize(edges);
    sneak_given_failure_.resize(edges);
    scratch_.resize(edges);
    reset();
  }

  /// Initial state: every sneak message at the analytic sneak rate, every
  /// failure message at the prior p_sf.
  void reset() {
    for (int i = 0; i < labels_.rows(); ++i)
      for (int j = 0; j < labels_.cols(); ++j)
        posterior_(i, j) = labels_(i, j) == CellLabel::low ? 1.0 : 0.0;
    const double p0 = clamp_prob(p_init_);
    std::fill(sneak_msg_.begin(), sneak_msg_.end(), p0);
    for (int a = 0; a < graph_.node_count(); ++a) {
      p_sneak_[a] = p0;
      refresh_posterior(a);
      const bool pinned = !pinned_.empty();
      const double sf = pinned ? pinned_[a] : clamp_prob(p_sf_);
      failure_post_[a] = sf;
      for (int e = graph_.first_edge(a); e < graph_.last_edge(a); ++e) failure_msg_[e] = sf;
    }
    for (int a = 0; a < graph_.node_count(); ++a)
      for (int e = graph_.first_edge(a); e < graph_.last_edge(a); ++e) {
        const double f = sneak_function_f(graph_.cell(a), graph_.cell(graph_.partner(e)), posterior_);
        sneak_given_failure_[e] = clamp_prob(1.0 - (1.0 - f) * (1.0 - p0));
      }
  }

  /// Genie mode: failure beliefs fixed to the true selector states; failure
  /// node updates become no-ops.
  void pin_failures(const SelectorFailureMap& truth) {
    if (!truth.same_shape(labels_)) throw std::invalid_argument("selector map differs in shape");
    pinned_.resize(graph_.node_count());
    for (int a = 0; a < graph_.node_count(); ++a)
      pinned_[a] = clamp_prob(truth[graph_.cell(a)] ? 1.0 : 0.0);
    for (int a = 0; a < graph_.node_count(); ++a) {
      failure_post_[a] = pinned_[a];
      for (int e = graph_.first_edge(a); e < graph_.last_edge(a); ++e) failure_msg_[e] = pinned_[a];
    }
  }

  /// Replaces the Bernoulli(q) data prior of one node, e.g. with decoder
  /// feedback, and refreshes that node's posterior.
  void set_prior_one(int node, double prior_one) {
    prior_one_[node] = clamp_prob(prior_one);
    refresh_posterior(node);
  }
  double prior_one(int node) const { return prior_one_[node]; }

  /// Failure node a: for each diagonal partner, P(SF_a | Y) computed from all
  /// other partners' readings (and, when enabled, the aiding cells).
  void update_failure_node(int a) {
    if (!pinned_.empty()) return;
    const int first = graph_.first_edge(a);
    const int last = graph_.last_edge(a);
    // Every factor lies within [e^-60, e^60] (or is floored at kProbFloor),
    // so a product renormalised by powers of two cannot overflow and the
    // leave-one-out products are exact divisions.
    ScaledProduct total{clamp_prob(p_sf_)};
    for (int e = first; e < last; ++e) {
      const int c = graph_.partner(e);
      const int back = graph_.reverse(e);
      const double eps = sneak_affected_fraction(sneak_msg_[back], prior_one_[c]);
      const double eps_f = sneak_affected_fraction(sneak_given_failure_[back], prior_one_[c]);
      scratch_[e] = failure_likelihood_ratio(rho_minus_one_[c] + 1.0, eps_f, eps);
      total.absorb(scratch_[e]);
    }
    if (use_aiding_) {
      const Cell self = graph_.cell(a);
      for (const Cell z : graph_.aiding_cells(a))
        total.absorb(std::max(1.0 - sneak_function_f(z, self, posterior_), kProbFloor));
    }
    failure_post_[a] = total.probability(1.0);
    for (int e = first; e < last; ++e) failure_msg_[e] = total.probability(scratch_[e]);
  }

  /// Sneak node a: for each partner b, P(SP_a) without b's contribution and
  /// P(SP_a | SF_b); then the node's aggregate sneak probability and posterior.
  void update_sneak_node(int a) {
    const int first = graph_.first_edge(a);
    const int last = graph_.last_edge(a);
    const int d = last - first;
    const Cell self = graph_.cell(a);
    // scratch_ holds f per edge; suffix_ the products of (1 - f * P(SF)) from the back.
    suffix_.resize(static_cast<std::size_t>(d) + 1);
    suffix_[d] = 1.0;
    for (int k = d - 1; k >= 0; --k) {
      const int e = first + k;
      const double f = sneak_function_f(self, graph_.cell(graph_.partner(e)), posterior_);
      scratch_[e] = f;
      suffix_[k] = suffix_[k + 1] * (1.0 - f * failure_msg_[graph_.reverse(e)]);
    }
    double prefix = 1.0;
    for (int k = 0; k < d; ++k) {
      const int e = first + k;
      const double others = prefix * suffix_[k + 1];
      sneak_msg_[e] = clamp_prob(1.0 - others);
      sneak_given_failure_[e] = clamp_prob(1.0 - (1.0 - scratch_[e]) * others);
      prefix *= 1.0 - scratch_[e] * failure_msg_[graph_.reverse(e)];
    }
    p_sneak_[a] = clamp_prob(1.0 - suffix_[0]);
    refresh_posterior(a);
  }

  /// One flooding iteration: all failure nodes, then all sneak nodes in node
  /// order (each sneak node sees posteriors already refreshed this sweep).
  void iterate(int iterations = 1) {
    for (int it = 0; it < iterations; ++it) {
      for (int a = 0; a < graph_.node_count(); ++a) update_failure_node(a);
      for (int a = 0; a < graph_.node_count(); ++a) update_sneak_node(a);
      ++iterations_;
    }
  }

  const LabelGrid& labels() const { return labels_; }
  const DetectionGraph& graph() const { return graph_; }
  int iterations_run() const { return iterations_; }
  double initial_sneak_rate() const { return p_init_; }

  double failure_message(int edge) const { return failure_msg_[edge]; }
  double sneak_message(int edge) const { return sneak_msg_[edge]; }
  double sneak_given_failure(int edge) const { return sneak_given_failure_[edge]; }
  double failure_posterior(int node) const { return failure_post_[node]; }
  double sneak_probability(int node) const { return p_sneak_[node]; }

  /// Pr(r = R1 | y) for every cell; constants for decided cells.
  const Grid<double>& posterior_r1() const { return posterior_; }
  /// log Pr(x = 0 | y) / Pr(x = 1 | y) of a node, without probability clamping.
  double posterior_llr(int node) const { return llr_[node]; }
  /// Posterior LLR minus the node's prior LLR: what the detector learned from
  /// the readout and the graph.
  double extrinsic_llr(int node) const {
    return llr_[node] - (std::log1p(-prior_one_[node]) - std::log(prior_one_[node]));
  }

  BitGrid hard_decisions() const {
    BitGrid x(labels_.rows(), labels_.cols());
    for (int i = 0; i < labels_.rows(); ++i)
      for (int j = 0; j < labels_.cols(); ++j) x(i, j) = posterior_(i, j) >= 0.5 ? 1 : 0;
    return x;
  }

  Grid<double> failure_posterior_grid() const {
    Grid<double> out(labels_.rows(), labels_.cols(), 0.0);
    for (int a = 0; a < graph_.node_count(); ++a) out[graph_.cell(a)] = failure_post_[a];
    return out;
  }

 private:
  struct ScaledProduct {
    double mantissa;
    int exponent = 0;

    void absorb(double factor) {
      mantissa *= factor;
      if (mantissa > 0x1p+500 || mantissa < 0x1p-500) {
        int k = 0;
        mantissa = std::frexp(mantissa, &k);
        exponent += k;
      }
    }
    /// Clamped value of the product with one factor divided out.
    double probability(double divided_out) const {
      double v = mantissa / divided_out;
      if (exponent != 0) v = std::ldexp(v, exponent);
      return clamp_prob(v);
    }
  };

  void refresh_posterior(int a) {
    const double p = p_sneak_[a];
    const double pi = prior_one_[a];
    llr_[a] = log_rho_[a] + std::log(p) + std::log1p(-pi) - std::log(pi);
    posterior_[graph_.cell(a)] = clamp_prob(1.0 / (1.0 + std::exp(std::clamp(llr_[a], -700.0, 700.0))));
  }

  LabelGrid labels_;
  DetectionGraph graph_;
  double p_sf_;
  double p_init_;
  bool use_aiding_;
  int iterations_ = 0;

  Grid<double> posterior_;
  std::vector<double> log_rho_;
  std::vector<double> rho_minus_one_;
  std::vector<double> prior_one_;
  std::vector<double> p_sneak_;
  std::vector<double> llr_;
  std::vector<double> failure_post_;
  std::vector<double> pinned_;

  std::vector<double> failure_msg_;
  std::vector<double> sneak_msg_;
  std::vector<double> sneak_given_failure_;
  std::vector<double> scratch_;
  std::vector<double> suffix_;
};

}  // namespace sneakbp
