#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sneakbp/polar/code_spec.hpp"
#include "sneakbp/polar/construction.hpp"
#include "sneakbp/random.hpp"

namespace sneakbp::polar {

struct GenAConfig {
  int population_size = 20;
  double delta = 0.1;
  int mutation_count = 2;
  int max_generations = 200;
  long frames_per_eval = 2000;
  long error_target = 100;  // stop an evaluation early at this many block errors; 0 disables
  std::uint64_t seed = 1;

  void validate() const {
    if (population_size < 2) throw std::invalid_argument("population size must be at least 2");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
    if (mutation_count < 0) throw std::invalid_argument("mutation count must be nonnegative");
    if (max_generations < 0) throw std::invalid_argument("generation count must be nonnegative");
    if (frames_per_eval < 1) throw std::invalid_argument("frames per evaluation must be positive");
    if (error_target < 0) throw std::invalid_argument("error target must be nonnegative");
  }
};

struct Evaluation {
  long block_errors = 0;
  long frames = 0;

  double bler() const { return frames == 0 ? 0.0 : static_cast<double>(block_errors) / static_cast<double>(frames); }
};

/// Monte Carlo BLER of a complete code. GenA relies on the evaluator using the
/// same channel realisations for every candidate.
using Evaluator = std::function<Evaluation(const PolarCodeSpec&)>;

/// A candidate is the ascending list of information positions chosen from Q.
struct Candidate {
  std::vector<int> members;
  Evaluation eval;
  bool pw_seeded = false;
};

/// Normalised e^(-delta * rank) for ranks 0..S-1.
inline std::vector<double> selection_weights(int population_size, double delta) {
  std::vector<double> w(static_cast<std::size_t>(population_size));
  double total = 0.0;
  for (int r = 0; r < population_size; ++r) total += w[static_cast<std::size_t>(r)] = std::exp(-delta * r);
  for (double& v : w) v /= total;
  return w;
}

/// Two distinct ranks, the second drawn with the first removed.
inline std::pair<int, int> sample_parents(const std::vector<double>& weights, Rng& rng) {
  std::discrete_distribution<int> first(weights.begin(), weights.end());
  const int a = first(rng);
  std::vector<double> rest = weights;
  rest[static_cast<std::size_t>(a)] = 0.0;
  std::discrete_distribution<int> second(rest.begin(), rest.end());
  return {a, second(rng)};
}

/// Swaps `count` random members with random non-members of Q.
inline std::vector<int> mutate(std::vector<int> members, const std::vector<int>& searchable, int count, Rng& rng) {
  std::vector<int> outside;
  std::set_difference(searchable.begin(), searchable.end(), members.begin(), members.end(),
                      std::back_inserter(outside));
  if (members.empty() || outside.empty()) return members;
  for (int c = 0; c < count; ++c) {
    std::uniform_int_distribution<std::size_t> pick_in(0, members.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_out(0, outside.size() - 1);
    std::swap(members[pick_in(rng)], outside[pick_out(rng)]);
  }
  std::sort(members.begin(), members.end());
  return members;
}

/// Keeps the parents' common members and fills the remaining slots uniformly
/// without replacement from their symmetric difference.
inline std::vector<int> crossover(const std::vector<int>& a, const std::vector<int>& b, Rng& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover parents differ in size");
  std::vector<int> child;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(child));
  std::vector<int> pool;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pool));
  const std::size_t missing = a.size() - child.size();
  std::shuffle(pool.begin(), pool.end(), rng);
  child.insert(child.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(missing));
  std::sort(child.begin(), child.end());
  return child;
}

/// A_pre together with a candidate's members.
inline PolarCodeSpec assemble_code(int block_length, const std::vector<int>& reliable, const std::vector<int>& members) {
  std::vector<int> info = reliable;
  info.insert(info.end(), members.begin(), members.end());
  return PolarCodeSpec(block_length, std::move(info));
}

struct GenAResult {
  PolarCodeSpec spec;
  Evaluation best;
  Evaluation best_pw_seeded_initial;
  std::vector<double> best_history;  // best BLER after initialisation and after each generation
};

inline GenAResult gena_construct(const GenAConfig& config, const Evaluator& evaluate, int block_length,
                                 int dimension, const PredeterminedSets& sets) {
  config.validate();
  const auto& q = sets.searchable;
  if (static_cast<int>(sets.reliable.size()) > dimension)
    throw std::invalid_argument("K is smaller than the predetermined reliable set");
  const int slots = dimension - static_cast<int>(sets.reliable.size());
  if (q.empty()) throw std::invalid_argument("the searchable set Q is empty");
  if (slots <= 0) throw std::invalid_argument("no information slots left to search");
  if (slots > static_cast<int>(q.size())) throw std::invalid_argument("Q has fewer indices than open slots");

  Rng rng = make_stream(config.seed, {0x67656e61ULL});
  const int s = config.population_size;

  // PW share: the exact PW choice within Q, then perturbed copies of it.
  std::vector<int> pw_members;
  for (int i : pw_reliability(block_length))
    if (std::binary_search(q.begin(), q.end(), i) && static_cast<int>(pw_members.size()) < slots) pw_members.push_back(i);
  std::sort(pw_members.begin(), pw_members.end());

  std::vector<Candidate> population;
  const int n_pw = std::max(1, s / 2);
  for (int c = 0; c < s; ++c) {
    Candidate cand;
    if (c == 0) {
      cand.members = pw_members;
    } else if (c < n_pw) {
      cand.members = mutate(pw_members, q, std::max(1, config.mutation_count), rng);
    } else {
      std::sample(q.begin(), q.end(), std::back_inserter(cand.members), slots, rng);
    }
    cand.pw_seeded = c < n_pw;
    population.push_back(std::move(cand));
  }
  for (auto& cand : population) cand.eval = evaluate(assemble_code(block_length, sets.reliable, cand.members));

  auto by_bler = [](const Candidate& a, const Candidate& b) { return a.eval.bler() < b.eval.bler(); };
  std::stable_sort(population.begin(), population.end(), by_bler);

  GenAResult result;
  for (const auto& cand : population)
    if (cand.pw_seeded) {
      result.best_pw_seeded_initial = cand.eval;
      break;
    }
  result.best_history.push_back(population.front().eval.bler());

  const auto weights = selection_weights(s, config.delta);
  for (int g = 0; g < config.max_generations; ++g) {
    const auto [ra, rb] = sample_parents(weights, rng);
    const auto a = mutate(population[static_cast<std::size_t>(ra)].members, q, config.mutation_count, rng);
    const auto b = mutate(population[static_cast<std::size_t>(rb)].members, q, config.mutation_count, rng);
    Candidate child;
    child.members = crossover(a, b, rng);
    child.eval = evaluate(assemble_code(block_length, sets.reliable, child.members));
    const auto pos = std::upper_bound(population.begin(), population.end(), child, by_bler);
    population.insert(pos, std::move(child));
    population.pop_back();
    result.best_history.push_back(population.front().eval.bler());
  }

  result.best = population.front().eval;
  result.spec = assemble_code(block_length, sets.reliable, population.front().members);
  return result;
}

}  // namespace sneakbp::polar
