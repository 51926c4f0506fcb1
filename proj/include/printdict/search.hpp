// Copyright 2026 The printdict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "printdict/cmaes.hpp"
#include "printdict/errors.hpp"
#include "printdict/gallery.hpp"
#include "printdict/generator.hpp"
#include "printdict/matcher.hpp"
#include "printdict/rng.hpp"

namespace printdict {

// The four attack strategies and the print dictionaries they build.
//
//   random    - unevolved latent vectors, the baseline
//   single    - one print evolved for raw coverage of the whole gallery
//   diversity - sequential searches over a shrinking pool of unseen users
//   novelty   - searches maximizing match-vector distance to the dictionary

enum class Strategy { kRandom, kSingle, kDiversity, kNovelty };

inline char strategy_letter(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return 'R';
    case Strategy::kSingle: return 'D';
    case Strategy::kDiversity: return 'I';
    case Strategy::kNovelty: return 'N';
  }
  return '?';
}

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kSingle: return "single";
    case Strategy::kDiversity: return "diversity";
    case Strategy::kNovelty: return "novelty";
  }
  return "unknown";
}

struct DictionaryEntry {
  Eigen::VectorXd genome;
  MatchVector match_train;
  double fitness = 0.0;
  Strategy strategy = Strategy::kRandom;
  int generation_budget = 0;
};

struct PrintDictionary {
  std::vector<DictionaryEntry> entries;
  double fmr = 0.0;
  int max_size = 0;
  std::uint64_t seed = 0;
  std::int64_t evaluations_used = 0;

  int size() const { return static_cast<int>(entries.size()); }
};

// Pool of train users not yet covered by any accepted print.
struct DiversityState {
  std::vector<std::uint8_t> unseen;  // mask over user ids
  int unseen_count = 0;
  int total_users = 0;

  explicit DiversityState(int users)
      : unseen(users, 1), unseen_count(users), total_users(users) {}

  bool exhausted() const { return unseen_count == 0; }

  void remove_matched(const MatchVector& matched) {
    if (matched.size() != static_cast<int>(unseen.size()))
      throw UsageError("remove_matched: match vector length mismatch");
    for (std::size_t i = 0; i < unseen.size(); ++i) {
      if (matched.bits[i] && unseen[i]) {
        unseen[i] = 0;
        --unseen_count;
      }
    }
  }
};

// Fraction of the remaining pool this print matches: u_i / U.
inline double diversity_fitness(const MatchVector& x,
                                const DiversityState& state) {
  if (state.unseen_count == 0)
    throw UsageError("diversity_fitness: unseen pool is exhausted");
  if (x.size() != static_cast<int>(state.unseen.size()))
    throw UsageError("diversity_fitness: match vector length mismatch");
  int matched_unseen = 0;
  for (std::size_t i = 0; i < state.unseen.size(); ++i)
    matched_unseen += (x.bits[i] && state.unseen[i]) ? 1 : 0;
  return static_cast<double>(matched_unseen) /
         static_cast<double>(state.unseen_count);
}

inline int hamming_distance(const MatchVector& a, const MatchVector& b) {
  if (a.size() != b.size())
    throw UsageError("hamming_distance: match vector length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i)
    d += (a.bits[i] != b.bits[i]) ? 1 : 0;
  return d;
}

// Minimum match count a print must reach before its novelty counts at all.
inline constexpr int kNoveltyMinimumMatches = 1;

// Novelty of a match vector against the dictionary: Hamming distance to the
// zero vector (i.e. the match count) while the dictionary is empty, minimum
// Hamming distance to any stored vector afterwards. Prints below the minimal
// criterion score zero.
inline double novelty_score(const MatchVector& x, const PrintDictionary& d,
                            int minimum_matches = kNoveltyMinimumMatches) {
  if (x.popcount() < minimum_matches) return 0.0;
  if (d.entries.empty()) return static_cast<double>(x.popcount());
  int best = x.size() + 1;
  for (const auto& entry : d.entries)
    best = std::min(best, hamming_distance(x, entry.match_train));
  return static_cast<double>(best);
}

struct TracePoint {
  int print_index = 0;
  int generation = 0;
  double best_fitness = 0.0;
  double sigma = 0.0;
  double mean_norm = 0.0;
};

using TraceFn = std::function<void(const TracePoint&)>;

struct SearchContext {
  const Gallery* train = nullptr;
  const GeneratorParams* generator = nullptr;
  FmrCalibration calibration;
  std::uint64_t seed = 0;
  double sigma0 = 0.5;
  TraceFn trace;
};

namespace detail {

struct Candidate {
  Eigen::VectorXd genome;
  MatchVector match;
  double fitness = 0.0;
  bool valid = false;
};

// A degenerate generator output matches nobody; the search keeps going.
inline MatchVector evaluate_genome(const SearchContext& ctx,
                                   const Eigen::VectorXd& genome) {
  try {
    const Eigen::VectorXd print = generate(*ctx.generator, genome);
    return match_vector(print, *ctx.train, ctx.calibration);
  } catch (const DegenerateOutputError&) {
    MatchVector empty;
    empty.fmr = ctx.calibration.target_fmr;
    empty.bits.assign(ctx.train->user_count(), 0);
    return empty;
  }
}

// One CMA-ES search over latent space, returning the best candidate ever
// evaluated. `better` decides strict improvement; the first candidate seen
// wins ties, so earlier generations and lower candidate indices prevail.
// A zero generation budget evaluates a single sampled batch without any
// distribution update.
template <typename FitnessFn, typename BetterFn>
Candidate run_print_search(const SearchContext& ctx, int print_index,
                           int generations, const FitnessFn& fitness_of,
                           const BetterFn& better,
                           std::int64_t& evaluations) {
  const int latent_dim = ctx.generator->latent_dim();
  Cmaes optimizer(Eigen::VectorXd::Zero(latent_dim), ctx.sigma0,
                  derive(ctx.seed, stream::kCmaes, print_index));
  Candidate best;

  const int rounds = std::max(generations, 1);
  for (int g = 0; g < rounds; ++g) {
    const std::vector<Eigen::VectorXd> candidates = optimizer.ask();
    std::vector<double> fitnesses(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      MatchVector match = evaluate_genome(ctx, candidates[k]);
      ++evaluations;
      fitnesses[k] = fitness_of(match);
      Candidate current{candidates[k], std::move(match), fitnesses[k], true};
      if (!best.valid || better(current, best)) best = std::move(current);
    }
    if (generations == 0) break;
    optimizer.tell(candidates, fitnesses);
    if (ctx.trace)
      ctx.trace({print_index, g + 1, best.fitness, optimizer.sigma(),
                 optimizer.mean().norm()});
  }
  return best;
}

inline bool higher_fitness(const Candidate& a, const Candidate& b) {
  return a.fitness > b.fitness;
}

inline bool higher_fitness_then_popcount(const Candidate& a,
                                         const Candidate& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  return a.match.popcount() > b.match.popcount();
}

}  // namespace detail

// Baseline: unevolved standard-normal latent vectors, scored once each.
inline PrintDictionary random_dictionary(const SearchContext& ctx, int size) {
  if (size < 1) throw ConfigError("random_dictionary: size must be >= 1");
  PrintDictionary dict;
  dict.fmr = ctx.calibration.target_fmr;
  dict.max_size = size;
  dict.seed = ctx.seed;
  Rng rng(derive(ctx.seed, stream::kRandomGenome));
  const int total = ctx.train->user_count();
  for (int i = 0; i < size; ++i) {
    DictionaryEntry entry;
    entry.genome = rng.gaussian_vector(ctx.generator->latent_dim());
    entry.match_train = detail::evaluate_genome(ctx, entry.genome);
    ++dict.evaluations_used;
    entry.fitness = static_cast<double>(entry.match_train.popcount()) /
                    static_cast<double>(total);
    entry.strategy = Strategy::kRandom;
    entry.generation_budget = 0;
    dict.entries.push_back(std::move(entry));
  }
  return dict;
}

// One print evolved to cover as much of the whole train gallery as possible.
inline PrintDictionary evolve_single_print(const SearchContext& ctx,
                                           int generations) {
  if (generations < 0) throw ConfigError("generations must be >= 0");
  PrintDictionary dict;
  dict.fmr = ctx.calibration.target_fmr;
  dict.max_size = 1;
  dict.seed = ctx.seed;
  const double total = ctx.train->user_count();
  const auto coverage = [&](const MatchVector& m) {
    return static_cast<double>(m.popcount()) / total;
  };
  detail::Candidate best =
      detail::run_print_search(ctx, 0, generations, coverage,
                               detail::higher_fitness, dict.evaluations_used);
  dict.entries.push_back({std::move(best.genome), std::move(best.match),
                          best.fitness, Strategy::kSingle, generations});
  return dict;
}

// Sequential searches, each maximizing coverage of the users no earlier
// print matched. Accepted prints remove their users from the pool; the loop
// stops when the pool empties or the dictionary is full.
inline PrintDictionary evolve_diversity_dictionary(const SearchContext& ctx,
                                                   int per_print_generations,
                                                   int max_size) {
  if (per_print_generations < 0)
    throw ConfigError("per_print_generations must be >= 0");
  if (max_size < 1) throw ConfigError("max_size must be >= 1");
  PrintDictionary dict;
  dict.fmr = ctx.calibration.target_fmr;
  dict.max_size = max_size;
  dict.seed = ctx.seed;

  DiversityState pool(ctx.train->user_count());
  for (int p = 0; p < max_size && !pool.exhausted(); ++p) {
    const auto fitness = [&](const MatchVector& m) {
      return diversity_fitness(m, pool);
    };
    detail::Candidate best = detail::run_print_search(
        ctx, p, per_print_generations, fitness, detail::higher_fitness,
        dict.evaluations_used);
    pool.remove_matched(best.match);
    dict.entries.push_back({std::move(best.genome), std::move(best.match),
                            best.fitness, Strategy::kDiversity,
                            per_print_generations});
  }
  return dict;
}

// Searches maximizing novelty against the dictionary built so far. Nothing
// is removed from any pool; the archive distance decorrelates the prints.
// Ties on novelty prefer the candidate matching more users.
inline PrintDictionary evolve_novelty_dictionary(const SearchContext& ctx,
                                                 int per_print_generations,
                                                 int max_size) {
  if (per_print_generations < 0)
    throw ConfigError("per_print_generations must be >= 0");
  if (max_size < 1) throw ConfigError("max_size must be >= 1");
  PrintDictionary dict;
  dict.fmr = ctx.calibration.target_fmr;
  dict.max_size = max_size;
  dict.seed = ctx.seed;

  for (int p = 0; p < max_size; ++p) {
    const auto fitness = [&](const MatchVector& m) {
      return novelty_score(m, dict);
    };
    detail::Candidate best = detail::run_print_search(
        ctx, p, per_print_generations, fitness,
        detail::higher_fitness_then_popcount, dict.evaluations_used);
    dict.entries.push_back({std::move(best.genome), std::move(best.match),
                            best.fitness, Strategy::kNovelty,
                            per_print_generations});
  }
  return dict;
}

// Fraction of users matched by at least one of the given match vectors.
inline double union_coverage(const std::vector<MatchVector>& vectors,
                             int user_count) {
  if (user_count < 1) throw UsageError("union_coverage: empty gallery");
  std::vector<std::uint8_t> covered(user_count, 0);
  for (const auto& v : vectors) {
    if (v.size() != user_count)
      throw UsageError("union_coverage: match vector length mismatch");
    for (int i = 0; i < user_count; ++i) covered[i] |= v.bits[i];
  }
  int total = 0;
  for (const auto c : covered) total += c;
  return static_cast<double>(total) / static_cast<double>(user_count);
}

// Re-scores every entry against the given gallery (train or test) and
// returns the fraction of its users matched by at least one print.
inline double union_coverage(const PrintDictionary& dict,
                             const GeneratorParams& generator,
                             const Gallery& gallery,
                             const FmrCalibration& cal) {
  std::vector<MatchVector> vectors;
  vectors.reserve(dict.entries.size());
  for (const auto& entry : dict.entries) {
    try {
      vectors.push_back(
          match_vector(generate(generator, entry.genome), gallery, cal));
    } catch (const DegenerateOutputError&) {
      MatchVector empty;
      empty.fmr = cal.target_fmr;
      empty.bits.assign(gallery.user_count(), 0);
      vectors.push_back(std::move(empty));
    }
  }
  if (vectors.empty()) return 0.0;
  return union_coverage(vectors, gallery.user_count());
}

}  // namespace printdict
