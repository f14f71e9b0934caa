#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "srdf/generator.hpp"
#include "srdf/navigator.hpp"
#include "srdf/pairs.hpp"

namespace srdf {

enum class Scorer { navigator_ndtw, navigator_spl, random, embedding_cosine, generator_self };

std::string_view scorer_name(Scorer s);
Scorer parse_scorer(std::string_view name);

struct FilterThresholds {
  double spl_exact = 1.0;
  double ndtw_min = 0.9;
  void validate() const;
};

struct ScoringModels {
  const NavigatorParams* navigator = nullptr;
  const GeneratorParams* generator = nullptr;
};

// Cosine between the landmark-id counts of the instruction and of every
// landmark visible along the trajectory. Blind to turn directions.
double embedding_cosine(const Environment& env, const PairedSample& pair);

// Runs the navigator from the pair's start pose and scores its path against
// the pair's trajectory.
NavScores navigate_pair(const NavigatorParams& navigator, const Environment& env,
                        const PairedSample& pair);

// Throws Error(missing_model) when the scorer's model is absent.
double score_pair(Scorer scorer, const ScoringModels& models, const Environment& env,
                  const PairedSample& pair, std::uint64_t seed);

// Attaches navigator scores to every pair whose cached scores came from a
// different navigator (version or digest).
void score_pool(Pool& pool, const NavigatorParams& navigator, const EnvironmentSet& envs,
                int threads = 1);

struct FilterSummary {
  std::string stage;
  std::size_t input = 0;
  std::size_t kept = 0;
  double spl_exact = 0.0;
  double ndtw_min = 0.0;
  int navigator_version = 0;
  std::string to_string() const;
};

// Keeps the pairs the navigator follows on a shortest successful path.
Pool filter_generator_data(Pool pool, const NavigatorParams& navigator,
                           const EnvironmentSet& envs, const FilterThresholds& thresholds,
                           int threads = 1, FilterSummary* summary = nullptr);

struct NavPartition {
  Pool kept;
  Pool rejected;
};

// Splits by nDTW >= ndtw_min, preserving input order in both halves.
NavPartition filter_navigator_data(Pool pool, const NavigatorParams& navigator,
                                   const EnvironmentSet& envs,
                                   const FilterThresholds& thresholds, int threads = 1,
                                   FilterSummary* summary = nullptr);

// score_pair for every pair, in pool order.
std::vector<double> score_all(const Pool& pool, Scorer scorer, const ScoringModels& models,
                              const EnvironmentSet& envs, std::uint64_t seed, int threads = 1);

// The q best pairs by descending score, ties by pair_id.
Pool rank_and_take_top(const Pool& pool, Scorer scorer, const ScoringModels& models,
                       const EnvironmentSet& envs, std::size_t q, std::uint64_t seed,
                       int threads = 1);

}  // namespace srdf
