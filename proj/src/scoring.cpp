#include "srdf/scoring.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "srdf/parallel.hpp"

namespace srdf {

std::string_view scorer_name(Scorer s) {
  switch (s) {
    case Scorer::navigator_ndtw: return "navigator_ndtw";
    case Scorer::navigator_spl: return "navigator_spl";
    case Scorer::random: return "random";
    case Scorer::embedding_cosine: return "embedding_cosine";
    case Scorer::generator_self: return "generator_self";
  }
  return "?";
}

Scorer parse_scorer(std::string_view name) {
  for (Scorer s : {Scorer::navigator_ndtw, Scorer::navigator_spl, Scorer::random,
                   Scorer::embedding_cosine, Scorer::generator_self})
    if (scorer_name(s) == name) return s;
  throw Error(ErrorCode::invalid_argument, "unknown scorer: " + std::string(name));
}

void FilterThresholds::validate() const {
  if (!(spl_exact > 0.0 && spl_exact <= 1.0))
    throw Error(ErrorCode::invalid_argument, "spl_exact must be in (0, 1]");
  if (!(ndtw_min > 0.0 && ndtw_min < 1.0))
    throw Error(ErrorCode::invalid_argument, "ndtw_min must be in (0, 1)");
}

double embedding_cosine(const Environment& env, const PairedSample& pair) {
  std::map<LandmarkId, double> said, seen;
  for (const auto& tok : pair.instr.tokens)
    if (auto e = lookup_surface(tok)) said[e->landmark] += 1.0;
  for (NodeId n : pair.traj->nodes)
    for (const auto& bucket : env.node(n).landmarks)
      for (LandmarkId id : bucket) seen[id] += 1.0;
  double dot = 0.0, a = 0.0, b = 0.0;
  for (const auto& [id, c] : said) {
    a += c * c;
    auto it = seen.find(id);
    if (it != seen.end()) dot += c * it->second;
  }
  for (const auto& [id, c] : seen) b += c * c;
  if (a == 0.0 || b == 0.0) return 0.0;
  return dot / std::sqrt(a * b);
}

NavScores navigate_pair(const NavigatorParams& navigator, const Environment& env,
                        const PairedSample& pair) {
  const Trajectory& ref = *pair.traj;
  Trajectory followed;
  try {
    followed = follow(navigator, env, pair.instr, ref.nodes.front(), ref.headings.front())
                   .followed;
  } catch (const UnparseableInstruction&) {
    // Nothing to follow: the agent stops where it stands.
    followed.traj_id = ref.traj_id;
    followed.env_id = ref.env_id;
    followed.nodes = {ref.nodes.front()};
    followed.headings = {ref.headings.front()};
    followed.actions = {Action::stop()};
  }
  return score_episode(env, ref, followed);
}

namespace {

double score_with(Scorer scorer, const ScoringModels& models, const Generator* gen,
                  const Environment& env, const PairedSample& pair, std::uint64_t seed) {
  switch (scorer) {
    case Scorer::navigator_ndtw:
    case Scorer::navigator_spl: {
      const NavScores s = navigate_pair(*models.navigator, env, pair);
      return scorer == Scorer::navigator_ndtw ? s.ndtw : s.spl;
    }
    case Scorer::random: {
      Rng rng(derive_seed(seed, hash_string(pair.pair_id)));
      return uniform01(rng);
    }
    case Scorer::embedding_cosine:
      return embedding_cosine(env, pair);
    case Scorer::generator_self:
      return gen->score(env, *pair.traj, pair.instr);
  }
  return 0.0;
}

void require_models(Scorer scorer, const ScoringModels& models) {
  const bool nav = scorer == Scorer::navigator_ndtw || scorer == Scorer::navigator_spl;
  if (nav && !models.navigator)
    throw Error(ErrorCode::missing_model,
                std::string(scorer_name(scorer)) + " needs a navigator");
  if (scorer == Scorer::generator_self && !models.generator)
    throw Error(ErrorCode::missing_model, "generator_self needs a generator");
}

bool fresh_scores(const PairedSample& p, int version, const std::string& digest) {
  return p.scores && p.scores->navigator_version == version &&
         p.scores->navigator_digest == digest;
}

}  // namespace

double score_pair(Scorer scorer, const ScoringModels& models, const Environment& env,
                  const PairedSample& pair, std::uint64_t seed) {
  require_models(scorer, models);
  std::optional<Generator> gen;
  if (scorer == Scorer::generator_self) gen.emplace(*models.generator);
  return score_with(scorer, models, gen ? &*gen : nullptr, env, pair, seed);
}

void score_pool(Pool& pool, const NavigatorParams& navigator, const EnvironmentSet& envs,
                int threads) {
  const std::string digest = navigator.digest();
  parallel_for(pool.size(), threads, [&](std::size_t i) {
    PairedSample& p = pool[i];
    if (fresh_scores(p, navigator.version, digest)) return;
    PairScores s;
    s.nav = navigate_pair(navigator, envs.at(p.env_id()), p);
    s.navigator_version = navigator.version;
    s.navigator_digest = digest;
    p.scores = std::move(s);
  });
}

std::string FilterSummary::to_string() const {
  std::ostringstream out;
  out << "filter=" << stage << " input=" << input << " kept=" << kept
      << " spl_exact=" << format_double(spl_exact) << " ndtw_min=" << format_double(ndtw_min)
      << " navigator_version=" << navigator_version;
  return out.str();
}

Pool filter_generator_data(Pool pool, const NavigatorParams& navigator,
                           const EnvironmentSet& envs, const FilterThresholds& thresholds,
                           int threads, FilterSummary* summary) {
  thresholds.validate();
  score_pool(pool, navigator, envs, threads);
  const std::size_t input = pool.size();
  std::erase_if(pool, [&](const PairedSample& p) {
    return !(p.scores->nav.spl >= thresholds.spl_exact);
  });
  if (summary)
    *summary = {"generator", input, pool.size(), thresholds.spl_exact, thresholds.ndtw_min,
                navigator.version};
  return pool;
}

NavPartition filter_navigator_data(Pool pool, const NavigatorParams& navigator,
                                   const EnvironmentSet& envs,
                                   const FilterThresholds& thresholds, int threads,
                                   FilterSummary* summary) {
  if (!(thresholds.ndtw_min >= 0.0 && thresholds.ndtw_min < 1.0))
    throw Error(ErrorCode::invalid_argument, "ndtw_min must be in [0, 1)");
  score_pool(pool, navigator, envs, threads);
  NavPartition out;
  const std::size_t input = pool.size();
  for (auto& p : pool)
    (p.scores->nav.ndtw >= thresholds.ndtw_min ? out.kept : out.rejected)
        .push_back(std::move(p));
  if (summary)
    *summary = {"navigator", input, out.kept.size(), thresholds.spl_exact,
                thresholds.ndtw_min, navigator.version};
  return out;
}

std::vector<double> score_all(const Pool& pool, Scorer scorer, const ScoringModels& models,
                              const EnvironmentSet& envs, std::uint64_t seed, int threads) {
  require_models(scorer, models);
  std::optional<Generator> gen;
  if (scorer == Scorer::generator_self) gen.emplace(*models.generator);
  std::vector<double> score(pool.size());
  parallel_for(pool.size(), threads, [&](std::size_t i) {
    score[i] = score_with(scorer, models, gen ? &*gen : nullptr, envs.at(pool[i].env_id()),
                          pool[i], seed);
  });
  return score;
}

Pool rank_and_take_top(const Pool& pool, Scorer scorer, const ScoringModels& models,
                       const EnvironmentSet& envs, std::size_t q, std::uint64_t seed,
                       int threads) {
  if (q > pool.size())
    throw Error(ErrorCode::invalid_argument, "cannot take " + std::to_string(q) +
                                                 " from a pool of " +
                                                 std::to_string(pool.size()));
  const std::vector<double> score = score_all(pool, scorer, models, envs, seed, threads);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return pool[a].pair_id < pool[b].pair_id;
  });
  Pool out;
  out.reserve(q);
  for (std::size_t i = 0; i < q; ++i) out.push_back(pool[order[i]]);
  return out;
}

}  // namespace srdf
