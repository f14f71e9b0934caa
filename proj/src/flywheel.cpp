#include "srdf/flywheel.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "srdf/parallel.hpp"

namespace srdf {

namespace {

[[noreturn]] void violated(const std::string& what) {
  throw Error(ErrorCode::invariant_violation, what);
}

void sort_by_id(Pool& pool) {
  std::sort(pool.begin(), pool.end(),
            [](const PairedSample& a, const PairedSample& b) { return a.pair_id < b.pair_id; });
}

std::set<std::string> id_set(const Pool& pool) {
  std::set<std::string> out;
  for (const auto& p : pool) out.insert(p.pair_id);
  return out;
}

Pool concat(Pool a, const Pool& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void DataConfig::validate() const {
  if (seed_pairs < 1 || traj_pool < 1)
    throw Error(ErrorCode::invalid_argument, "seed_pairs and traj_pool must be positive");
  if (worlds.train_worlds < 1 || worlds.val_unseen_worlds < 1)
    throw Error(ErrorCode::invalid_argument, "need train and val_unseen worlds");
  if (eval_trajs_per_world < 1 || eval_refs < 1)
    throw Error(ErrorCode::invalid_argument, "eval sizes must be positive");
  if (hops.min < 1 || hops.max < hops.min)
    throw Error(ErrorCode::invalid_argument, "bad hop range");
  corruption.validate();
}

FlywheelData prepare_data(const DataConfig& config, std::uint64_t seed) {
  config.validate();
  FlywheelData data;
  data.envs = generate_world_set(config.worlds, derive_seed(seed, 1));

  const auto train = data.envs.by_split(Split::train);
  const std::size_t need = static_cast<std::size_t>(config.seed_pairs + config.traj_pool);
  const int per_world = static_cast<int>((need + train.size() - 1) / train.size());
  std::vector<Trajectory> all;
  for (const Environment* env : train) {
    auto trajs = sample_trajectories(*env, per_world, config.hops,
                                     derive_seed(seed, 2, hash_string(env->env_id())));
    all.insert(all.end(), trajs.begin(), trajs.end());
  }
  if (all.size() < need)
    throw Error(ErrorCode::invalid_argument,
                "train worlds yield only " + std::to_string(all.size()) + " of " +
                    std::to_string(need) + " trajectories");
  Rng rng(derive_seed(seed, 3));
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    std::swap(all[i], all[i + uniform_index(rng, all.size() - i)]);

  for (std::size_t i = 0; i < need; ++i) {
    auto traj = std::make_shared<const Trajectory>(std::move(all[i]));
    if (i >= static_cast<std::size_t>(config.seed_pairs)) {
      data.trajs.push_back(std::move(traj));
      continue;
    }
    PairedSample p;
    p.pair_id = traj->traj_id + "#s";
    p.instr = oracle_annotate(data.envs.at(traj->env_id), *traj, config.corruption,
                              derive_seed(seed, 4, hash_string(p.pair_id)));
    p.traj = std::move(traj);
    data.seed.push_back(std::move(p));
  }
  sort_by_id(data.seed);
  std::sort(data.trajs.begin(), data.trajs.end(),
            [](const auto& a, const auto& b) { return a->traj_id < b->traj_id; });

  for (const Environment* env : data.envs.by_split(Split::val_unseen)) {
    for (auto& t : sample_trajectories(*env, config.eval_trajs_per_world, config.hops,
                                       derive_seed(seed, 5, hash_string(env->env_id())))) {
      auto traj = std::make_shared<const Trajectory>(std::move(t));
      for (int r = 0; r < config.eval_refs; ++r) {
        PairedSample p;
        p.pair_id = traj->traj_id + "#r" + std::to_string(r);
        p.traj = traj;
        p.instr = oracle_annotate(*env, *traj, config.corruption,
                                  derive_seed(seed, 6, hash_string(p.pair_id)));
        data.eval.push_back(std::move(p));
      }
    }
  }
  return data;
}

void check_split_hygiene(const FlywheelData& data) {
  auto train_env = [&](const std::string& id, const std::string& what) {
    if (data.envs.at(id).split() != Split::train)
      throw Error(ErrorCode::invalid_argument,
                  what + " uses non-train environment " + id);
  };
  for (const auto& p : data.seed) train_env(p.env_id(), "seed pair " + p.pair_id);
  for (const auto& t : data.trajs) train_env(t->env_id, "trajectory " + t->traj_id);
  for (const auto& p : data.eval)
    if (data.envs.at(p.env_id()).split() != Split::val_unseen)
      throw Error(ErrorCode::invalid_argument,
                  "eval pair " + p.pair_id + " is not from val_unseen");
}

void FlywheelConfig::validate() const {
  if (rounds < 1) throw Error(ErrorCode::invalid_argument, "rounds must be >= 1");
  if (k_sample < 1) throw Error(ErrorCode::invalid_argument, "k_sample must be >= 1");
  if (threads < 1) throw Error(ErrorCode::invalid_argument, "threads must be >= 1");
  sample_decode.validate();
  greedy_decode.validate();
  thresholds.validate();
}

std::vector<std::pair<std::string, const Pool*>> RoundState::pools() const {
  return {{"D_N_t", &D_N_t},
          {"ND_N_t", &ND_N_t},
          {"FND_N_t", &FND_N_t},
          {"LD_N_next", &LD_N_next},
          {"FD_N_below_next", &FD_N_below_next},
          {"D_G_next", &D_G_next},
          {"FD_G_next", &FD_G_next}};
}

RoundMetrics evaluate_round(const FollowFn& follower, const GenerateFn& generator,
                            const EnvironmentSet& envs, const Pool& eval_pairs,
                            int threads) {
  if (eval_pairs.empty()) throw Error(ErrorCode::empty_input, "empty eval set");
  RoundMetrics m;

  std::vector<NavScores> nav(eval_pairs.size());
  parallel_for(eval_pairs.size(), threads, [&](std::size_t i) {
    const PairedSample& p = eval_pairs[i];
    const Environment& env = envs.at(p.env_id());
    nav[i] = score_episode(env, *p.traj, follower(env, p));
  });
  for (const auto& s : nav) {
    m.ne += s.ne;
    m.osr += s.osr;
    m.sr += s.sr;
    m.spl += s.spl;
    m.ndtw += s.ndtw;
    m.sdtw += s.sdtw;
  }
  const double n = static_cast<double>(nav.size());
  m.ne /= n;
  m.osr /= n;
  m.sr /= n;
  m.spl /= n;
  m.ndtw /= n;
  m.sdtw /= n;

  // References grouped per trajectory, in order of first appearance.
  std::vector<const Trajectory*> trajs;
  std::map<std::string, std::vector<Instruction>> refs;
  for (const auto& p : eval_pairs) {
    auto& r = refs[p.traj->traj_id];
    if (r.empty()) trajs.push_back(p.traj.get());
    r.push_back(p.instr);
  }
  std::vector<Instruction> outputs(trajs.size());
  parallel_for(trajs.size(), threads, [&](std::size_t i) {
    outputs[i] = generator(envs.at(trajs[i]->env_id), *trajs[i]);
  });
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < trajs.size(); ++i)
    corpus.push_back({&outputs[i], refs.at(trajs[i]->traj_id)});
  std::vector<TextScores> text;
  if (corpus.size() >= 2) {
    text = score_text_corpus(corpus);
  } else {
    text.push_back(score_text(outputs[0], corpus[0].references));
  }
  for (const auto& s : text) {
    m.prop_f1 += s.prop_f1;
    m.prop_f1_dir += s.prop_f1_dir;
    m.bleu1 += s.bleu1;
    m.bleu4 += s.bleu4;
    m.cider += s.cider;
    m.rouge_l += s.rouge_l;
  }
  const double k = static_cast<double>(text.size());
  m.prop_f1 /= k;
  m.prop_f1_dir /= k;
  m.bleu1 /= k;
  m.bleu4 /= k;
  m.cider /= k;
  m.rouge_l /= k;
  return m;
}

RoundMetrics evaluate_round(const NavigatorParams& N, const GeneratorParams& G,
                            const EnvironmentSet& envs, const Pool& eval_pairs,
                            int threads) {
  const Generator gen(G);
  const FollowFn follower = [&](const Environment& env, const PairedSample& p) {
    try {
      return follow(N, env, p.instr, p.traj->nodes.front(), p.traj->headings.front())
          .followed;
    } catch (const UnparseableInstruction&) {
      Trajectory stay = *p.traj;
      stay.nodes.resize(1);
      stay.headings.resize(1);
      stay.actions = {Action::stop()};
      return stay;
    }
  };
  const GenerateFn generator = [&](const Environment& env, const Trajectory& traj) {
    return gen.generate(env, traj, DecodeConfig::greedy()).instruction;
  };
  return evaluate_round(follower, generator, envs, eval_pairs, threads);
}

std::uint64_t round_seed(std::uint64_t master_seed, int t) {
  return master_seed ^ static_cast<std::uint64_t>(t);
}

namespace {

enum : std::uint64_t { kSampleTag = 11, kNavTag = 12, kGenTag = 13 };

// One generated pair per slot; slot i reuses ids[i] and the trajectory of
// the same index.
Pool generate_pairs(const Generator& gen, const EnvironmentSet& envs,
                    const std::vector<std::shared_ptr<const Trajectory>>& trajs,
                    const std::vector<std::string>& ids, const DecodeConfig& decode,
                    std::uint64_t seed, int t, int threads) {
  Pool out(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    DecodeConfig d = decode;
    d.seed = derive_seed(seed, kSampleTag, hash_string(ids[i]));
    PairedSample& p = out[i];
    p.pair_id = ids[i];
    p.traj = trajs[i];
    p.instr = gen.generate(envs.at(trajs[i]->env_id), *trajs[i], d).instruction;
    p.provenance = Provenance::generated(t, decode.mode);
  });
  return out;
}

void check_idempotent(const Pool& filtered, const NavigatorParams& N,
                      const EnvironmentSet& envs, const FilterThresholds& th, bool generator) {
  if (generator) {
    if (filter_generator_data(filtered, N, envs, th) != filtered)
      violated("generator filter is not idempotent");
  } else {
    const NavPartition again = filter_navigator_data(filtered, N, envs, th);
    if (again.kept != filtered || !again.rejected.empty())
      violated("navigator filter is not idempotent");
  }
}

}  // namespace

std::pair<RoundState, RoundReport> run_round(const FlywheelData& data,
                                             const std::optional<RoundState>& prev,
                                             const FlywheelConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RoundState s;
  s.t = prev ? prev->t + 1 : 1;
  const std::uint64_t seed = round_seed(config.master_seed, s.t);
  const int threads = config.threads;
  const EnvironmentSet& envs = data.envs;

  // (1) generator
  if (prev && prev->FD_G_next.empty())
    throw Error(ErrorCode::empty_filter,
                "FD_G_" + std::to_string(s.t) +
                    " is empty: the navigator followed no greedy instruction exactly");
  const Pool gen_train = prev ? concat(prev->FD_G_next, data.seed) : data.seed;
  s.G = train_generator(envs, gen_train, prev ? std::optional(prev->G) : std::nullopt,
                        config.gen_train, derive_seed(seed, kGenTag), config.encoding,
                        config.landmark_vocab);
  const Generator gen(s.G);

  // (2) sampled navigator data and greedy generator data
  std::vector<std::shared_ptr<const Trajectory>> slot_trajs;
  std::vector<std::string> slot_ids;
  if (prev) {
    for (const auto& p : prev->LD_N_next) {
      slot_trajs.push_back(p.traj);
      slot_ids.push_back(p.pair_id);
    }
  } else {
    for (const auto& traj : data.trajs)
      for (int k = 0; k < config.k_sample; ++k) {
        slot_trajs.push_back(traj);
        slot_ids.push_back(traj->traj_id + "#" + std::to_string(k));
      }
  }
  s.ND_N_t = generate_pairs(gen, envs, slot_trajs, slot_ids, config.sample_decode, seed, s.t,
                            threads);
  std::vector<std::string> greedy_ids;
  for (const auto& traj : data.trajs) greedy_ids.push_back(traj->traj_id + "#g");
  s.D_G_next = generate_pairs(gen, envs, data.trajs, greedy_ids, config.greedy_decode, seed,
                              s.t, threads);

  // (3) D_N_t = ND_N_t + FD_N_<t
  s.D_N_t = prev ? concat(s.ND_N_t, prev->FD_N_below_next) : s.ND_N_t;
  sort_by_id(s.D_N_t);
  const std::size_t expected = data.trajs.size() * static_cast<std::size_t>(config.k_sample);
  if (s.D_N_t.size() != expected)
    violated("|D_N_" + std::to_string(s.t) + "| = " + std::to_string(s.D_N_t.size()) +
             ", expected " + std::to_string(expected));
  if (id_set(s.D_N_t).size() != s.D_N_t.size()) violated("duplicate pair ids in D_N");

  // (4) navigator: pool pretraining, then seed fine-tuning
  s.N = train_navigator(envs, s.D_N_t, data.seed, prev ? std::optional(prev->N) : std::nullopt,
                        config.nav_train, derive_seed(seed, kNavTag));
  s.N.version = s.t;

  // (5) filter
  RoundReport report;
  FilterSummary fg, fn;
  score_pool(s.D_G_next, s.N, envs, threads);
  s.FD_G_next = filter_generator_data(s.D_G_next, s.N, envs, config.thresholds, threads, &fg);
  NavPartition part =
      filter_navigator_data(s.ND_N_t, s.N, envs, config.thresholds, threads, &fn);
  s.ND_N_t = concat(part.kept, part.rejected);
  sort_by_id(s.ND_N_t);
  s.FND_N_t = std::move(part.kept);
  s.LD_N_next = std::move(part.rejected);
  fg.stage = "FD_G_" + std::to_string(s.t + 1);
  fn.stage = "FND_N_" + std::to_string(s.t);
  report.filters = {fg, fn};

  // (6) accumulate
  s.FD_N_below_next = prev ? concat(prev->FD_N_below_next, s.FND_N_t) : s.FND_N_t;
  sort_by_id(s.FD_N_below_next);

  if (s.FND_N_t.size() + s.LD_N_next.size() != s.ND_N_t.size())
    violated("FND/LD do not partition ND_N");
  const auto dg = id_set(s.D_G_next);
  for (const auto& p : s.FD_G_next)
    if (!dg.count(p.pair_id)) violated("FD_G pair " + p.pair_id + " not in D_G");
  if (prev) {
    const auto now = id_set(s.FD_N_below_next);
    for (const auto& p : prev->FD_N_below_next)
      if (!now.count(p.pair_id)) violated("FD_N_<t lost pair " + p.pair_id);
  }
  check_idempotent(s.FD_G_next, s.N, envs, config.thresholds, true);
  check_idempotent(s.FND_N_t, s.N, envs, config.thresholds, false);

  // (7) evaluate
  report.label = std::to_string(s.t);
  report.round = s.t;
  report.metrics = evaluate_round(s.N, s.G, envs, data.eval, threads);
  report.pool_sizes = {{"D_Seed", data.seed.size()}, {"D_Traj", data.trajs.size()}};
  for (const auto& [name, pool] : s.pools()) report.pool_sizes.emplace_back(name, pool->size());
  report.wall_seconds = seconds_since(start);
  return {std::move(s), std::move(report)};
}

FlywheelResult run_flywheel(const FlywheelData& data, const FlywheelConfig& config,
                            const RoundCallback& on_round) {
  config.validate();
  if (data.seed.empty() || data.trajs.empty())
    throw Error(ErrorCode::empty_input, "flywheel needs seed pairs and trajectories");
  check_split_hygiene(data);

  FlywheelResult result;
  if (config.baseline) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = round_seed(config.master_seed, 0);
    NavigatorParams N = train_navigator(data.envs, data.seed, {}, std::nullopt,
                                        config.nav_train, derive_seed(seed, kNavTag));
    const GeneratorParams G =
        train_generator(data.envs, data.seed, std::nullopt, config.gen_train,
                        derive_seed(seed, kGenTag), config.encoding, config.landmark_vocab);
    RoundReport r;
    r.label = "baseline";
    r.metrics = evaluate_round(N, G, data.envs, data.eval, config.threads);
    r.pool_sizes = {{"D_Seed", data.seed.size()}, {"D_Traj", data.trajs.size()}};
    r.wall_seconds = seconds_since(start);
    result.baseline = std::move(r);
  }

  std::optional<RoundState> state;
  for (int t = 1; t <= config.rounds; ++t) {
    auto [next, report] = run_round(data, state, config);
    if (on_round) on_round(next, report);
    result.rounds.push_back(std::move(report));
    state = std::move(next);
  }

  if (config.finetune_generator_final) {
    const auto start = std::chrono::steady_clock::now();
    if (state->FD_G_next.empty())
      throw Error(ErrorCode::empty_filter, "final FD_G is empty; nothing to fine-tune on");
    GeneratorParams G = train_generator(
        data.envs, concat(state->FD_G_next, data.seed), state->G, config.gen_train,
        derive_seed(round_seed(config.master_seed, config.rounds + 1), kGenTag),
        config.encoding, config.landmark_vocab);
    RoundReport r;
    r.label = std::to_string(config.rounds) + "+ft";
    r.round = config.rounds;
    r.metrics = evaluate_round(state->N, G, data.envs, data.eval, config.threads);
    r.wall_seconds = seconds_since(start);
    result.finetuned = std::move(r);
    result.finetuned_generator = std::move(G);
  }
  result.final_state = std::move(*state);
  return result;
}

}  // namespace srdf
