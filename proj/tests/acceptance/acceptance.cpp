// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance --cli build/srdf_cli --work DIR [--seeds 5] [--only 1,2,3]
//
// Criteria 4, 7 and 8 run the CLI at the default desk config. 5, 6 and 9
// reuse the data and models those runs wrote.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "../dtw_oracle.hpp"
#include "../golden_text.hpp"
#include "CLI11.hpp"
#include "srdf/nav_metrics.hpp"
#include "srdf/pipeline.hpp"
#include "srdf/text_metrics.hpp"

using namespace srdf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

void note(const std::string& msg) { std::fprintf(stderr, "[acceptance] %s\n", msg.c_str()); }

std::string quote(const std::string& s) { return "'" + s + "'"; }

// ---------------------------------------------------------------------------
// 1-3: exact metric oracles

Outcome dtw_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Point> a(1 + uniform_index(rng, 5)), b(1 + uniform_index(rng, 5));
    for (auto* seq : {&a, &b})
      for (auto& p : *seq) p = {30.0 * uniform01(rng), 30.0 * uniform01(rng)};
    worst = std::max(worst, std::abs(dtw(a, b) - testing::brute_force_dtw(a, b)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0,
          "200 pairs, max |dp - brute force| = " + fmt(worst, 12) + ", " + fmt(secs, 2) + " s"};
}

Outcome metric_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  int episodes = 0, bad = 0;
  Rng rng(77);
  for (std::uint64_t w = 0; episodes < 1000; ++w) {
    const Environment env = generate_environment(WorldGenConfig{}, 900 + w, "acc");
    for (const auto& ref : sample_trajectories(env, 50, {1, 7}, w)) {
      if (episodes == 1000) break;
      const NavScores self = score_episode(env, ref, ref);
      if (self.ndtw != 1.0 || self.spl != 1.0 || self.sr != 1.0) ++bad;
      std::vector<NodeId> walk{ref.nodes.front()};
      const auto len = uniform_index(rng, 9);
      for (std::uint64_t i = 0; i < len; ++i) {
        const auto nb = env.neighbors(walk.back());
        walk.push_back(nb[uniform_index(rng, nb.size())]);
      }
      const NavScores s = score_episode(env, ref, make_trajectory(env, "f", walk, 0.0));
      if (!(s.spl <= s.sr) || s.sdtw != s.sr * s.ndtw) ++bad;
      ++episodes;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0, std::to_string(episodes) + " episodes, " +
                                       std::to_string(bad) + " violations, " + fmt(secs, 2) +
                                       " s"};
}

Outcome text_golden() {
  std::vector<Instruction> cands;
  std::vector<std::vector<Instruction>> refs;
  for (const auto& item : testing::kGoldenCorpus) {
    cands.push_back(Instruction::from_text(item.candidate));
    auto& r = refs.emplace_back();
    for (const char* t : item.references) r.push_back(Instruction::from_text(t));
  }
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < cands.size(); ++i) corpus.push_back({&cands[i], refs[i]});
  const auto scores = score_text_corpus(corpus);
  double worst = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& g = testing::kGoldenValues[i];
    const double got[] = {scores[i].bleu1, scores[i].bleu4,   scores[i].rouge_l,
                          scores[i].cider, scores[i].prop_f1, scores[i].prop_f1_dir};
    for (int k = 0; k < 6; ++k) worst = std::max(worst, std::abs(got[k] - g[k]));
  }
  return {worst <= 1e-9, "10 items x 6 metrics, max deviation " + fmt(worst, 12)};
}

// ---------------------------------------------------------------------------
// Flywheel runs

struct RunData {
  fs::path dir;
  FlywheelData data;
  std::vector<RoundReport> reports;  // baseline, 1, 2, 3
  double seconds = 0.0;
};

RunData load_run(const fs::path& dir) {
  RunData r;
  r.dir = dir;
  r.data.envs = load_envs(dir / "data/envs.jsonl");
  r.data.seed = load_pool(dir / "data/seed.jsonl");
  r.data.trajs = trajs_from_jsonl(read_text_file(dir / "data/trajs.jsonl"));
  r.data.eval = load_pool(dir / "data/eval.jsonl");
  r.reports = load_reports(dir);
  return r;
}

const RoundReport& round_report(const RunData& r, const std::string& label) {
  for (const auto& rep : r.reports)
    if (rep.label == label) return rep;
  throw std::runtime_error("no report row " + label + " in " + r.dir.string());
}

bool run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = quote(cli) + " " + args + " > " + quote(log.string()) + " 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Outcome flywheel_improvement(const std::vector<RunData>& runs) {
  std::vector<double> sr1, sr2, sr3, pf1, pf2, pf3;
  double slowest = 0.0;
  for (const auto& r : runs) {
    sr1.push_back(100.0 * round_report(r, "1").metrics.sr);
    sr2.push_back(100.0 * round_report(r, "2").metrics.sr);
    sr3.push_back(100.0 * round_report(r, "3").metrics.sr);
    pf1.push_back(round_report(r, "1").metrics.prop_f1);
    pf2.push_back(round_report(r, "2").metrics.prop_f1);
    pf3.push_back(round_report(r, "3").metrics.prop_f1);
    slowest = std::max(slowest, r.seconds);
  }
  const double s1 = mean(sr1), s2 = mean(sr2), s3 = mean(sr3);
  const double p1 = mean(pf1), p2 = mean(pf2), p3 = mean(pf3);
  const bool nav = s2 >= s1 + 2.0;
  const bool gen = p2 >= p1 + 0.01;
  // "0.5 points" read on each metric's reporting scale: SR in percent,
  // prop_f1 in percent as well.
  const bool keep = s3 >= s2 - 0.5 && 100.0 * p3 >= 100.0 * p2 - 0.5;
  const bool fast = slowest < 600.0;
  std::string d = "SR " + fmt(s1, 2) + " -> " + fmt(s2, 2) + " -> " + fmt(s3, 2) +
                  " (need +2.00: " + (nav ? "ok" : "no") + "), prop_f1 " + fmt(p1) + " -> " +
                  fmt(p2) + " -> " + fmt(p3) + " (need +0.0100: " + (gen ? "ok" : "no") +
                  "), round 3 non-degradation " + (keep ? "ok" : "no") + ", slowest run " +
                  fmt(slowest, 1) + " s, " + std::to_string(runs.size()) + " seeds";
  return {nav && gen && keep && fast, d};
}

std::set<std::string> ids_of(const Pool& pool) {
  std::set<std::string> out;
  for (const auto& p : pool) out.insert(p.pair_id);
  return out;
}

Pool without_scores(Pool pool) {
  for (auto& p : pool) p.scores.reset();
  return pool;
}

// Re-checks the round invariants from the files a run wrote.
std::vector<std::string> invariant_violations(const RunData& r, int rounds, int k_sample,
                                              const FilterThresholds& th) {
  std::vector<std::string> bad;
  const auto fail = [&](int t, const std::string& what) {
    bad.push_back(r.dir.filename().string() + " round " + std::to_string(t) + ": " + what);
  };
  try {
    check_split_hygiene(r.data);
  } catch (const Error& e) {
    bad.push_back(r.dir.filename().string() + ": " + e.what());
  }
  std::set<std::string> eval_envs;
  for (const auto& p : r.data.eval) eval_envs.insert(p.env_id());
  std::set<std::string> prev_below;
  for (int t = 1; t <= rounds; ++t) {
    const fs::path dir = r.dir / ("round" + std::to_string(t));
    std::map<std::string, Pool> pools;
    for (const char* name : {"D_N_t", "ND_N_t", "FND_N_t", "LD_N_next", "FD_N_below_next",
                             "D_G_next", "FD_G_next"})
      pools[name] = load_pool(dir / (std::string(name) + ".jsonl"));
    const NavigatorParams N = navigator_from_text(read_text_file(dir / "N.json"));

    if (pools["D_N_t"].size() != r.data.trajs.size() * static_cast<std::size_t>(k_sample) ||
        ids_of(pools["D_N_t"]).size() != pools["D_N_t"].size())
      fail(t, "|D_N_t| = " + std::to_string(pools["D_N_t"].size()));
    std::set<std::string> nd = ids_of(pools["ND_N_t"]);
    std::set<std::string> split = ids_of(pools["FND_N_t"]);
    for (const auto& id : ids_of(pools["LD_N_next"]))
      if (!split.insert(id).second) fail(t, "FND and LD overlap at " + id);
    if (split != nd) fail(t, "FND + LD != ND");
    const std::set<std::string> below = ids_of(pools["FD_N_below_next"]);
    for (const auto& id : prev_below)
      if (!below.count(id)) fail(t, "FD_N lost " + id);
    prev_below = below;
    const std::set<std::string> dg = ids_of(pools["D_G_next"]);
    for (const auto& id : ids_of(pools["FD_G_next"]))
      if (!dg.count(id)) fail(t, "FD_G not in D_G: " + id);
    for (const auto& [name, pool] : pools)
      for (const auto& p : pool)
        if (eval_envs.count(p.env_id())) fail(t, name + " uses eval env " + p.env_id());

    // Filtering the kept pairs again with the same navigator keeps them all.
    const Pool fdg = without_scores(pools["FD_G_next"]);
    if (ids_of(filter_generator_data(fdg, N, r.data.envs, th)) != ids_of(fdg))
      fail(t, "generator filter");
    const Pool fnd = without_scores(pools["FND_N_t"]);
    if (ids_of(filter_navigator_data(fnd, N, r.data.envs, th).kept) != ids_of(fnd))
      fail(t, "navigator filter");
  }
  return bad;
}

Outcome structural_invariants(const std::vector<RunData>& runs, bool all_runs_ok) {
  const RunConfig defaults;
  std::vector<std::string> bad;
  for (const auto& r : runs) {
    auto more = invariant_violations(r, defaults.flywheel.rounds, defaults.flywheel.k_sample,
                                     defaults.flywheel.thresholds);
    bad.insert(bad.end(), more.begin(), more.end());
  }
  std::string d = std::to_string(runs.size()) +
                  " runs asserted in-process and re-checked from files: " +
                  std::to_string(bad.size()) + " violations";
  if (!bad.empty()) d += " (first: " + bad.front() + ")";
  if (!all_runs_ok) d += "; a run aborted";
  return {bad.empty() && all_runs_ok, d};
}

Outcome determinism(const std::string& cli, const fs::path& reference, const fs::path& work) {
  const fs::path other = work / "threads4";
  fs::remove_all(other);
  const std::string args = "run-flywheel --config " + quote((reference / "manifest.json").string()) +
                           " --threads 4 --out " + quote(other.string());
  if (!run_cli(cli, args, work / "threads4.log")) return {false, "threads 4 run failed"};
  std::size_t compared = 0;
  std::vector<std::string> differ;
  for (const auto& entry : fs::recursive_directory_iterator(reference)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), reference);
    if (rel == "timings.txt") continue;
    ++compared;
    if (!fs::exists(other / rel) ||
        read_text_file(entry.path()) != read_text_file(other / rel))
      differ.push_back(rel.string());
  }
  std::string d = std::to_string(compared) + " files (pools, models, reports, manifest) " +
                  "compared between --threads 1 and --threads 4: " +
                  std::to_string(differ.size()) + " differ";
  if (!differ.empty()) d += " (first: " + differ.front() + ")";
  fs::remove_all(other);
  return {differ.empty() && compared > 0, d};
}

// ---------------------------------------------------------------------------
// 5: scorer comparison

// Eval references grouped by trajectory, in id order.
std::vector<std::pair<std::shared_ptr<const Trajectory>, std::vector<Instruction>>>
eval_groups(const Pool& eval) {
  std::map<std::string, std::pair<std::shared_ptr<const Trajectory>, std::vector<Instruction>>> g;
  for (const auto& p : eval) {
    auto& e = g[p.traj->traj_id];
    e.first = p.traj;
    e.second.push_back(p.instr);
  }
  std::vector<std::pair<std::shared_ptr<const Trajectory>, std::vector<Instruction>>> out;
  for (auto& [id, e] : g) out.push_back(std::move(e));
  return out;
}

struct SelectionScore {
  double prop_f1 = 0.0;
  double prop_f1_dir = 0.0;
};

Outcome scorer_comparison(const std::vector<RunData>& runs) {
  const std::vector<Scorer> scorers{Scorer::navigator_ndtw, Scorer::random,
                                    Scorer::embedding_cosine, Scorer::generator_self};
  std::map<Scorer, std::vector<SelectionScore>> per_seed;
  std::vector<double> all_f1, all_dir;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const RunData& r = runs[s];
    const std::uint64_t seed = s + 1;
    const NavigatorParams N = navigator_from_text(read_text_file(r.dir / "round1/N.json"));
    const GeneratorParams G = generator_from_text(read_text_file(r.dir / "round1/G.json"));
    const Generator gen(G);
    auto groups = eval_groups(r.data.eval);
    if (groups.size() < 261) throw std::runtime_error("need 261 eval trajectories");
    groups.resize(261);

    // 783 generated pairs: three top-k samples per trajectory.
    Pool pool;
    std::map<std::string, const std::vector<Instruction>*> refs;
    for (const auto& [traj, rs] : groups)
      for (int j = 0; j < 3; ++j) {
        PairedSample p;
        p.pair_id = traj->traj_id + "#c" + std::to_string(j);
        p.traj = traj;
        p.instr = gen.generate(r.data.envs.at(traj->env_id), *traj,
                               DecodeConfig::top_k(3, derive_seed(seed, 500, hash_string(p.pair_id))))
                      .instruction;
        p.provenance = Provenance::generated(1, DecodeMode::top_k);
        refs[p.pair_id] = &rs;
        pool.push_back(std::move(p));
      }
    for (const auto& p : pool) {
      const TextScores t = score_text(p.instr, *refs[p.pair_id]);
      all_f1.push_back(t.prop_f1);
      all_dir.push_back(t.prop_f1_dir);
    }
    const ScoringModels models{&N, &G};
    for (Scorer sc : scorers) {
      const Pool top = rank_and_take_top(pool, sc, models, r.data.envs, 400, seed);
      std::vector<double> f1, dir;
      for (const auto& p : top) {
        const TextScores t = score_text(p.instr, *refs[p.pair_id]);
        f1.push_back(t.prop_f1);
        dir.push_back(t.prop_f1_dir);
      }
      per_seed[sc].push_back({mean(f1), mean(dir)});
    }
  }
  std::map<Scorer, SelectionScore> avg;
  for (auto& [sc, v] : per_seed) {
    for (const auto& x : v) {
      avg[sc].prop_f1 += x.prop_f1 / v.size();
      avg[sc].prop_f1_dir += x.prop_f1_dir / v.size();
    }
  }
  const auto& nav = avg[Scorer::navigator_ndtw];
  const auto& rnd = avg[Scorer::random];
  const auto& emb = avg[Scorer::embedding_cosine];
  const bool beats = nav.prop_f1 > rnd.prop_f1 && nav.prop_f1 > emb.prop_f1;
  const bool blind = (emb.prop_f1_dir - rnd.prop_f1_dir) < (nav.prop_f1_dir - rnd.prop_f1_dir);
  std::string d = "783 pairs -> top 400, prop_f1/prop_f1_dir:";
  for (Scorer sc : scorers)
    d += " " + std::string(scorer_name(sc)) + " " + fmt(avg[sc].prop_f1) + "/" +
         fmt(avg[sc].prop_f1_dir);
  d += ", all 783 " + fmt(mean(all_f1)) + "/" + fmt(mean(all_dir));
  d += std::string("; nDTW beats random and embedding: ") + (beats ? "yes" : "no") +
       ", embedding dir gain " + fmt(emb.prop_f1_dir - rnd.prop_f1_dir) + " < nDTW dir gain " +
       fmt(nav.prop_f1_dir - rnd.prop_f1_dir) + ": " + (blind ? "yes" : "no");
  return {beats && blind, d};
}

// ---------------------------------------------------------------------------
// 6: instruction diversity

double navigation_sr(const NavigatorParams& N, const FlywheelData& data) {
  double sr = 0.0;
  for (const auto& p : data.eval) sr += navigate_pair(N, data.envs.at(p.env_id()), p).sr;
  return sr / data.eval.size();
}

Outcome diversity_ablation(const std::vector<RunData>& runs) {
  const RunConfig defaults;
  const CorruptionConfig heavy = defaults.data.corruption.scaled(2.0);
  const int vocab = defaults.data.worlds.gen.landmark_vocab;
  std::map<std::string, std::vector<double>> sr;  // "clean/k", "noisy/k"
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const RunData& r = runs[s];
    const std::uint64_t seed = s + 1;
    const Generator gen(generator_from_text(read_text_file(r.dir / "round2/G.json")));
    // Six samples per trajectory; k takes the first k, so pools are nested.
    Pool clean6, noisy6;
    for (const auto& traj : r.data.trajs) {
      const Environment& env = r.data.envs.at(traj->env_id);
      for (int j = 0; j < 6; ++j) {
        PairedSample p;
        p.pair_id = traj->traj_id + "#" + std::to_string(j);
        p.traj = traj;
        p.instr = gen.generate(env, *traj,
                               DecodeConfig::top_k(3, derive_seed(seed, 600, hash_string(p.pair_id))))
                      .instruction;
        p.provenance = Provenance::generated(2, DecodeMode::top_k);
        clean6.push_back(p);
        Rng rng(derive_seed(seed, 601, hash_string(p.pair_id)));
        p.instr = render(corrupt_clauses(parse_clauses(p.instr), heavy, rng, vocab));
        noisy6.push_back(std::move(p));
      }
    }
    const auto first_k = [](const Pool& six, int k) {
      Pool out;
      for (std::size_t i = 0; i < six.size(); ++i)
        if (static_cast<int>(i % 6) < k) out.push_back(six[i]);
      return out;
    };
    for (const auto& [tag, six] : {std::pair<std::string, const Pool*>{"clean", &clean6},
                                   std::pair<std::string, const Pool*>{"noisy", &noisy6}})
      for (int k : {1, 3, 6}) {
        if (tag == "noisy" && k == 1) continue;
        const Pool pool = first_k(*six, k);
        const NavigatorParams N = train_navigator(r.data.envs, pool, r.data.seed, std::nullopt,
                                                  defaults.flywheel.nav_train, seed);
        const double v = 100.0 * navigation_sr(N, r.data);
        sr[tag + "/" + std::to_string(k)].push_back(v);
        note("diversity seed " + std::to_string(seed) + " " + tag + " k=" + std::to_string(k) +
             " SR " + fmt(v, 2));
      }
  }
  const double c1 = mean(sr["clean/1"]), c3 = mean(sr["clean/3"]), c6 = mean(sr["clean/6"]);
  const double n3 = mean(sr["noisy/3"]), n6 = mean(sr["noisy/6"]);
  const bool mono = c3 >= c1 && c6 >= c3;
  const bool smaller = (n6 - n3) < (c6 - c3);
  std::string d = "SR k=1/3/6 " + fmt(c1, 2) + "/" + fmt(c3, 2) + "/" + fmt(c6, 2) +
                  " (monotone: " + (mono ? "yes" : "no") + "); doubled corruption k=3/6 " +
                  fmt(n3, 2) + "/" + fmt(n6, 2) + ", gain " + fmt(n6 - n3, 2) + " vs clean " +
                  fmt(c6 - c3, 2) + " (smaller: " + (smaller ? "yes" : "no") + ")";
  return {mono && smaller, d};
}

// ---------------------------------------------------------------------------
// 9: encoding format

Outcome encoding_ablation(const std::vector<RunData>& runs) {
  const RunConfig defaults;
  std::vector<double> inter, obs;
  const FollowFn replay = [](const Environment&, const PairedSample& p) { return *p.traj; };
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const RunData& r = runs[s];
    for (EncodingFormat f : {EncodingFormat::interleaved, EncodingFormat::observation_only}) {
      const Generator gen(train_generator(r.data.envs, r.data.seed, std::nullopt,
                                          defaults.flywheel.gen_train, s + 1, f,
                                          defaults.data.worlds.gen.landmark_vocab));
      const GenerateFn greedy = [&](const Environment& env, const Trajectory& t) {
        return gen.generate(env, t, DecodeConfig::greedy()).instruction;
      };
      const double v = evaluate_round(replay, greedy, r.data.envs, r.data.eval).prop_f1_dir;
      (f == EncodingFormat::interleaved ? inter : obs).push_back(v);
    }
  }
  const bool pass = mean(inter) >= mean(obs);
  return {pass, "prop_f1_dir interleaved " + fmt(mean(inter)) + " vs observation-only " +
                    fmt(mean(obs)) + ", " + std::to_string(runs.size()) + " seeds"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli, only;
  fs::path work = fs::temp_directory_path() / "srdf_acceptance";
  int seeds = 5;
  bool keep = false;
  app.add_option("--cli", cli, "Path to srdf_cli")->required();
  app.add_option("--work", work, "Scratch directory for runs");
  app.add_option("--seeds", seeds, "Master seeds 1..N")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Comma-separated criteria to run");
  app.add_flag("--keep", keep, "Keep run directories");
  CLI11_PARSE(app, argc, argv);

  std::set<int> wanted;
  if (only.empty()) {
    for (int i = 1; i <= 9; ++i) wanted.insert(i);
  } else {
    std::stringstream ss(only);
    for (std::string tok; std::getline(ss, tok, ',');) wanted.insert(std::stoi(tok));
  }
  const char* names[] = {"",
                         "DTW oracle equivalence",
                         "Metric identities",
                         "Text-metric golden values",
                         "Flywheel mutual improvement",
                         "Scorer comparison",
                         "Instruction-diversity ablation",
                         "Structural invariants",
                         "Determinism",
                         "Encoding-format ablation"};
  std::map<int, Outcome> results;
  const auto guarded = [&](int id, const std::function<Outcome()>& fn) {
    if (!wanted.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("aborted: ") + e.what()};
    }
    note("criterion " + std::to_string(id) + " done in " + fmt(seconds_since(t0), 1) + " s");
  };

  guarded(1, dtw_oracle);
  guarded(2, metric_identities);
  guarded(3, text_golden);

  const bool need_runs = wanted.count(4) || wanted.count(5) || wanted.count(6) ||
                         wanted.count(7) || wanted.count(8) || wanted.count(9);
  std::vector<RunData> runs;
  bool runs_ok = true;
  std::string run_error;
  if (need_runs) {
    fs::create_directories(work);
    for (int s = 1; s <= seeds; ++s) {
      const fs::path dir = work / ("seed" + std::to_string(s));
      fs::remove_all(dir);
      const auto t0 = std::chrono::steady_clock::now();
      const std::string args = "run-flywheel --seed " + std::to_string(s) + " --threads 1 --out " +
                               quote(dir.string());
      note("run-flywheel seed " + std::to_string(s));
      if (!run_cli(cli, args, work / ("seed" + std::to_string(s) + ".log"))) {
        runs_ok = false;
        run_error = "run-flywheel failed for seed " + std::to_string(s) + ", see " +
                    (work / ("seed" + std::to_string(s) + ".log")).string();
        note(run_error);
        continue;
      }
      RunData r = load_run(dir);
      r.seconds = seconds_since(t0);
      note("seed " + std::to_string(s) + " took " + fmt(r.seconds, 1) + " s");
      runs.push_back(std::move(r));
    }
  }
  const auto with_runs = [&](int id, const std::function<Outcome()>& fn) {
    guarded(id, [&]() -> Outcome {
      if (!runs_ok) return {false, run_error};
      return fn();
    });
  };
  with_runs(4, [&] { return flywheel_improvement(runs); });
  guarded(7, [&] { return structural_invariants(runs, runs_ok); });
  with_runs(8, [&] { return determinism(cli, runs.front().dir, work); });
  with_runs(5, [&] { return scorer_comparison(runs); });
  with_runs(6, [&] { return diversity_ablation(runs); });
  with_runs(9, [&] { return encoding_ablation(runs); });

  int failed = 0;
  std::string summary;
  for (const auto& [id, o] : results) {
    char line[160];
    std::snprintf(line, sizeof(line), "criterion %d: %s  %s", id, o.pass ? "PASS" : "FAIL",
                  names[id]);
    summary += std::string(line) + "  [" + o.detail + "]\n";
    failed += !o.pass;
  }
  std::fputs(summary.c_str(), stdout);
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  if (need_runs) write_text_file(work / "acceptance_summary.txt", summary);
  if (!keep)
    for (int s = 1; s <= seeds; ++s) fs::remove_all(work / ("seed" + std::to_string(s)));
  return failed ? 1 : 0;
}
