// Command-line front end over the C API.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srdf/srdf.h"

namespace {

// Thrown after a failed C call; main prints it as one line.
struct Failure {
  srdf_status status;
  std::string message;
};

void check(srdf_status s) {
  if (s != SRDF_OK) throw Failure{s, srdf_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<srdf_config, Deleter<srdf_config, srdf_config_free>>;
using EnvsPtr = std::unique_ptr<srdf_envs, Deleter<srdf_envs, srdf_envs_free>>;
using PoolPtr = std::unique_ptr<srdf_pool, Deleter<srdf_pool, srdf_pool_free>>;
using NavPtr = std::unique_ptr<srdf_navigator, Deleter<srdf_navigator, srdf_navigator_free>>;
using GenPtr = std::unique_ptr<srdf_generator, Deleter<srdf_generator, srdf_generator_free>>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  srdf_string_free(s);
  return out;
}

struct Options {
  std::string config;
  std::optional<std::string> seed, rounds, k_sample, ndtw_min;
  std::string out;
  int threads = 1;
  // file inputs
  std::string pool, envs, navigator, generator, run_dir, scorer = "navigator_ndtw";
  std::string stage = "navigator", format = "markdown";
  std::optional<std::size_t> top;
  double spl_exact = 1.0;
};

ConfigPtr resolve_config(const Options& o) {
  srdf_config* raw = nullptr;
  check(o.config.empty() ? srdf_config_new(&raw) : srdf_config_load(o.config.c_str(), &raw));
  ConfigPtr c(raw);
  if (o.seed) check(srdf_config_set(c.get(), "master_seed", o.seed->c_str()));
  if (o.rounds) check(srdf_config_set(c.get(), "rounds", o.rounds->c_str()));
  if (o.k_sample) check(srdf_config_set(c.get(), "k_sample", o.k_sample->c_str()));
  if (o.ndtw_min) check(srdf_config_set(c.get(), "ndtw_min", o.ndtw_min->c_str()));
  return c;
}

std::uint64_t seed_value(const Options& o) {
  if (!o.seed) return 0;
  try {
    return std::stoull(*o.seed);
  } catch (const std::exception&) {
    throw Failure{SRDF_ERR_INVALID_ARGUMENT, "bad --seed '" + *o.seed + "'"};
  }
}

void need(const std::string& value, const char* flag) {
  if (value.empty())
    throw Failure{SRDF_ERR_INVALID_ARGUMENT, std::string("missing required flag ") + flag};
}

EnvsPtr load_envs(const Options& o) {
  need(o.envs, "--envs");
  srdf_envs* e = nullptr;
  check(srdf_envs_load(o.envs.c_str(), &e));
  return EnvsPtr(e);
}

PoolPtr load_pool(const std::string& path, const char* flag) {
  need(path, flag);
  srdf_pool* p = nullptr;
  check(srdf_pool_load(path.c_str(), &p));
  return PoolPtr(p);
}

NavPtr load_navigator(const Options& o, bool required) {
  if (o.navigator.empty()) {
    if (required) need(o.navigator, "--navigator");
    return nullptr;
  }
  srdf_navigator* n = nullptr;
  check(srdf_navigator_load(o.navigator.c_str(), &n));
  return NavPtr(n);
}

GenPtr load_generator(const Options& o, bool required) {
  if (o.generator.empty()) {
    if (required) need(o.generator, "--generator");
    return nullptr;
  }
  srdf_generator* g = nullptr;
  check(srdf_generator_load(o.generator.c_str(), &g));
  return GenPtr(g);
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

void cmd_stage(const Options& o, srdf_status (*stage)(const srdf_config*, const char*)) {
  need(o.out, "--out");
  const ConfigPtr c = resolve_config(o);
  check(stage(c.get(), o.out.c_str()));
  std::printf("wrote %s\n", o.out.c_str());
}

void cmd_run(const Options& o) {
  need(o.out, "--out");
  const ConfigPtr c = resolve_config(o);
  check(srdf_run_flywheel(c.get(), o.threads, o.out.c_str(), log_line, nullptr));
  char* table = nullptr;
  check(srdf_report(o.out.c_str(), "markdown", &table));
  std::fputs(take_string(table).c_str(), stdout);
}

void cmd_score(const Options& o) {
  const PoolPtr pool = load_pool(o.pool, "--pool");
  const EnvsPtr envs = load_envs(o);
  const NavPtr nav = load_navigator(o, false);
  const GenPtr gen = load_generator(o, false);
  const std::size_t n = srdf_pool_size(pool.get());
  std::vector<double> scores(n);
  check(srdf_score(pool.get(), envs.get(), o.scorer.c_str(), nav.get(), gen.get(), seed_value(o),
                   o.threads, scores.data(), n));
  std::string text = "pair_id\t" + o.scorer + "\n";
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
    text += std::string(srdf_pool_pair_id(pool.get(), i)) + "\t" + buf + "\n";
  }
  if (o.out.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  const std::filesystem::path path = std::filesystem::path(o.out) / "scores.tsv";
  std::filesystem::create_directories(o.out);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Failure{SRDF_ERR_IO, "cannot write " + path.string()};
  std::fputs(text.c_str(), f);
  std::fclose(f);
  std::printf("wrote %s\n", path.c_str());
}

void cmd_filter(const Options& o) {
  need(o.out, "--out");
  const PoolPtr pool = load_pool(o.pool, "--pool");
  const EnvsPtr envs = load_envs(o);
  const std::string out = o.out + "/";
  if (o.top) {
    const NavPtr nav = load_navigator(o, false);
    const GenPtr gen = load_generator(o, false);
    srdf_pool* top = nullptr;
    check(srdf_select_top(pool.get(), envs.get(), o.scorer.c_str(), nav.get(), gen.get(), *o.top,
                          seed_value(o), o.threads, &top));
    const PoolPtr kept(top);
    check(srdf_pool_save(kept.get(), (out + "kept.jsonl").c_str()));
    std::printf("select=%s input=%zu kept=%zu\n", o.scorer.c_str(), srdf_pool_size(pool.get()),
                srdf_pool_size(kept.get()));
    return;
  }
  const NavPtr nav = load_navigator(o, true);
  double ndtw_min = 0.9;
  if (o.ndtw_min) {
    try {
      ndtw_min = std::stod(*o.ndtw_min);
    } catch (const std::exception&) {
      throw Failure{SRDF_ERR_INVALID_ARGUMENT, "bad --ndtw-min '" + *o.ndtw_min + "'"};
    }
  }
  srdf_pool *k = nullptr, *r = nullptr;
  char* summary = nullptr;
  check(srdf_filter(pool.get(), envs.get(), nav.get(), o.stage.c_str(), o.spl_exact, ndtw_min,
                    o.threads, &k, &r, &summary));
  const PoolPtr kept(k), rejected(r);
  const std::string line = take_string(summary);
  check(srdf_pool_save(kept.get(), (out + "kept.jsonl").c_str()));
  check(srdf_pool_save(rejected.get(), (out + "rejected.jsonl").c_str()));
  std::printf("%s\n", line.c_str());
}

void cmd_eval(const Options& o) {
  const PoolPtr pool = load_pool(o.pool, "--pool");
  const EnvsPtr envs = load_envs(o);
  const NavPtr nav = load_navigator(o, true);
  const GenPtr gen = load_generator(o, true);
  srdf_metrics m{};
  check(srdf_evaluate(nav.get(), gen.get(), envs.get(), pool.get(), o.threads, &m));
  std::printf(
      "NE=%.4f OSR=%.4f SR=%.4f SPL=%.4f nDTW=%.4f sDTW=%.4f prop_F1=%.4f prop_F1_dir=%.4f "
      "BLEU-1=%.4f BLEU-4=%.4f CIDEr=%.4f ROUGE-L=%.4f\n",
      m.ne, m.osr, m.sr, m.spl, m.ndtw, m.sdtw, m.prop_f1, m.prop_f1_dir, m.bleu1, m.bleu4,
      m.cider, m.rouge_l);
}

void cmd_stats(const Options& o) {
  const PoolPtr pool = load_pool(o.pool, "--pool");
  srdf_stats s{};
  check(srdf_pool_stats(pool.get(), &s));
  std::printf("num_instructions=%zu vocab=%zu mean_length=%.4f envs=%zu\n", s.num_instructions,
              s.vocab_size, s.mean_length, s.num_envs);
}

void cmd_report(const Options& o) {
  need(o.run_dir, "--run");
  char* text = nullptr;
  check(srdf_report(o.run_dir.c_str(), o.format.c_str(), &text));
  std::fputs(take_string(text).c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-refining data flywheel for a synthetic navigation world"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Config file or run manifest")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--rounds", o.rounds, "Flywheel rounds");
  app.add_option("--k-sample", o.k_sample, "Sampled instructions per trajectory");
  app.add_option("--ndtw-min", o.ndtw_min, "Navigator-data nDTW threshold");

  auto* worlds = app.add_subcommand("gen-worlds", "Write environment files per split");
  auto* seed = app.add_subcommand("make-seed", "Write the oracle-annotated seed and eval pools");
  auto* trajs = app.add_subcommand("sample-trajs", "Write the unlabeled trajectory pool");
  auto* run = app.add_subcommand("run-flywheel", "Run every round and write a run directory");
  auto* score = app.add_subcommand("score", "Score every pair of a pool");
  auto* filter = app.add_subcommand("filter", "Filter a pool, or select its top pairs");
  auto* eval = app.add_subcommand("eval", "Evaluate a navigator and generator pair");
  auto* stats = app.add_subcommand("stats", "Print dataset statistics of a pool");
  auto* report = app.add_subcommand("report", "Print the round table of a run directory");

  for (auto* sub : {score, filter, eval, stats})
    sub->add_option("--pool", o.pool, "Pool file")->check(CLI::ExistingFile);
  for (auto* sub : {score, filter, eval})
    sub->add_option("--envs", o.envs, "Environment file")->check(CLI::ExistingFile);
  for (auto* sub : {score, filter, eval})
    sub->add_option("--navigator", o.navigator, "Navigator model")->check(CLI::ExistingFile);
  for (auto* sub : {score, filter, eval})
    sub->add_option("--generator", o.generator, "Generator model")->check(CLI::ExistingFile);
  for (auto* sub : {score, filter})
    sub->add_option("--scorer", o.scorer, "navigator_ndtw|navigator_spl|random|"
                                          "embedding_cosine|generator_self");
  filter->add_option("--stage", o.stage, "generator (SPL) or navigator (nDTW)");
  filter->add_option("--spl-exact", o.spl_exact, "Generator-data SPL threshold");
  filter->add_option("--top", o.top, "Keep the top N pairs by --scorer instead");
  report->add_option("--run", o.run_dir, "Run directory")->check(CLI::ExistingDirectory);
  report->add_option("--format", o.format, "csv or markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*worlds) cmd_stage(o, srdf_stage_worlds);
    if (*seed) cmd_stage(o, srdf_stage_seed);
    if (*trajs) cmd_stage(o, srdf_stage_trajs);
    if (*run) cmd_run(o);
    if (*score) cmd_score(o);
    if (*filter) cmd_filter(o);
    if (*eval) cmd_eval(o);
    if (*stats) cmd_stats(o);
    if (*report) cmd_report(o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", srdf_status_name(f.status), f.message.c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
