#include "srdf/srdf.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <set>

#include "srdf/pipeline.hpp"

struct srdf_config {
  srdf::RunConfig value;
};
struct srdf_envs {
  srdf::EnvironmentSet value;
};
struct srdf_pool {
  srdf::Pool value;
};
struct srdf_navigator {
  srdf::NavigatorParams value;
};
struct srdf_generator {
  srdf::GeneratorParams value;
};

namespace {

thread_local std::string last_error;

srdf_status status_of(srdf::ErrorCode code) {
  using srdf::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SRDF_ERR_INVALID_ARGUMENT;
    case ErrorCode::unparseable_instruction: return SRDF_ERR_UNPARSEABLE_INSTRUCTION;
    case ErrorCode::unknown_node: return SRDF_ERR_UNKNOWN_NODE;
    case ErrorCode::invalid_trajectory: return SRDF_ERR_INVALID_TRAJECTORY;
    case ErrorCode::mismatched_environment: return SRDF_ERR_MISMATCHED_ENVIRONMENT;
    case ErrorCode::schema_violation: return SRDF_ERR_SCHEMA_VIOLATION;
    case ErrorCode::io: return SRDF_ERR_IO;
    case ErrorCode::non_finite_loss: return SRDF_ERR_NON_FINITE_LOSS;
    case ErrorCode::missing_model: return SRDF_ERR_MISSING_MODEL;
    case ErrorCode::empty_filter: return SRDF_ERR_EMPTY_FILTER;
    case ErrorCode::empty_input: return SRDF_ERR_EMPTY_INPUT;
    case ErrorCode::invariant_violation: return SRDF_ERR_INVARIANT_VIOLATION;
  }
  return SRDF_ERR_INTERNAL;
}

srdf_status fail(srdf_status status, const std::string& message) {
  last_error = message;
  // Keep messages on one line.
  for (char& c : last_error)
    if (c == '\n' || c == '\r') c = ' ';
  return status;
}

// Runs fn, turning exceptions into status codes.
template <typename Fn>
srdf_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return SRDF_OK;
  } catch (const srdf::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SRDF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SRDF_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw srdf::Error(srdf::ErrorCode::invalid_argument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

srdf::ScoringModels models_of(const srdf_navigator* n, const srdf_generator* g) {
  return {n ? &n->value : nullptr, g ? &g->value : nullptr};
}

}  // namespace

extern "C" {

const char* srdf_status_name(srdf_status status) {
  switch (status) {
    case SRDF_OK: return "ok";
    case SRDF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SRDF_ERR_UNPARSEABLE_INSTRUCTION: return "unparseable_instruction";
    case SRDF_ERR_UNKNOWN_NODE: return "unknown_node";
    case SRDF_ERR_INVALID_TRAJECTORY: return "invalid_trajectory";
    case SRDF_ERR_MISMATCHED_ENVIRONMENT: return "mismatched_environment";
    case SRDF_ERR_SCHEMA_VIOLATION: return "schema_violation";
    case SRDF_ERR_IO: return "io";
    case SRDF_ERR_NON_FINITE_LOSS: return "non_finite_loss";
    case SRDF_ERR_MISSING_MODEL: return "missing_model";
    case SRDF_ERR_EMPTY_FILTER: return "empty_filter";
    case SRDF_ERR_EMPTY_INPUT: return "empty_input";
    case SRDF_ERR_INVARIANT_VIOLATION: return "invariant_violation";
    case SRDF_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* srdf_last_error(void) { return last_error.c_str(); }

void srdf_string_free(char* s) { std::free(s); }

srdf_status srdf_config_new(srdf_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new srdf_config{};
  });
}

srdf_status srdf_config_load(const char* path, srdf_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new srdf_config{srdf::load_run_config(path)};
  });
}

srdf_status srdf_config_set(srdf_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->value.set(key, value);
  });
}

srdf_status srdf_config_text(const srdf_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = dup_string(config->value.to_text());
  });
}

void srdf_config_free(srdf_config* config) { delete config; }

srdf_status srdf_stage_worlds(const srdf_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    srdf::write_worlds_stage(config->value, out_dir);
  });
}

srdf_status srdf_stage_seed(const srdf_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    srdf::write_seed_stage(config->value, out_dir);
  });
}

srdf_status srdf_stage_trajs(const srdf_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    srdf::write_trajs_stage(config->value, out_dir);
  });
}

srdf_status srdf_run_flywheel(const srdf_config* config, int threads, const char* out_dir,
                              srdf_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    if (threads < 1) throw srdf::Error(srdf::ErrorCode::invalid_argument, "threads must be >= 1");
    srdf::LogFn fn;
    if (log) fn = [&](const std::string& line) { log(line.c_str(), user); };
    srdf::run_to_directory(config->value, threads, out_dir, fn);
  });
}

srdf_status srdf_envs_load(const char* path, srdf_envs** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new srdf_envs{srdf::load_envs(path)};
  });
}

void srdf_envs_free(srdf_envs* envs) { delete envs; }

srdf_status srdf_pool_load(const char* path, srdf_pool** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new srdf_pool{srdf::load_pool(path)};
  });
}

srdf_status srdf_pool_save(const srdf_pool* pool, const char* path) {
  return guarded([&] {
    require(pool, "pool");
    require(path, "path");
    srdf::save_pool(path, pool->value);
  });
}

size_t srdf_pool_size(const srdf_pool* pool) { return pool ? pool->value.size() : 0; }

const char* srdf_pool_pair_id(const srdf_pool* pool, size_t index) {
  if (!pool || index >= pool->value.size()) return nullptr;
  return pool->value[index].pair_id.c_str();
}

srdf_status srdf_pool_stats(const srdf_pool* pool, srdf_stats* out) {
  return guarded([&] {
    require(pool, "pool");
    require(out, "out");
    const srdf::DatasetStats s = srdf::dataset_stats(pool->value);
    *out = {s.num_instructions, s.vocab_size, s.mean_length, s.num_envs};
  });
}

void srdf_pool_free(srdf_pool* pool) { delete pool; }

srdf_status srdf_navigator_load(const char* path, srdf_navigator** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new srdf_navigator{srdf::navigator_from_text(srdf::read_text_file(path), path)};
  });
}

void srdf_navigator_free(srdf_navigator* navigator) { delete navigator; }

srdf_status srdf_generator_load(const char* path, srdf_generator** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new srdf_generator{srdf::generator_from_text(srdf::read_text_file(path), path)};
  });
}

void srdf_generator_free(srdf_generator* generator) { delete generator; }

srdf_status srdf_score(const srdf_pool* pool, const srdf_envs* envs, const char* scorer,
                       const srdf_navigator* navigator, const srdf_generator* generator,
                       uint64_t seed, int threads, double* scores, size_t n) {
  return guarded([&] {
    require(pool, "pool");
    require(envs, "envs");
    require(scorer, "scorer");
    if (n != pool->value.size())
      throw srdf::Error(srdf::ErrorCode::invalid_argument, "score buffer size != pool size");
    if (n) require(scores, "scores");
    const std::vector<double> s =
        srdf::score_all(pool->value, srdf::parse_scorer(scorer),
                        models_of(navigator, generator), envs->value, seed, threads);
    std::copy(s.begin(), s.end(), scores);
  });
}

srdf_status srdf_filter(const srdf_pool* pool, const srdf_envs* envs,
                        const srdf_navigator* navigator, const char* stage, double spl_exact,
                        double ndtw_min, int threads, srdf_pool** kept, srdf_pool** rejected,
                        char** summary) {
  return guarded([&] {
    require(pool, "pool");
    require(envs, "envs");
    require(navigator, "navigator");
    require(stage, "stage");
    require(kept, "kept");
    const std::string which = stage;
    srdf::FilterSummary info;
    srdf::Pool keep, drop;
    srdf::FilterThresholds th;
    th.spl_exact = spl_exact;
    th.ndtw_min = ndtw_min;
    if (which == "generator") {
      keep = srdf::filter_generator_data(pool->value, navigator->value, envs->value, th,
                                         threads, &info);
      std::set<std::string> ids;
      for (const auto& p : keep) ids.insert(p.pair_id);
      for (const auto& p : pool->value)
        if (!ids.count(p.pair_id)) drop.push_back(p);
    } else if (which == "navigator") {
      srdf::NavPartition part = srdf::filter_navigator_data(
          pool->value, navigator->value, envs->value, th, threads, &info);
      keep = std::move(part.kept);
      drop = std::move(part.rejected);
    } else {
      throw srdf::Error(srdf::ErrorCode::invalid_argument,
                        "unknown filter stage '" + which + "' (generator|navigator)");
    }
    std::string text = info.to_string();
    auto* k = new srdf_pool{std::move(keep)};
    srdf_pool* r = nullptr;
    char* s = nullptr;
    try {
      if (rejected) r = new srdf_pool{std::move(drop)};
      if (summary) s = dup_string(text);
    } catch (...) {
      delete k;
      delete r;
      throw;
    }
    *kept = k;
    if (rejected) *rejected = r;
    if (summary) *summary = s;
  });
}

srdf_status srdf_select_top(const srdf_pool* pool, const srdf_envs* envs, const char* scorer,
                            const srdf_navigator* navigator, const srdf_generator* generator,
                            size_t q, uint64_t seed, int threads, srdf_pool** out) {
  return guarded([&] {
    require(pool, "pool");
    require(envs, "envs");
    require(scorer, "scorer");
    require(out, "out");
    *out = new srdf_pool{srdf::rank_and_take_top(pool->value, srdf::parse_scorer(scorer),
                                                 models_of(navigator, generator), envs->value,
                                                 q, seed, threads)};
  });
}

srdf_status srdf_evaluate(const srdf_navigator* navigator, const srdf_generator* generator,
                          const srdf_envs* envs, const srdf_pool* eval, int threads,
                          srdf_metrics* out) {
  return guarded([&] {
    require(navigator, "navigator");
    require(generator, "generator");
    require(envs, "envs");
    require(eval, "eval");
    require(out, "out");
    const srdf::RoundMetrics m = srdf::evaluate_round(navigator->value, generator->value,
                                                      envs->value, eval->value, threads);
    *out = {m.ne,      m.osr,         m.sr,    m.spl,   m.ndtw,  m.sdtw,
            m.prop_f1, m.prop_f1_dir, m.bleu1, m.bleu4, m.cider, m.rouge_l};
  });
}

srdf_status srdf_report(const char* run_dir, const char* format, char** out) {
  return guarded([&] {
    require(run_dir, "run_dir");
    require(format, "format");
    require(out, "out");
    const std::string f = format;
    srdf::ReportFormat rf;
    if (f == "csv")
      rf = srdf::ReportFormat::csv;
    else if (f == "markdown" || f == "md")
      rf = srdf::ReportFormat::markdown;
    else
      throw srdf::Error(srdf::ErrorCode::invalid_argument, "unknown report format '" + f + "'");
    *out = dup_string(srdf::emit_report(srdf::load_reports(run_dir), rf));
  });
}

}  // extern "C"
