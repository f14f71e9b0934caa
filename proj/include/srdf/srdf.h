/* C interface to the flywheel library. Every call returns an srdf_status;
 * on failure srdf_last_error() holds a one-line message for this thread.
 * Objects are opaque and released with their matching *_free function.
 * Strings returned through char** are released with srdf_string_free. */
#ifndef SRDF_SRDF_H
#define SRDF_SRDF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#pragma GCC visibility push(default)

typedef enum srdf_status {
  SRDF_OK = 0,
  SRDF_ERR_INVALID_ARGUMENT = 1,
  SRDF_ERR_UNPARSEABLE_INSTRUCTION = 2,
  SRDF_ERR_UNKNOWN_NODE = 3,
  SRDF_ERR_INVALID_TRAJECTORY = 4,
  SRDF_ERR_MISMATCHED_ENVIRONMENT = 5,
  SRDF_ERR_SCHEMA_VIOLATION = 6,
  SRDF_ERR_IO = 7,
  SRDF_ERR_NON_FINITE_LOSS = 8,
  SRDF_ERR_MISSING_MODEL = 9,
  SRDF_ERR_EMPTY_FILTER = 10,
  SRDF_ERR_EMPTY_INPUT = 11,
  SRDF_ERR_INVARIANT_VIOLATION = 12,
  SRDF_ERR_INTERNAL = 99
} srdf_status;

typedef struct srdf_config srdf_config;
typedef struct srdf_envs srdf_envs;
typedef struct srdf_pool srdf_pool;
typedef struct srdf_navigator srdf_navigator;
typedef struct srdf_generator srdf_generator;

typedef void (*srdf_log_fn)(const char* line, void* user);

typedef struct srdf_metrics {
  double ne, osr, sr, spl, ndtw, sdtw;
  double prop_f1, prop_f1_dir, bleu1, bleu4, cider, rouge_l;
} srdf_metrics;

typedef struct srdf_stats {
  size_t num_instructions;
  size_t vocab_size;
  double mean_length;
  size_t num_envs;
} srdf_stats;

/* Snake-case code name, e.g. "schema_violation". */
const char* srdf_status_name(srdf_status status);
const char* srdf_last_error(void);
void srdf_string_free(char* s);

/* Defaults, then a config file or a run manifest. */
srdf_status srdf_config_new(srdf_config** out);
srdf_status srdf_config_load(const char* path, srdf_config** out);
srdf_status srdf_config_set(srdf_config* config, const char* key, const char* value);
srdf_status srdf_config_text(const srdf_config* config, char** out);
void srdf_config_free(srdf_config* config);

/* Pipeline stages. Outputs go under out_dir with a manifest.json. */
srdf_status srdf_stage_worlds(const srdf_config* config, const char* out_dir);
srdf_status srdf_stage_seed(const srdf_config* config, const char* out_dir);
srdf_status srdf_stage_trajs(const srdf_config* config, const char* out_dir);
srdf_status srdf_run_flywheel(const srdf_config* config, int threads, const char* out_dir,
                              srdf_log_fn log, void* user);

srdf_status srdf_envs_load(const char* path, srdf_envs** out);
void srdf_envs_free(srdf_envs* envs);

srdf_status srdf_pool_load(const char* path, srdf_pool** out);
srdf_status srdf_pool_save(const srdf_pool* pool, const char* path);
size_t srdf_pool_size(const srdf_pool* pool);
/* Borrowed; valid while the pool lives. NULL when out of range. */
const char* srdf_pool_pair_id(const srdf_pool* pool, size_t index);
srdf_status srdf_pool_stats(const srdf_pool* pool, srdf_stats* out);
void srdf_pool_free(srdf_pool* pool);

srdf_status srdf_navigator_load(const char* path, srdf_navigator** out);
void srdf_navigator_free(srdf_navigator* navigator);
srdf_status srdf_generator_load(const char* path, srdf_generator** out);
void srdf_generator_free(srdf_generator* generator);

/* One score per pair into scores[0..n), n == srdf_pool_size(pool).
 * scorer: navigator_ndtw, navigator_spl, random, embedding_cosine,
 * generator_self. Models the scorer does not use may be NULL. */
srdf_status srdf_score(const srdf_pool* pool, const srdf_envs* envs, const char* scorer,
                       const srdf_navigator* navigator, const srdf_generator* generator,
                       uint64_t seed, int threads, double* scores, size_t n);

/* stage "generator" keeps SPL >= spl_exact; "navigator" keeps nDTW >= ndtw_min.
 * rejected and summary may be NULL. */
srdf_status srdf_filter(const srdf_pool* pool, const srdf_envs* envs,
                        const srdf_navigator* navigator, const char* stage, double spl_exact,
                        double ndtw_min, int threads, srdf_pool** kept, srdf_pool** rejected,
                        char** summary);

/* Top q pairs by descending score, ties by pair id. */
srdf_status srdf_select_top(const srdf_pool* pool, const srdf_envs* envs, const char* scorer,
                            const srdf_navigator* navigator, const srdf_generator* generator,
                            size_t q, uint64_t seed, int threads, srdf_pool** out);

srdf_status srdf_evaluate(const srdf_navigator* navigator, const srdf_generator* generator,
                          const srdf_envs* envs, const srdf_pool* eval, int threads,
                          srdf_metrics* out);

/* Table from run_dir/reports.jsonl; format "csv" or "markdown". */
srdf_status srdf_report(const char* run_dir, const char* format, char** out);

#pragma GCC visibility pop

#ifdef __cplusplus
}
#endif

#endif
