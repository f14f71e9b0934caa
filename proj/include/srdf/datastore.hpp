#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "srdf/flywheel.hpp"

namespace srdf {

// Schema identifiers written in each file's header line.
inline constexpr std::string_view kPoolSchema = "srdf.pool/1";
inline constexpr std::string_view kEnvSchema = "srdf.envs/1";
inline constexpr std::string_view kTrajSchema = "srdf.trajs/1";
inline constexpr std::string_view kNavigatorSchema = "srdf.navigator/1";
inline constexpr std::string_view kGeneratorSchema = "srdf.generator/1";
inline constexpr std::string_view kManifestSchema = "srdf.manifest/1";
inline constexpr std::string_view kReportsSchema = "srdf.reports/1";

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories. Throws Error(io).
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Pools: a header line, then one pair per line with fields in the order
// pair_id, env_id, traj, instr, provenance, scores. Parse errors throw
// Error(schema_violation) naming `source` and the 1-based line.
std::string pool_to_jsonl(const Pool& pool);
Pool pool_from_jsonl(std::string_view text, const std::string& source = "<pool>");
void save_pool(const std::filesystem::path& path, const Pool& pool);
Pool load_pool(const std::filesystem::path& path);

std::string envs_to_jsonl(const EnvironmentSet& envs);
EnvironmentSet envs_from_jsonl(std::string_view text, const std::string& source = "<envs>");
void save_envs(const std::filesystem::path& path, const EnvironmentSet& envs);
EnvironmentSet load_envs(const std::filesystem::path& path);

std::string trajs_to_jsonl(const std::vector<std::shared_ptr<const Trajectory>>& trajs);
std::vector<std::shared_ptr<const Trajectory>> trajs_from_jsonl(
    std::string_view text, const std::string& source = "<trajs>");

std::string navigator_to_text(const NavigatorParams& params);
NavigatorParams navigator_from_text(std::string_view text,
                                    const std::string& source = "<navigator>");
std::string generator_to_text(const GeneratorParams& params);
GeneratorParams generator_from_text(std::string_view text,
                                    const std::string& source = "<generator>");

DatasetStats dataset_stats(const Pool& pool);

// Round reports without wall-clock time, so a rerun gives the same bytes.
std::string reports_to_jsonl(const std::vector<RoundReport>& reports);
std::vector<RoundReport> reports_from_jsonl(std::string_view text,
                                            const std::string& source = "<reports>");

enum class ReportFormat { csv, markdown };

// One row per report in the given order (baseline first when present).
// Wall-clock time is left out so equal runs give equal bytes.
std::string emit_report(const std::vector<RoundReport>& reports, ReportFormat format);

// Everything the pipeline needs besides the thread count, which never
// changes outputs.
struct RunConfig {
  DataConfig data;
  FlywheelConfig flywheel;

  // Flat "key = value" lines; '#' starts a comment. Unknown keys and bad
  // values throw Error(invalid_argument) naming the line.
  static RunConfig parse(std::string_view text, const std::string& source = "<config>");
  void set(const std::string& key, const std::string& value);
  // Every key, fully resolved, in a fixed order.
  std::string to_text() const;
  void validate() const;
};

struct ManifestEntry {
  std::string role;  // e.g. "round2/FD_G_next"
  std::string path;  // relative to the run directory
  std::string sha256;
};

struct RunManifest {
  std::string run_id;
  std::string config;  // RunConfig::to_text()
  std::vector<ManifestEntry> artifacts;

  std::string to_text() const;
  static RunManifest parse(std::string_view text, const std::string& source = "<manifest>");
};

// Hashes the file at run_dir/path and appends it.
void add_artifact(RunManifest& manifest, const std::filesystem::path& run_dir,
                  const std::string& role, const std::string& path);

// Throws Error(io) naming the first missing or altered file.
void verify_manifest(const RunManifest& manifest, const std::filesystem::path& run_dir);

}  // namespace srdf
