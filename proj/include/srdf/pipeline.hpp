#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "srdf/datastore.hpp"

namespace srdf {

using LogFn = std::function<void(const std::string&)>;

// Stage commands. Each one derives everything from the config (master_seed
// included), writes into `dir` and records its files in dir/manifest.json.
// A manifest written under a different config is replaced.
void write_worlds_stage(const RunConfig& config, const std::filesystem::path& dir);
void write_seed_stage(const RunConfig& config, const std::filesystem::path& dir);
void write_trajs_stage(const RunConfig& config, const std::filesystem::path& dir);

// Full run. Layout under dir:
//   config.txt, manifest.json, reports.jsonl, report.csv, report.md, timings.txt
//   data/{envs,seed,trajs,eval}.jsonl
//   round<t>/{N,G}.json and one .jsonl per pool of RoundState::pools()
//   final/G_ft.json when the generator post-pass is on
// Everything but timings.txt is a pure function of the config.
RunManifest run_to_directory(const RunConfig& config, int threads,
                             const std::filesystem::path& dir, const LogFn& log = {});

// Config text, or the config embedded in a manifest.
RunConfig load_run_config(const std::filesystem::path& path);

// Reads dir/reports.jsonl.
std::vector<RoundReport> load_reports(const std::filesystem::path& run_dir);

}  // namespace srdf
