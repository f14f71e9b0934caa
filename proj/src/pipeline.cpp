#include "srdf/pipeline.hpp"

#include <chrono>
#include <cstdio>

namespace srdf {

namespace fs = std::filesystem;

namespace {

std::string run_id_for(const std::string& config_text) {
  return sha256_hex(config_text).substr(0, 16);
}

// Adds (role, path) artifacts to dir/manifest.json, keeping entries from
// earlier stages run under the same config.
void update_manifest(const fs::path& dir, const RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& files) {
  const std::string text = config.to_text();
  RunManifest m;
  const fs::path path = dir / "manifest.json";
  if (fs::exists(path)) {
    RunManifest old = RunManifest::parse(read_text_file(path), path.string());
    if (old.config == text) m = std::move(old);
  }
  m.run_id = run_id_for(text);
  m.config = text;
  for (const auto& [role, file] : files) {
    std::erase_if(m.artifacts, [&](const ManifestEntry& e) { return e.role == role; });
    add_artifact(m, dir, role, file);
  }
  write_text_file(path, m.to_text());
}

EnvironmentSet envs_of_split(const EnvironmentSet& envs, Split split) {
  EnvironmentSet out;
  for (const auto* env : envs.by_split(split)) out.add(*env);
  return out;
}

FlywheelData prepare(const RunConfig& config) {
  config.validate();
  return prepare_data(config.data, config.flywheel.master_seed);
}

}  // namespace

void write_worlds_stage(const RunConfig& config, const fs::path& dir) {
  const FlywheelData data = prepare(config);
  std::vector<std::pair<std::string, std::string>> files;
  for (Split split : {Split::train, Split::val_seen, Split::val_unseen}) {
    const EnvironmentSet part = envs_of_split(data.envs, split);
    if (part.size() == 0) continue;
    const std::string file = "envs_" + std::string(split_name(split)) + ".jsonl";
    save_envs(dir / file, part);
    files.emplace_back("envs/" + std::string(split_name(split)), file);
  }
  save_envs(dir / "envs.jsonl", data.envs);
  files.emplace_back("envs", "envs.jsonl");
  update_manifest(dir, config, files);
}

void write_seed_stage(const RunConfig& config, const fs::path& dir) {
  const FlywheelData data = prepare(config);
  save_pool(dir / "seed.jsonl", data.seed);
  save_pool(dir / "eval.jsonl", data.eval);
  save_envs(dir / "envs.jsonl", data.envs);
  update_manifest(dir, config,
                  {{"D_Seed", "seed.jsonl"}, {"eval", "eval.jsonl"}, {"envs", "envs.jsonl"}});
}

void write_trajs_stage(const RunConfig& config, const fs::path& dir) {
  const FlywheelData data = prepare(config);
  write_text_file(dir / "trajs.jsonl", trajs_to_jsonl(data.trajs));
  save_envs(dir / "envs.jsonl", data.envs);
  update_manifest(dir, config, {{"D_Traj", "trajs.jsonl"}, {"envs", "envs.jsonl"}});
}

RunManifest run_to_directory(const RunConfig& config, int threads, const fs::path& dir,
                             const LogFn& log) {
  config.validate();
  const auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  const std::string config_text = config.to_text();
  RunManifest manifest;
  manifest.run_id = run_id_for(config_text);
  manifest.config = config_text;
  std::vector<std::pair<std::string, std::string>> files;
  const auto put = [&](const std::string& role, const std::string& file,
                       const std::string& text) {
    write_text_file(dir / file, text);
    files.emplace_back(role, file);
  };

  const auto t0 = std::chrono::steady_clock::now();
  const FlywheelData data = prepare_data(config.data, config.flywheel.master_seed);
  const double prep_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  say("data: seed=" + std::to_string(data.seed.size()) +
      " trajs=" + std::to_string(data.trajs.size()) + " eval=" + std::to_string(data.eval.size()));
  put("envs", "data/envs.jsonl", envs_to_jsonl(data.envs));
  put("D_Seed", "data/seed.jsonl", pool_to_jsonl(data.seed));
  put("D_Traj", "data/trajs.jsonl", trajs_to_jsonl(data.trajs));
  put("eval", "data/eval.jsonl", pool_to_jsonl(data.eval));

  FlywheelConfig fc = config.flywheel;
  fc.threads = threads;
  const FlywheelResult result =
      run_flywheel(data, fc, [&](const RoundState& s, const RoundReport& r) {
        const std::string round = "round" + std::to_string(s.t);
        put(round + "/N", round + "/N.json", navigator_to_text(s.N));
        put(round + "/G", round + "/G.json", generator_to_text(s.G));
        for (const auto& [name, pool] : s.pools())
          put(round + "/" + name, round + "/" + name + ".jsonl", pool_to_jsonl(*pool));
        std::string line = "round " + std::to_string(s.t) + ":";
        for (const auto& f : r.filters) line += " " + f.to_string();
        say(line);
        say("round " + std::to_string(s.t) + ": SR=" + format_double(r.metrics.sr) +
            " prop_f1=" + format_double(r.metrics.prop_f1));
      });
  if (result.finetuned_generator)
    put("final/G_ft", "final/G_ft.json", generator_to_text(*result.finetuned_generator));

  std::vector<RoundReport> reports;
  if (result.baseline) reports.push_back(*result.baseline);
  reports.insert(reports.end(), result.rounds.begin(), result.rounds.end());
  if (result.finetuned) reports.push_back(*result.finetuned);
  put("reports", "reports.jsonl", reports_to_jsonl(reports));
  put("report/csv", "report.csv", emit_report(reports, ReportFormat::csv));
  put("report/markdown", "report.md", emit_report(reports, ReportFormat::markdown));
  put("config", "config.txt", config_text);

  std::string timings = "stage seconds\ndata " + format_double(prep_seconds) + "\n";
  for (const auto& r : reports) timings += r.label + " " + format_double(r.wall_seconds) + "\n";
  write_text_file(dir / "timings.txt", timings);

  for (const auto& [role, file] : files) add_artifact(manifest, dir, role, file);
  write_text_file(dir / "manifest.json", manifest.to_text());
  return manifest;
}

RunConfig load_run_config(const fs::path& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return RunConfig::parse(RunManifest::parse(text, path.string()).config, path.string());
  return RunConfig::parse(text, path.string());
}

std::vector<RoundReport> load_reports(const fs::path& run_dir) {
  const fs::path path = run_dir / "reports.jsonl";
  return reports_from_jsonl(read_text_file(path), path.string());
}

}  // namespace srdf
