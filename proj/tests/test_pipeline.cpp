#include <gtest/gtest.h>

#include "srdf/pipeline.hpp"

using namespace srdf;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  return RunConfig::parse(
      "train_worlds = 3\n"
      "val_unseen_worlds = 1\n"
      "seed_pairs = 30\n"
      "traj_pool = 40\n"
      "eval_trajs_per_world = 5\n"
      "nav_pretrain_epochs = 20\n"
      "nav_finetune_epochs = 5\n"
      "master_seed = 7\n");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("srdf_pipeline_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(RunToDirectory, OneRoundMatchesBootstrap) {
  RunConfig c = small_config();
  c.set("rounds", "1");
  const fs::path dir = fresh_dir("one");
  const RunManifest m = run_to_directory(c, 1, dir);
  EXPECT_NO_THROW(verify_manifest(m, dir));

  const FlywheelData data = prepare_data(c.data, c.flywheel.master_seed);
  const auto [state, report] = run_round(data, std::nullopt, c.flywheel);
  for (const auto& [name, pool] : state.pools())
    EXPECT_EQ(load_pool(dir / "round1" / (name + ".jsonl")), *pool) << name;
  EXPECT_EQ(navigator_from_text(read_text_file(dir / "round1/N.json")), state.N);
  EXPECT_EQ(generator_from_text(read_text_file(dir / "round1/G.json")), state.G);
  const auto reports = load_reports(dir);
  ASSERT_EQ(reports.size(), 2u);  // baseline + round 1
  EXPECT_EQ(reports[1].metrics, report.metrics);
  fs::remove_all(dir);
}

TEST(RunToDirectory, ManifestReproducesRun) {
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  const RunManifest ma = run_to_directory(small_config(), 1, a);
  const RunConfig again = load_run_config(a / "manifest.json");
  const RunManifest mb = run_to_directory(again, 3, b);
  EXPECT_EQ(ma.to_text(), mb.to_text());
  EXPECT_EQ(read_text_file(a / "report.md"), read_text_file(b / "report.md"));
  EXPECT_TRUE(fs::exists(b / "timings.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Stages, ShareOneManifest) {
  const fs::path dir = fresh_dir("stages");
  const RunConfig c = small_config();
  write_worlds_stage(c, dir);
  write_seed_stage(c, dir);
  write_trajs_stage(c, dir);
  const RunManifest m = RunManifest::parse(read_text_file(dir / "manifest.json"));
  EXPECT_EQ(m.config, c.to_text());
  std::vector<std::string> roles;
  for (const auto& e : m.artifacts) roles.push_back(e.role);
  EXPECT_EQ(roles, (std::vector<std::string>{"envs/train", "envs/val_unseen", "D_Seed", "eval",
                                             "D_Traj", "envs"}));
  EXPECT_NO_THROW(verify_manifest(m, dir));
  EXPECT_EQ(load_pool(dir / "seed.jsonl").size(), 30u);
  EXPECT_EQ(load_envs(dir / "envs_val_unseen.jsonl").size(), 1u);

  // A different config starts a new manifest.
  RunConfig other = c;
  other.set("master_seed", "8");
  write_trajs_stage(other, dir);
  const RunManifest m2 = RunManifest::parse(read_text_file(dir / "manifest.json"));
  EXPECT_EQ(m2.artifacts.size(), 2u);
  fs::remove_all(dir);
}

TEST(LoadRunConfig, ReadsTextAndManifest) {
  const fs::path dir = fresh_dir("cfg");
  write_text_file(dir / "run.cfg", "rounds = 2\n");
  EXPECT_EQ(load_run_config(dir / "run.cfg").flywheel.rounds, 2);
  RunManifest m;
  m.config = "k_sample = 4\n";
  write_text_file(dir / "manifest.json", m.to_text());
  EXPECT_EQ(load_run_config(dir / "manifest.json").flywheel.k_sample, 4);
  EXPECT_THROW(load_run_config(dir / "missing.cfg"), Error);
  fs::remove_all(dir);
}
