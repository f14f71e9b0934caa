#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srdf/generator.hpp"
#include "srdf/navigator.hpp"
#include "srdf/scoring.hpp"

namespace srdf {

// Worlds, seed annotations, the unlabeled trajectory pool and the held-out
// evaluation pairs.
struct DataConfig {
  WorldSetConfig worlds;
  int seed_pairs = 1000;
  int traj_pool = 2000;
  HopRange hops{4, 7};
  CorruptionConfig corruption;
  int eval_trajs_per_world = 25;
  int eval_refs = 3;
  void validate() const;
};

struct FlywheelData {
  EnvironmentSet envs;
  Pool seed;                                            // D_Seed
  std::vector<std::shared_ptr<const Trajectory>> trajs;  // D_Traj
  Pool eval;  // val_unseen, eval_refs consecutive pairs per trajectory
};

// Seed and pool trajectories are disjoint paths from the train worlds.
FlywheelData prepare_data(const DataConfig& config, std::uint64_t seed);

// Throws Error(invalid_argument) if an eval environment feeds any training
// pool or an eval pair comes from outside val_unseen.
void check_split_hygiene(const FlywheelData& data);

struct FlywheelConfig {
  int rounds = 3;
  int k_sample = 6;
  DecodeConfig sample_decode = DecodeConfig::top_k(3, 0);
  DecodeConfig greedy_decode = DecodeConfig::greedy();
  FilterThresholds thresholds;
  NavTrainConfig nav_train;
  GenTrainConfig gen_train;
  EncodingFormat encoding = EncodingFormat::interleaved;
  int landmark_vocab = 40;
  std::uint64_t master_seed = 0;
  int threads = 1;
  // Also report navigator and generator trained on D_Seed alone.
  bool baseline = true;
  // After the last round, fine-tune G_T on FD^G_{T+1} and report it.
  bool finetune_generator_final = false;
  void validate() const;
};

struct RoundState {
  int t = 0;
  GeneratorParams G;
  NavigatorParams N;
  Pool D_N_t;
  Pool ND_N_t;
  Pool FND_N_t;
  Pool LD_N_next;
  Pool FD_N_below_next;
  Pool D_G_next;
  Pool FD_G_next;

  // Pools by their symbolic names, in a fixed order.
  std::vector<std::pair<std::string, const Pool*>> pools() const;
};

struct RoundMetrics {
  double ne = 0.0;
  double osr = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
  double prop_f1 = 0.0;
  double prop_f1_dir = 0.0;
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double cider = 0.0;
  double rouge_l = 0.0;
  friend bool operator==(const RoundMetrics&, const RoundMetrics&) = default;
};

struct RoundReport {
  std::string label;  // "baseline", "1", "2", ..., "3+ft"
  int round = 0;
  RoundMetrics metrics;
  std::vector<std::pair<std::string, std::size_t>> pool_sizes;
  std::vector<FilterSummary> filters;
  double wall_seconds = 0.0;  // not part of any deterministic output
};

using FollowFn = std::function<Trajectory(const Environment&, const PairedSample&)>;
using GenerateFn = std::function<Instruction(const Environment&, const Trajectory&)>;

RoundMetrics evaluate_round(const FollowFn& follower, const GenerateFn& generator,
                            const EnvironmentSet& envs, const Pool& eval_pairs,
                            int threads = 1);
RoundMetrics evaluate_round(const NavigatorParams& N, const GeneratorParams& G,
                            const EnvironmentSet& envs, const Pool& eval_pairs,
                            int threads = 1);

// Per-round seed: master_seed xor t.
std::uint64_t round_seed(std::uint64_t master_seed, int t);

// Bootstrap when prev is empty, otherwise one iteration after prev.
// Throws Error(empty_filter) when FD^G_t is empty.
std::pair<RoundState, RoundReport> run_round(const FlywheelData& data,
                                             const std::optional<RoundState>& prev,
                                             const FlywheelConfig& config);

struct FlywheelResult {
  RoundState final_state;
  std::optional<RoundReport> baseline;
  std::vector<RoundReport> rounds;
  std::optional<RoundReport> finetuned;
  std::optional<GeneratorParams> finetuned_generator;
};

using RoundCallback = std::function<void(const RoundState&, const RoundReport&)>;

FlywheelResult run_flywheel(const FlywheelData& data, const FlywheelConfig& config,
                            const RoundCallback& on_round = {});

}  // namespace srdf
