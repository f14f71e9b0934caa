#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srdf/instr_lang.hpp"
#include "srdf/pairs.hpp"
#include "srdf/world.hpp"

namespace srdf {

enum NavFeature : int {
  kMoveLandmarkMatch,    // cursor move clause's landmark in the candidate's sector
  kMoveLandmarkOther,    // ... visible here, but in another sector
  kNextLandmarkMatch,    // the following move clause matches instead
  kTowardMatch,          // "walk toward X" and X is visible at the candidate
  kTurnDirectionMatch,
  kTurnBinMatch,
  kTurnOpposite,
  kStraightNoTurn,       // no pending turn and the candidate is straight ahead
  kNoTurnDelta,          // no pending turn, |delta| / 180
  kAbsDelta,
  kDistance,             // meters / 10
  kRevisit,
  kBacktrack,
  kStopBias,
  kStopExhausted,        // cursor sits on the final stop clause
  kStopLandmarkAhead,
  kStopLandmarkElsewhere,
  kStopRemaining,        // unconsumed non-stop clauses / 4
  kStopAtStart,
  kNumNavFeatures
};

using FeatureVector = std::array<double, kNumNavFeatures>;

const std::vector<std::string>& nav_feature_names();

// What the navigator remembers while following an instruction. The cursor
// points at the first clause not yet accounted for and never moves back.
struct InstrState {
  std::vector<Clause> clauses;
  std::size_t cursor = 0;
  std::size_t stalled = 0;  // steps since the cursor last moved
  std::size_t step = 0;
  std::vector<NodeId> visited;
  std::optional<NodeId> previous;

  explicit InstrState(std::vector<Clause> c) : clauses(std::move(c)) {}
  bool at_final_stop() const { return cursor + 1 >= clauses.size(); }
};

inline constexpr std::size_t kStallLimit = 3;

// `candidate` indexes obs.candidates; nullopt is the stop action.
FeatureVector extract_features(const InstrState& state, const Environment& env,
                               const Observation& obs,
                               std::optional<std::size_t> candidate);

// Moves the cursor after the agent went from obs.at_node to `chosen`.
void advance_cursor(InstrState& state, const Environment& env,
                    const Observation& obs, NodeId chosen);

struct NavigatorParams {
  std::vector<double> weights;
  std::vector<std::string> feature_names;
  int version = 0;

  static NavigatorParams fresh();
  void validate() const;
  // Hex SHA-256 of the weights' shortest round-trip text.
  std::string digest() const;
  friend bool operator==(const NavigatorParams&, const NavigatorParams&) = default;
};

struct NavTrainConfig {
  int pretrain_epochs = 150;
  int finetune_epochs = 20;
  double learning_rate = 2.0;
  double l2 = 1e-4;
};

struct TrainReport {
  std::vector<double> pretrain_loss;  // loss before each epoch, then final
  std::vector<double> finetune_loss;
};

// Teacher-forced cross-entropy of the demonstrated next-node choices.
double navigator_loss(const NavigatorParams& params, const EnvironmentSet& envs,
                      std::span<const PairedSample> pairs, double l2 = 0.0);

// Full-batch gradient descent: first on `pretrain`, then on `finetune`.
// Either pool may be empty (that stage is skipped). Steps that would raise
// the loss are halved until they do not.
NavigatorParams train_navigator(const EnvironmentSet& envs,
                                std::span<const PairedSample> pretrain,
                                std::span<const PairedSample> finetune,
                                const std::optional<NavigatorParams>& init,
                                const NavTrainConfig& hyper, std::uint64_t seed,
                                TrainReport* report = nullptr);

struct EpisodeResult {
  enum class Termination { stopped, max_steps };
  Trajectory followed;
  Termination terminated = Termination::stopped;
  std::vector<double> action_log_likelihoods;
};

inline constexpr int kDefaultMaxSteps = 15;

EpisodeResult follow(const NavigatorParams& params, const Environment& env,
                     const Instruction& instr, NodeId start,
                     double start_heading, int max_steps = kDefaultMaxSteps);

// Fraction of teacher decisions the greedy policy reproduces.
double teacher_agreement(const NavigatorParams& params, const EnvironmentSet& envs,
                         std::span<const PairedSample> pairs);

}  // namespace srdf
