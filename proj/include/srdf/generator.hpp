#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srdf/instr_lang.hpp"
#include "srdf/pairs.hpp"
#include "srdf/world.hpp"

namespace srdf {

// ---------------------------------------------------------------------------
// Clause alignment
// ---------------------------------------------------------------------------

struct Alignment {
  std::vector<std::size_t> clause_step;               // per clause
  std::vector<std::vector<std::size_t>> step_clauses;  // per trajectory node
  int cost = 0;
};

// Cost of putting `clause` on step `step` (the last step is the stop step).
// Large for impossible placements.
int clause_cost(const Clause& clause, const Environment& env,
                const Trajectory& traj, std::size_t step);
// Extra cost for `clause` following `prev` on the same step: a move after a
// move, or a turn after anything but a stop.
int order_penalty(const Clause& prev, const Clause& clause);

inline constexpr int kImpossible = 1000;

// Monotone clause-to-step assignment of minimum total cost; among optimal
// assignments the one with the lexicographically smallest step sequence.
Alignment align_clauses(const std::vector<Clause>& clauses, const Environment& env,
                        const Trajectory& traj);
Alignment align_clauses(const Instruction& instr, const Environment& env,
                        const Trajectory& traj);

// ---------------------------------------------------------------------------
// Encoded steps, as the generator sees them
// ---------------------------------------------------------------------------

struct StepView {
  SectorLandmarks visible;
  std::optional<std::string> action;  // action token; absent for the last view
                                      // and for observation-only encodings
};

// Splits an encode_trajectory token stream back into per-node views.
std::vector<StepView> read_encoding(const std::vector<std::string>& tokens);

// "F", "T:left:plain", ..., "?" when the action is not encoded, "END" for
// the final view.
std::string action_key(const StepView& view, bool final_step);
// Action key plus which view sectors hold a landmark: "T:left:plain/01100010".
std::string step_context(const StepView& view, bool final_step);

// Clause skeleton of one step, e.g. "T:left:plain|M:past:6" or "S:0". Move
// and stop slots name the view sector holding the landmark, "n<k>" for
// sector k of the next view, "X" when it is visible in neither.
std::string step_template(const std::vector<const Clause*>& clauses,
                          const StepView& view, const StepView* next);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct GeneratorParams {
  EncodingFormat encoding = EncodingFormat::interleaved;
  int landmark_vocab = 40;
  // Normalized event frequencies: context -> template -> share of all steps.
  std::map<std::string, std::map<std::string, double>> clause_emission;
  // Per landmark id, share of mentions using each surface form.
  std::vector<std::array<double, kSurfaceForms>> naming;
  double alpha = 0.1;    // additive smoothing toward uniform
  double backoff = 1.0;  // strength of the per-action prior, in units of the
                         // mean per-context frequency
  int version = 0;

  static GeneratorParams fresh(EncodingFormat encoding = EncodingFormat::interleaved,
                               int landmark_vocab = 40);
  void validate() const;
  std::string digest() const;
  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

struct GenTrainConfig {
  double alpha = 0.1;
  double backoff = 1.0;
  double warm_start = 0.0;  // weight of the init params in the new estimate
};

struct DecodeConfig {
  DecodeMode mode = DecodeMode::greedy;
  int k = 3;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  static DecodeConfig greedy() { return {}; }
  static DecodeConfig top_k(int k, std::uint64_t seed, double temperature = 1.0) {
    return {DecodeMode::top_k, k, temperature, seed};
  }
  void validate() const;
};

struct Generation {
  Instruction instruction;
  double log_likelihood = 0.0;
};

// Throws Error(empty_input) when no pair parses.
GeneratorParams train_generator(const EnvironmentSet& envs,
                                std::span<const PairedSample> pairs,
                                const std::optional<GeneratorParams>& init,
                                const GenTrainConfig& hyper, std::uint64_t seed,
                                EncodingFormat encoding = EncodingFormat::interleaved,
                                int landmark_vocab = 40);

class Generator {
 public:
  explicit Generator(GeneratorParams params);

  const GeneratorParams& params() const { return params_; }

  Generation generate(const Environment& env, const Trajectory& traj,
                      const DecodeConfig& decode) const;

  // Length-normalized (per clause) log-likelihood of an arbitrary
  // instruction for the trajectory.
  double score(const Environment& env, const Trajectory& traj,
               const Instruction& instr) const;

  // Smoothed P(template | context).
  double template_prob(const std::string& context, const std::string& tmpl) const;
  double naming_prob(LandmarkId id, int form) const;

 private:
  struct ActionStats {
    std::map<std::string, double> backoff;  // smoothed P(template | action)
    double prior_mass = 0.0;                 // backoff * mean context count
  };
  const ActionStats* action_stats(const std::string& action) const;
  // Realizable templates for the step, most probable first.
  std::vector<std::pair<std::string, double>> candidates(const std::string& context,
                                                         const StepView& view,
                                                         const StepView* next) const;

  GeneratorParams params_;
  std::map<std::string, ActionStats> actions_;
  std::map<std::string, double> context_mass_;
  std::vector<std::string> templates_[2];  // sorted; [1] holds final-step templates
  double global_mean_ = 0.0;
  double unseen_floor_ = 1e-12;
};

Generation generate(const GeneratorParams& params, const Environment& env,
                    const Trajectory& traj, const DecodeConfig& decode);

}  // namespace srdf
