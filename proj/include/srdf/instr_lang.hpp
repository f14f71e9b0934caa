#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "srdf/trajectories.hpp"
#include "srdf/world.hpp"

namespace srdf {

// ---------------------------------------------------------------------------
// Lexicon: every landmark id owns two single-token surface forms.
// ---------------------------------------------------------------------------

inline constexpr int kSurfaceForms = 2;

std::string surface_form(LandmarkId id, int form);

struct LexiconEntry {
  LandmarkId landmark;
  int form;
};
std::optional<LexiconEntry> lookup_surface(std::string_view token);

// ---------------------------------------------------------------------------
// Instructions and their grammar
//
//   instruction := clause ( "," clause )*        (last clause is stop)
//   clause      := "turn" turn-tail
//                | "walk" ( "past" | "toward" ) LANDMARK
//                | "stop" [ "at" LANDMARK ]
//   turn-tail   := "left" | "right" | "around"
//                | ( "slightly" | "sharply" ) ( "left" | "right" )
// ---------------------------------------------------------------------------

struct Instruction {
  std::vector<std::string> tokens;

  std::size_t length() const { return tokens.size(); }
  std::string text() const;
  static Instruction from_text(std::string_view text);
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

enum class Relation { past, toward, at };
enum class TurnDirection { left, right, around };
enum class TurnMagnitude { slight, plain, sharp, full };

std::string_view relation_name(Relation r);
std::string_view direction_name(TurnDirection d);

// Coarse bin for a turn of `degrees` (0, 180]; above 160 it is "around".
std::pair<TurnDirection, TurnMagnitude> turn_bin(double signed_degrees);

struct MoveClause {
  Relation relation = Relation::past;
  LandmarkId landmark = 0;
  int form = 0;
  friend bool operator==(const MoveClause&, const MoveClause&) = default;
};

struct TurnClause {
  TurnDirection direction = TurnDirection::left;
  TurnMagnitude magnitude = TurnMagnitude::plain;
  friend bool operator==(const TurnClause&, const TurnClause&) = default;
};

struct StopClause {
  std::optional<LandmarkId> landmark;
  int form = 0;
  friend bool operator==(const StopClause&, const StopClause&) = default;
};

using Clause = std::variant<MoveClause, TurnClause, StopClause>;

struct PropositionSet {
  std::set<std::pair<Relation, LandmarkId>> semantic;
  std::vector<TurnDirection> directional;
  friend bool operator==(const PropositionSet&, const PropositionSet&) = default;
};

struct ParsedInstruction {
  std::vector<Clause> clauses;
  PropositionSet propositions;
};

Instruction render(const std::vector<Clause>& clauses);
PropositionSet propositions_of(const std::vector<Clause>& clauses);
// Throws UnparseableInstruction outside the grammar.
ParsedInstruction parse(const Instruction& instr);
std::vector<Clause> parse_clauses(const Instruction& instr);

// ---------------------------------------------------------------------------
// Seed annotation oracle
// ---------------------------------------------------------------------------

struct CorruptionConfig {
  double landmark_dropout = 0.15;
  double synonym_swap = 0.15;
  double spurious_insert = 0.10;
  double direction_flip = 0.10;

  static CorruptionConfig none() { return {0.0, 0.0, 0.0, 0.0}; }
  static CorruptionConfig total() { return {1.0, 1.0, 1.0, 1.0}; }
  CorruptionConfig scaled(double factor) const;
  void validate() const;
};

struct Annotation {
  Instruction instruction;
  // step_clauses[i] lists the clause indices describing trajectory step i.
  std::vector<std::vector<std::size_t>> step_clauses;
};

// The landmark an annotator names for leaving nodes[i] toward nodes[i+1].
std::optional<LandmarkId> departure_landmark(const Environment& env,
                                             const Trajectory& traj,
                                             std::size_t step);

Annotation oracle_annotate_detailed(const Environment& env,
                                    const Trajectory& traj,
                                    const CorruptionConfig& corruption,
                                    std::uint64_t seed,
                                    int landmark_vocab = 40);

Instruction oracle_annotate(const Environment& env, const Trajectory& traj,
                            const CorruptionConfig& corruption,
                            std::uint64_t seed, int landmark_vocab = 40);

// Applies corruption to an existing clause sequence (same per-clause model
// as the oracle).
std::vector<Clause> corrupt_clauses(const std::vector<Clause>& clauses,
                                    const CorruptionConfig& corruption,
                                    Rng& rng, int landmark_vocab);

// ---------------------------------------------------------------------------
// Trajectory encodings
// ---------------------------------------------------------------------------

enum class EncodingFormat { interleaved, observation_only, observations_then_actions };

std::string_view encoding_name(EncodingFormat f);
EncodingFormat parse_encoding(std::string_view name);

inline constexpr std::string_view kViewOpen = "view";
inline constexpr std::string_view kViewClose = "/view";
inline constexpr std::string_view kStopToken = "stop";

bool is_action_token(std::string_view token);

// Each step contributes an observation block (landmarks by heading-relative
// sector, tokens "s<k>:<id>") and, for non-final steps, one action token
// ("forward", "left:<deg>", "right:<deg>"). A final "stop" token terminates
// every format.
std::vector<std::string> encode_trajectory(const Environment& env,
                                           const Trajectory& traj,
                                           EncodingFormat format);

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

struct DatasetStats {
  std::size_t num_instructions = 0;
  std::size_t vocab_size = 0;
  double mean_length = 0.0;
  std::size_t num_envs = 0;
  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

struct InstructionRecord {
  const Instruction* instr;
  const std::string* env_id;
};

DatasetStats vocab_stats(const std::vector<InstructionRecord>& records);

}  // namespace srdf
