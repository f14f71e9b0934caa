#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srdf/instr_lang.hpp"
#include "srdf/nav_metrics.hpp"
#include "srdf/text_metrics.hpp"
#include "srdf/trajectories.hpp"

namespace srdf {

enum class DecodeMode { greedy, top_k };

std::string_view decode_mode_name(DecodeMode m);
DecodeMode parse_decode_mode(std::string_view name);

struct Provenance {
  enum class Kind { seed, generated };
  Kind kind = Kind::seed;
  int round = 0;                           // generated only
  DecodeMode mode = DecodeMode::greedy;    // generated only

  static Provenance seed() { return {}; }
  static Provenance generated(int round, DecodeMode mode) {
    return {Kind::generated, round, mode};
  }
  std::string to_string() const;  // "seed", "gen:2:top_k"
  static Provenance parse(std::string_view text);
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Scores attached by a filtering pass, tagged with the navigator that
// produced them so stale scores can be detected after retraining.
struct PairScores {
  NavScores nav;
  std::optional<TextScores> text;
  int navigator_version = 0;
  std::string navigator_digest;
  friend bool operator==(const PairScores&, const PairScores&) = default;
};

struct PairedSample {
  std::string pair_id;
  std::shared_ptr<const Trajectory> traj;  // shared by sibling instructions
  Instruction instr;
  Provenance provenance;
  std::optional<PairScores> scores;

  const std::string& env_id() const { return traj->env_id; }
  friend bool operator==(const PairedSample& a, const PairedSample& b) {
    return a.pair_id == b.pair_id && *a.traj == *b.traj && a.instr == b.instr &&
           a.provenance == b.provenance && a.scores == b.scores;
  }
};

using Pool = std::vector<PairedSample>;

}  // namespace srdf
