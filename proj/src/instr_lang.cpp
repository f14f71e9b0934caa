#include "srdf/instr_lang.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

namespace srdf {

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::array<std::string_view, 2>, 40> kNamedLandmarks{{
    {"bed", "cot"},           {"sofa", "couch"},
    {"rug", "carpet"},        {"lamp", "light"},
    {"door", "doorway"},      {"window", "pane"},
    {"stairs", "staircase"},  {"sink", "basin"},
    {"fridge", "refrigerator"}, {"oven", "stove"},
    {"tv", "television"},     {"painting", "picture"},
    {"mirror", "glass"},      {"plant", "fern"},
    {"chair", "seat"},        {"bench", "pew"},
    {"shelf", "bookcase"},    {"cabinet", "cupboard"},
    {"toilet", "lavatory"},   {"bathtub", "tub"},
    {"shower", "stall"},      {"fireplace", "hearth"},
    {"piano", "keyboard"},    {"clock", "timepiece"},
    {"vase", "urn"},          {"armchair", "recliner"},
    {"dresser", "chest"},     {"wardrobe", "closet"},
    {"counter", "worktop"},   {"island", "bar"},
    {"railing", "banister"},  {"pillar", "column"},
    {"archway", "arch"},      {"curtain", "drape"},
    {"statue", "sculpture"},  {"fountain", "birdbath"},
    {"desk", "bureau"},       {"ottoman", "footstool"},
    {"hallway", "corridor"},  {"balcony", "terrace"},
}};

constexpr std::array<std::string_view, 2> kSyntheticStem{"thing", "object"};

const std::unordered_map<std::string_view, LexiconEntry>& named_index() {
  static const auto* index = [] {
    auto* m = new std::unordered_map<std::string_view, LexiconEntry>();
    for (std::size_t i = 0; i < kNamedLandmarks.size(); ++i)
      for (int f = 0; f < kSurfaceForms; ++f)
        m->emplace(kNamedLandmarks[i][f],
                   LexiconEntry{static_cast<LandmarkId>(i), f});
    return m;
  }();
  return *index;
}

}  // namespace

std::string surface_form(LandmarkId id, int form) {
  if (form < 0 || form >= kSurfaceForms)
    throw Error(ErrorCode::invalid_argument, "bad surface form index");
  if (id < kNamedLandmarks.size()) return std::string(kNamedLandmarks[id][form]);
  return std::string(kSyntheticStem[form]) + std::to_string(id);
}

std::optional<LexiconEntry> lookup_surface(std::string_view token) {
  const auto& index = named_index();
  if (auto it = index.find(token); it != index.end()) return it->second;
  for (int f = 0; f < kSurfaceForms; ++f) {
    const auto stem = kSyntheticStem[f];
    if (token.size() > stem.size() && token.substr(0, stem.size()) == stem) {
      const auto digits = token.substr(stem.size());
      LandmarkId id = 0;
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), id);
      if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() &&
          id >= kNamedLandmarks.size() && digits.front() != '0')
        return LexiconEntry{id, f};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Instructions
// ---------------------------------------------------------------------------

std::string Instruction::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Instruction Instruction::from_text(std::string_view text) {
  Instruction instr;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) instr.tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return instr;
}

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::past: return "past";
    case Relation::toward: return "toward";
    case Relation::at: return "at";
  }
  return "past";
}

std::string_view direction_name(TurnDirection d) {
  switch (d) {
    case TurnDirection::left: return "left";
    case TurnDirection::right: return "right";
    case TurnDirection::around: return "around";
  }
  return "left";
}

std::pair<TurnDirection, TurnMagnitude> turn_bin(double signed_degrees) {
  const double m = std::abs(signed_degrees);
  if (m > 160.0) return {TurnDirection::around, TurnMagnitude::full};
  const TurnDirection dir =
      signed_degrees < 0 ? TurnDirection::left : TurnDirection::right;
  if (m <= 60.0) return {dir, TurnMagnitude::slight};
  if (m <= 120.0) return {dir, TurnMagnitude::plain};
  return {dir, TurnMagnitude::sharp};
}

Instruction render(const std::vector<Clause>& clauses) {
  Instruction out;
  auto& t = out.tokens;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) t.emplace_back(",");
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, MoveClause>) {
            t.emplace_back("walk");
            t.emplace_back(c.relation == Relation::toward ? "toward" : "past");
            t.push_back(surface_form(c.landmark, c.form));
          } else if constexpr (std::is_same_v<C, TurnClause>) {
            t.emplace_back("turn");
            if (c.direction == TurnDirection::around) {
              t.emplace_back("around");
              return;
            }
            if (c.magnitude == TurnMagnitude::slight) t.emplace_back("slightly");
            if (c.magnitude == TurnMagnitude::sharp) t.emplace_back("sharply");
            t.emplace_back(direction_name(c.direction));
          } else {
            t.emplace_back("stop");
            if (c.landmark) {
              t.emplace_back("at");
              t.push_back(surface_form(*c.landmark, c.form));
            }
          }
        },
        clauses[i]);
  }
  return out;
}

PropositionSet propositions_of(const std::vector<Clause>& clauses) {
  PropositionSet props;
  for (const auto& clause : clauses) {
    if (const auto* m = std::get_if<MoveClause>(&clause)) {
      props.semantic.emplace(m->relation, m->landmark);
    } else if (const auto* t = std::get_if<TurnClause>(&clause)) {
      props.directional.push_back(t->direction);
    } else if (const auto* s = std::get_if<StopClause>(&clause)) {
      if (s->landmark) props.semantic.emplace(Relation::at, *s->landmark);
    }
  }
  return props;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<std::string>& tokens) : t_(tokens) {}

  std::vector<Clause> run() {
    if (t_.empty()) fail("empty instruction");
    std::vector<Clause> clauses;
    while (true) {
      clauses.push_back(clause());
      if (std::holds_alternative<StopClause>(clauses.back())) {
        if (p_ != t_.size()) fail("tokens after the stop clause");
        return clauses;
      }
      if (p_ == t_.size()) fail("instruction does not end with stop");
      expect(",");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw UnparseableInstruction(why + " (at token " + std::to_string(p_) + ")");
  }
  const std::string& next() {
    if (p_ >= t_.size()) fail("unexpected end of instruction");
    return t_[p_++];
  }
  void expect(std::string_view tok) {
    if (next() != tok) {
      --p_;
      fail("expected '" + std::string(tok) + "'");
    }
  }
  LexiconEntry landmark() {
    const auto& tok = next();
    auto entry = lookup_surface(tok);
    if (!entry) {
      --p_;
      fail("unknown landmark '" + tok + "'");
    }
    return *entry;
  }
  TurnDirection side() {
    const auto& tok = next();
    if (tok == "left") return TurnDirection::left;
    if (tok == "right") return TurnDirection::right;
    --p_;
    fail("expected left or right");
  }

  Clause clause() {
    const std::string head = next();
    if (head == "turn") {
      const std::string tail = next();
      if (tail == "left") return TurnClause{TurnDirection::left, TurnMagnitude::plain};
      if (tail == "right") return TurnClause{TurnDirection::right, TurnMagnitude::plain};
      if (tail == "around") return TurnClause{TurnDirection::around, TurnMagnitude::full};
      if (tail == "slightly") return TurnClause{side(), TurnMagnitude::slight};
      if (tail == "sharply") return TurnClause{side(), TurnMagnitude::sharp};
      --p_;
      fail("bad turn clause");
    }
    if (head == "walk") {
      const std::string verb = next();
      Relation rel;
      if (verb == "past") {
        rel = Relation::past;
      } else if (verb == "toward") {
        rel = Relation::toward;
      } else {
        --p_;
        fail("bad move verb");
      }
      const auto lm = landmark();
      return MoveClause{rel, lm.landmark, lm.form};
    }
    if (head == "stop") {
      if (p_ < t_.size() && t_[p_] == "at") {
        ++p_;
        const auto lm = landmark();
        return StopClause{lm.landmark, lm.form};
      }
      return StopClause{};
    }
    --p_;
    fail("unexpected token '" + head + "'");
  }

  const std::vector<std::string>& t_;
  std::size_t p_ = 0;
};

}  // namespace

std::vector<Clause> parse_clauses(const Instruction& instr) {
  return Parser(instr.tokens).run();
}

ParsedInstruction parse(const Instruction& instr) {
  ParsedInstruction out;
  out.clauses = parse_clauses(instr);
  out.propositions = propositions_of(out.clauses);
  return out;
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

CorruptionConfig CorruptionConfig::scaled(double factor) const {
  const auto clamp = [](double p) { return std::clamp(p, 0.0, 1.0); };
  return {clamp(landmark_dropout * factor), clamp(synonym_swap * factor),
          clamp(spurious_insert * factor), clamp(direction_flip * factor)};
}

void CorruptionConfig::validate() const {
  for (double p : {landmark_dropout, synonym_swap, spurious_insert, direction_flip})
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::invalid_argument,
                  "corruption probabilities must lie in [0, 1]");
}

std::optional<LandmarkId> departure_landmark(const Environment& env,
                                             const Trajectory& traj,
                                             std::size_t step) {
  const Point here = env.position(traj.nodes[step]);
  const Point there = env.position(traj.nodes[step + 1]);
  const int sector = sector_of_delta(bearing(here, there));
  const auto& bucket = env.node(traj.nodes[step]).landmarks[sector];
  if (bucket.empty()) return std::nullopt;
  return bucket.front();
}

namespace {

// Applies the per-clause corruption model; `emit` receives each surviving or
// inserted clause.
template <typename Emit>
void corrupt_one(const Clause& clause, const CorruptionConfig& c, Rng& rng,
                 int vocab, Emit&& emit) {
  const double u_drop = uniform01(rng);
  const double u_syn = uniform01(rng);
  const double u_spur = uniform01(rng);
  const double u_flip = uniform01(rng);
  const auto spurious = static_cast<LandmarkId>(
      uniform_index(rng, static_cast<std::uint64_t>(vocab)));
  const bool insert = u_spur < c.spurious_insert;
  const MoveClause extra{Relation::past, spurious, 0};

  if (const auto* m = std::get_if<MoveClause>(&clause)) {
    if (!(u_drop < c.landmark_dropout)) {
      MoveClause out = *m;
      if (u_syn < c.synonym_swap) out.form ^= 1;
      emit(Clause{out});
    }
    if (insert) emit(Clause{extra});
  } else if (const auto* t = std::get_if<TurnClause>(&clause)) {
    TurnClause out = *t;
    if (u_flip < c.direction_flip) {
      switch (out.direction) {
        case TurnDirection::left: out.direction = TurnDirection::right; break;
        case TurnDirection::right: out.direction = TurnDirection::left; break;
        case TurnDirection::around:
          out = {TurnDirection::left, TurnMagnitude::plain};
          break;
      }
    }
    emit(Clause{out});
    if (insert) emit(Clause{extra});
  } else {
    StopClause out = std::get<StopClause>(clause);
    if (out.landmark) {
      if (u_drop < c.landmark_dropout) {
        out.landmark.reset();
        out.form = 0;
      } else if (u_syn < c.synonym_swap) {
        out.form ^= 1;
      }
    }
    if (insert) emit(Clause{extra});
    emit(Clause{out});
  }
}

}  // namespace

std::vector<Clause> corrupt_clauses(const std::vector<Clause>& clauses,
                                    const CorruptionConfig& corruption,
                                    Rng& rng, int landmark_vocab) {
  corruption.validate();
  std::vector<Clause> out;
  for (const auto& clause : clauses)
    corrupt_one(clause, corruption, rng, landmark_vocab,
                [&](Clause c) { out.push_back(std::move(c)); });
  return out;
}

Annotation oracle_annotate_detailed(const Environment& env,
                                    const Trajectory& traj,
                                    const CorruptionConfig& corruption,
                                    std::uint64_t seed, int landmark_vocab) {
  corruption.validate();
  validate_trajectory(env, traj);
  // Clean clauses with their emitting step.
  std::vector<std::pair<Clause, std::size_t>> clean;
  const std::size_t n = traj.nodes.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Action& a = traj.actions[i];
    if (a.is_turn()) {
      const auto [dir, mag] = turn_bin(a.signed_degrees());
      clean.emplace_back(TurnClause{dir, mag}, i);
    }
    if (auto lm = departure_landmark(env, traj, i)) {
      clean.emplace_back(MoveClause{Relation::past, *lm, 0}, i);
    } else {
      // No landmark in the departure direction: name one at the arrival node.
      const Observation next_obs =
          observation(env, traj.nodes[i + 1], traj.headings[i + 1]);
      for (const auto& bucket : next_obs.visible) {
        if (!bucket.empty()) {
          clean.emplace_back(MoveClause{Relation::toward, bucket.front(), 0}, i);
          break;
        }
      }
    }
  }
  {
    const Observation last = observation(env, traj.nodes.back(), traj.headings.back());
    StopClause stop;
    if (!last.visible[0].empty()) stop.landmark = last.visible[0].front();
    clean.emplace_back(stop, n - 1);
  }

  Annotation out;
  out.step_clauses.assign(n, {});
  Rng rng(seed);
  std::vector<Clause> clauses;
  for (const auto& [clause, step] : clean) {
    corrupt_one(clause, corruption, rng, landmark_vocab, [&](Clause c) {
      out.step_clauses[step].push_back(clauses.size());
      clauses.push_back(std::move(c));
    });
  }
  out.instruction = render(clauses);
  return out;
}

Instruction oracle_annotate(const Environment& env, const Trajectory& traj,
                            const CorruptionConfig& corruption,
                            std::uint64_t seed, int landmark_vocab) {
  return oracle_annotate_detailed(env, traj, corruption, seed, landmark_vocab)
      .instruction;
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

std::string_view encoding_name(EncodingFormat f) {
  switch (f) {
    case EncodingFormat::interleaved: return "interleaved";
    case EncodingFormat::observation_only: return "observation_only";
    case EncodingFormat::observations_then_actions: return "observations_then_actions";
  }
  return "interleaved";
}

EncodingFormat parse_encoding(std::string_view name) {
  if (name == "interleaved") return EncodingFormat::interleaved;
  if (name == "observation_only") return EncodingFormat::observation_only;
  if (name == "observations_then_actions")
    return EncodingFormat::observations_then_actions;
  throw Error(ErrorCode::invalid_argument,
              "unknown encoding '" + std::string(name) + "'");
}

bool is_action_token(std::string_view token) {
  return token == "forward" || token.rfind("left:", 0) == 0 ||
         token.rfind("right:", 0) == 0;
}

namespace {

std::string action_token(const Action& a) {
  if (!a.is_turn()) return "forward";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s:%.2f",
                a.kind == ActionKind::turn_left ? "left" : "right", a.degrees);
  return buf;
}

void append_view(std::vector<std::string>& out, const Observation& obs) {
  out.emplace_back(kViewOpen);
  for (int s = 0; s < kSectorCount; ++s)
    for (LandmarkId id : obs.visible[s])
      out.push_back("s" + std::to_string(s) + ":" + std::to_string(id));
  out.emplace_back(kViewClose);
}

}  // namespace

std::vector<std::string> encode_trajectory(const Environment& env,
                                           const Trajectory& traj,
                                           EncodingFormat format) {
  validate_trajectory(env, traj);
  std::vector<std::string> out;
  std::vector<std::string> actions;
  const std::size_t n = traj.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    append_view(out, observation(env, traj.nodes[i], traj.headings[i]));
    if (i + 1 == n) break;
    std::string tok = action_token(traj.actions[i]);
    switch (format) {
      case EncodingFormat::interleaved: out.push_back(std::move(tok)); break;
      case EncodingFormat::observations_then_actions:
        actions.push_back(std::move(tok));
        break;
      case EncodingFormat::observation_only: break;
    }
  }
  out.insert(out.end(), actions.begin(), actions.end());
  out.emplace_back(kStopToken);
  return out;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

DatasetStats vocab_stats(const std::vector<InstructionRecord>& records) {
  DatasetStats stats;
  if (records.empty()) return stats;
  std::set<std::string_view> vocab;
  std::set<std::string_view> envs;
  std::size_t total = 0;
  for (const auto& r : records) {
    for (const auto& tok : r.instr->tokens) vocab.insert(tok);
    envs.insert(*r.env_id);
    total += r.instr->length();
  }
  stats.num_instructions = records.size();
  stats.vocab_size = vocab.size();
  stats.mean_length = static_cast<double>(total) / static_cast<double>(records.size());
  stats.num_envs = envs.size();
  return stats;
}

}  // namespace srdf
