#include "srdf/generator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <tuple>

namespace srdf {

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

namespace {

bool visible_at(const Environment& env, const Trajectory& traj, std::size_t step,
                LandmarkId id) {
  const Node& node = env.node(traj.nodes[step]);
  for (const auto& bucket : node.landmarks)
    if (std::find(bucket.begin(), bucket.end(), id) != bucket.end()) return true;
  return false;
}

int clause_kind(const Clause& c) { return static_cast<int>(c.index()); }
constexpr int kMoveKind = 0;
constexpr int kTurnKind = 1;
constexpr int kStopKind = 2;

}  // namespace

int clause_cost(const Clause& clause, const Environment& env, const Trajectory& traj,
                std::size_t step) {
  const bool final_step = step + 1 == traj.nodes.size();
  if (std::holds_alternative<StopClause>(clause)) return final_step ? 0 : kImpossible;
  if (final_step) return 2;
  if (const auto* turn = std::get_if<TurnClause>(&clause)) {
    const Action& a = traj.actions[step];
    if (!a.is_turn()) return 2;
    return turn_bin(a.signed_degrees()).first == turn->direction ? 0 : 1;
  }
  const auto& move = std::get<MoveClause>(clause);
  if (move.relation == Relation::past) {
    if (departure_landmark(env, traj, step) == move.landmark) return 0;
  } else if (visible_at(env, traj, step + 1, move.landmark)) {
    return 0;
  }
  if (visible_at(env, traj, step, move.landmark) ||
      visible_at(env, traj, step + 1, move.landmark))
    return 1;
  return 2;
}

int order_penalty(const Clause& prev, const Clause& clause) {
  if (clause_kind(clause) == kMoveKind && clause_kind(prev) == kMoveKind) return 1;
  if (clause_kind(clause) == kTurnKind && clause_kind(prev) != kStopKind) return 1;
  return 0;
}

Alignment align_clauses(const std::vector<Clause>& clauses, const Environment& env,
                        const Trajectory& traj) {
  validate_trajectory(env, traj);
  const std::size_t k_count = clauses.size();
  const std::size_t n = traj.nodes.size();
  Alignment out;
  out.step_clauses.assign(n, {});
  if (k_count == 0) return out;

  std::vector<std::vector<int>> cost(k_count, std::vector<int>(n));
  for (std::size_t k = 0; k < k_count; ++k)
    for (std::size_t s = 0; s < n; ++s) cost[k][s] = clause_cost(clauses[k], env, traj, s);
  std::vector<int> penalty(k_count, 0);
  for (std::size_t k = 1; k < k_count; ++k)
    penalty[k] = order_penalty(clauses[k - 1], clauses[k]);

  // togo[k][sp]: best cost for clauses k.. given clause k-1 sits on step sp.
  std::vector<std::vector<int>> togo(k_count + 1, std::vector<int>(n, 0));
  const auto step_cost = [&](std::size_t k, std::size_t sp, std::size_t s) {
    return cost[k][s] + (k > 0 && s == sp ? penalty[k] : 0) + togo[k + 1][s];
  };
  for (std::size_t k = k_count; k-- > 0;) {
    for (std::size_t sp = 0; sp < n; ++sp) {
      int best = std::numeric_limits<int>::max();
      for (std::size_t s = sp; s < n; ++s) best = std::min(best, step_cost(k, sp, s));
      togo[k][sp] = best;
    }
  }
  out.cost = togo[0][0];
  std::size_t sp = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const int target = togo[k][sp];
    std::size_t s = sp;
    while (step_cost(k, sp, s) != target) ++s;
    out.clause_step.push_back(s);
    out.step_clauses[s].push_back(k);
    sp = s;
  }
  return out;
}

Alignment align_clauses(const Instruction& instr, const Environment& env,
                        const Trajectory& traj) {
  return align_clauses(parse_clauses(instr), env, traj);
}

// ---------------------------------------------------------------------------
// Encoded steps
// ---------------------------------------------------------------------------

std::vector<StepView> read_encoding(const std::vector<std::string>& tokens) {
  std::vector<StepView> views;
  std::vector<std::string> actions;
  bool in_view = false;
  for (const auto& tok : tokens) {
    if (tok == kViewOpen) {
      views.emplace_back();
      in_view = true;
    } else if (tok == kViewClose) {
      in_view = false;
    } else if (in_view) {
      const auto colon = tok.find(':');
      int sector = -1;
      LandmarkId id = 0;
      if (tok.size() > 1 && tok[0] == 's' && colon != std::string::npos) {
        auto r1 = std::from_chars(tok.data() + 1, tok.data() + colon, sector);
        auto r2 = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), id);
        if (r1.ec != std::errc() || r2.ec != std::errc()) sector = -1;
      }
      if (sector < 0 || sector >= kSectorCount)
        throw Error(ErrorCode::schema_violation, "bad view token '" + tok + "'");
      views.back().visible[sector].push_back(id);
    } else if (is_action_token(tok)) {
      actions.push_back(tok);
    } else if (tok != kStopToken) {
      throw Error(ErrorCode::schema_violation, "unexpected token '" + tok + "'");
    }
  }
  if (views.empty()) throw Error(ErrorCode::schema_violation, "encoding has no views");
  if (!actions.empty()) {
    if (actions.size() + 1 != views.size())
      throw Error(ErrorCode::schema_violation, "action count does not match views");
    for (std::size_t i = 0; i < actions.size(); ++i) views[i].action = actions[i];
  }
  return views;
}

namespace {

// Signed turn of the step's action; 0 for forward or when not encoded.
double action_turn(const StepView& view) {
  if (!view.action || *view.action == "forward") return 0.0;
  const std::string& tok = *view.action;
  const auto colon = tok.find(':');
  double deg = 0.0;
  std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), deg);
  return tok.compare(0, colon, "left") == 0 ? -deg : deg;
}

}  // namespace

std::string action_key(const StepView& view, bool final_step) {
  if (final_step) return "END";
  if (!view.action) return "?";
  if (*view.action == "forward") return "F";
  const auto [dir, mag] = turn_bin(action_turn(view));
  if (dir == TurnDirection::around) return "T:around";
  static constexpr const char* kMag[] = {"slight", "plain", "sharp", "full"};
  return "T:" + std::string(direction_name(dir)) + ":" + kMag[static_cast<int>(mag)];
}

std::string step_context(const StepView& view, bool final_step) {
  std::string ctx = action_key(view, final_step) + "/";
  for (const auto& bucket : view.visible) ctx.push_back(bucket.empty() ? '0' : '1');
  return ctx;
}

namespace {

std::optional<int> sector_of(const StepView& view, LandmarkId id) {
  for (int s = 0; s < kSectorCount; ++s)
    if (std::find(view.visible[s].begin(), view.visible[s].end(), id) !=
        view.visible[s].end())
      return s;
  return std::nullopt;
}

std::string turn_part(const TurnClause& t) {
  if (t.direction == TurnDirection::around) return "T:around";
  static constexpr const char* kMag[] = {"slight", "plain", "sharp", "full"};
  return "T:" + std::string(direction_name(t.direction)) + ":" +
         kMag[static_cast<int>(t.magnitude)];
}

std::vector<std::string> split_parts(const std::string& tmpl) {
  std::vector<std::string> parts;
  if (tmpl.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto bar = tmpl.find('|', start);
    parts.push_back(tmpl.substr(start, bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return parts;
}

}  // namespace

std::string step_template(const std::vector<const Clause*>& clauses,
                          const StepView& view, const StepView* next) {
  std::string out;
  for (const Clause* clause : clauses) {
    if (!out.empty()) out.push_back('|');
    if (const auto* t = std::get_if<TurnClause>(clause)) {
      out += turn_part(*t);
    } else if (const auto* m = std::get_if<MoveClause>(clause)) {
      out += m->relation == Relation::toward ? "M:toward:" : "M:past:";
      const auto here = sector_of(view, m->landmark);
      const auto there = next ? sector_of(*next, m->landmark) : std::nullopt;
      const bool prefer_next = m->relation == Relation::toward && there;
      if (here && !prefer_next) {
        out += std::to_string(*here);
      } else if (there) {
        out += "n" + std::to_string(*there);
      } else {
        out += "X";
      }
    } else {
      const auto& s = std::get<StopClause>(*clause);
      out += "S";
      if (s.landmark) {
        const auto here = sector_of(view, *s.landmark);
        out += ":" + (here ? std::to_string(*here) : std::string("X"));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

GeneratorParams GeneratorParams::fresh(EncodingFormat encoding, int landmark_vocab) {
  if (landmark_vocab < 1)
    throw Error(ErrorCode::invalid_argument, "landmark_vocab must be positive");
  GeneratorParams p;
  p.encoding = encoding;
  p.landmark_vocab = landmark_vocab;
  p.naming.assign(static_cast<std::size_t>(landmark_vocab), {0.0, 0.0});
  return p;
}

void GeneratorParams::validate() const {
  const auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (landmark_vocab < 1 || naming.size() != static_cast<std::size_t>(landmark_vocab))
    throw Error(ErrorCode::schema_violation, "generator naming table size mismatch");
  if (bad(alpha) || bad(backoff))
    throw Error(ErrorCode::schema_violation, "generator smoothing must be finite and >= 0");
  for (const auto& [ctx, row] : clause_emission)
    for (const auto& [tmpl, f] : row)
      if (bad(f))
        throw Error(ErrorCode::schema_violation, "bad emission frequency in " + ctx);
  for (const auto& row : naming)
    for (double f : row)
      if (bad(f)) throw Error(ErrorCode::schema_violation, "bad naming frequency");
}

std::string GeneratorParams::digest() const {
  std::string text = "generator ";
  text += encoding_name(encoding);
  text += " " + std::to_string(landmark_vocab) + " " + format_double(alpha) + " " +
          format_double(backoff) + "\n";
  for (const auto& [ctx, row] : clause_emission) {
    text += ctx + "\n";
    for (const auto& [tmpl, f] : row) text += " " + tmpl + "=" + format_double(f) + "\n";
  }
  for (const auto& row : naming)
    text += format_double(row[0]) + " " + format_double(row[1]) + "\n";
  return sha256_hex(text);
}

void DecodeConfig::validate() const {
  if (mode == DecodeMode::top_k && k < 1)
    throw Error(ErrorCode::invalid_argument, "top_k decoding needs k >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error(ErrorCode::invalid_argument, "temperature must be positive");
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

GeneratorParams train_generator(const EnvironmentSet& envs,
                                std::span<const PairedSample> pairs,
                                const std::optional<GeneratorParams>& init,
                                const GenTrainConfig& hyper,
                                [[maybe_unused]] std::uint64_t seed,
                                EncodingFormat encoding, int landmark_vocab) {
  if (!(hyper.warm_start >= 0.0 && hyper.warm_start <= 1.0))
    throw Error(ErrorCode::invalid_argument, "warm_start must lie in [0, 1]");
  GeneratorParams out = GeneratorParams::fresh(encoding, landmark_vocab);
  out.alpha = hyper.alpha;
  out.backoff = hyper.backoff;

  double steps = 0.0;
  double mentions = 0.0;
  std::size_t used = 0;
  for (const auto& pair : pairs) {
    std::vector<Clause> clauses;
    try {
      clauses = parse_clauses(pair.instr);
    } catch (const UnparseableInstruction&) {
      continue;
    }
    const Environment& env = envs.at(pair.env_id());
    const Trajectory& traj = *pair.traj;
    const auto views = read_encoding(encode_trajectory(env, traj, encoding));
    const Alignment align = align_clauses(clauses, env, traj);
    for (std::size_t i = 0; i < views.size(); ++i) {
      const bool final_step = i + 1 == views.size();
      std::vector<const Clause*> step;
      for (std::size_t k : align.step_clauses[i]) step.push_back(&clauses[k]);
      out.clause_emission[step_context(views[i], final_step)]
                         [step_template(step, views[i],
                                        final_step ? nullptr : &views[i + 1])] += 1.0;
      steps += 1.0;
    }
    for (const auto& c : clauses) {
      std::optional<LandmarkId> id;
      int form = 0;
      if (const auto* m = std::get_if<MoveClause>(&c)) {
        id = m->landmark;
        form = m->form;
      } else if (const auto* s = std::get_if<StopClause>(&c)) {
        id = s->landmark;
        form = s->form;
      }
      if (!id || *id >= static_cast<LandmarkId>(landmark_vocab)) continue;
      out.naming[*id][form] += 1.0;
      mentions += 1.0;
    }
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::empty_input, "no parseable training pairs");

  for (auto& [ctx, row] : out.clause_emission)
    for (auto& [tmpl, f] : row) f /= steps;
  if (mentions > 0)
    for (auto& row : out.naming)
      for (double& f : row) f /= mentions;

  if (init) {
    out.version = init->version + 1;
    const double rho = hyper.warm_start;
    if (rho > 0.0) {
      if (init->encoding != encoding || init->landmark_vocab != landmark_vocab)
        throw Error(ErrorCode::invalid_argument,
                    "warm start needs the same encoding and vocabulary");
      for (auto& [ctx, row] : out.clause_emission)
        for (auto& [tmpl, f] : row) f *= 1.0 - rho;
      for (const auto& [ctx, row] : init->clause_emission)
        for (const auto& [tmpl, f] : row) out.clause_emission[ctx][tmpl] += rho * f;
      for (std::size_t l = 0; l < out.naming.size(); ++l)
        for (int f = 0; f < kSurfaceForms; ++f)
          out.naming[l][f] = (1.0 - rho) * out.naming[l][f] + rho * init->naming[l][f];
    }
  } else {
    out.version = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

namespace {

std::string action_of(const std::string& context) {
  return context.substr(0, context.find('/'));
}

bool final_context(const std::string& context) { return action_of(context) == "END"; }

}  // namespace

Generator::Generator(GeneratorParams params) : params_(std::move(params)) {
  params_.validate();
  std::map<std::string, std::map<std::string, double>> per_action;
  std::map<std::string, int> contexts_per_action;
  std::set<std::string> templates[2];
  double total = 0.0;
  std::size_t contexts = 0;
  for (const auto& [ctx, row] : params_.clause_emission) {
    const std::string a = action_of(ctx);
    double mass = 0.0;
    for (const auto& [tmpl, f] : row) {
      per_action[a][tmpl] += f;
      mass += f;
      templates[final_context(ctx)].insert(tmpl);
    }
    context_mass_[ctx] = mass;
    total += mass;
    ++contexts;
    ++contexts_per_action[a];
  }
  templates_[0].assign(templates[0].begin(), templates[0].end());
  templates_[1].assign(templates[1].begin(), templates[1].end());
  global_mean_ = contexts ? total / static_cast<double>(contexts) : 0.0;

  for (auto& [a, row] : per_action) {
    ActionStats stats;
    const auto& pool = templates_[a == "END"];
    const double uniform = pool.empty() ? 0.0 : 1.0 / static_cast<double>(pool.size());
    double mass = 0.0;
    for (const auto& [tmpl, f] : row) mass += f;
    for (const auto& tmpl : pool) {
      const auto it = row.find(tmpl);
      const double f = it == row.end() ? 0.0 : it->second;
      stats.backoff[tmpl] =
          (f + params_.alpha * mass * uniform) / (mass * (1.0 + params_.alpha));
    }
    stats.prior_mass = params_.backoff * mass / contexts_per_action[a];
    actions_.emplace(a, std::move(stats));
  }
}

const Generator::ActionStats* Generator::action_stats(const std::string& action) const {
  const auto it = actions_.find(action);
  return it == actions_.end() ? nullptr : &it->second;
}

double Generator::template_prob(const std::string& context,
                                const std::string& tmpl) const {
  const bool fin = final_context(context);
  const auto& pool = templates_[fin];
  if (!std::binary_search(pool.begin(), pool.end(), tmpl)) return unseen_floor_;
  const double uniform = 1.0 / static_cast<double>(pool.size());

  double prior = uniform;
  double prior_mass = params_.backoff * global_mean_;
  if (const ActionStats* a = action_stats(action_of(context))) {
    prior = a->backoff.at(tmpl);
    prior_mass = a->prior_mass;
  }
  double count = 0.0;
  double mass = 0.0;
  if (const auto it = params_.clause_emission.find(context);
      it != params_.clause_emission.end()) {
    if (const auto jt = it->second.find(tmpl); jt != it->second.end()) count = jt->second;
    mass = context_mass_.at(context);
  }
  if (mass + prior_mass <= 0.0) return prior;
  return std::max((count + prior_mass * prior) / (mass + prior_mass), unseen_floor_);
}

double Generator::naming_prob(LandmarkId id, int form) const {
  if (form < 0 || form >= kSurfaceForms)
    throw Error(ErrorCode::invalid_argument, "bad surface form");
  if (id >= params_.naming.size()) return 1.0 / kSurfaceForms;
  const auto& row = params_.naming[id];
  const double mass = row[0] + row[1];
  if (mass <= 0.0) return 1.0 / kSurfaceForms;
  return (row[form] + params_.alpha * mass / kSurfaceForms) /
         (mass * (1.0 + params_.alpha));
}

namespace {

// Whether every slot of `tmpl` names a non-empty bucket.
bool realizable(const std::string& tmpl, const StepView& view, const StepView* next) {
  for (const auto& part : split_parts(tmpl)) {
    if (part[0] == 'T' || part == "S") continue;
    const std::string slot = part.substr(part.rfind(':') + 1);
    if (slot == "X") return false;
    if (slot[0] == 'n') {
      if (!next || next->visible[slot[1] - '0'].empty()) return false;
    } else if (view.visible[slot[0] - '0'].empty()) {
      return false;
    }
  }
  return true;
}

// Template with its slots erased, e.g. "T:left:plain|M:past".
std::string template_shape(const std::string& tmpl) {
  std::string shape;
  for (const auto& part : split_parts(tmpl)) {
    if (!shape.empty()) shape.push_back('|');
    shape += part[0] == 'T' || part == "S" ? part : part.substr(0, part.rfind(':'));
  }
  return shape;
}

}  // namespace

std::vector<std::pair<std::string, double>> Generator::candidates(
    const std::string& context, const StepView& view, const StepView* next) const {
  const bool fin = final_context(context);
  // A step is decided as clause shape first, then slots among the realizable
  // ones, so mass split over several sectors does not lose to an empty step.
  std::map<std::string, double> shape_mass;
  std::map<std::string, double> realizable_mass;
  std::vector<std::tuple<std::string, std::string, double>> options;
  for (const auto& tmpl : templates_[fin]) {
    const double p = template_prob(context, tmpl);
    const std::string shape = template_shape(tmpl);
    shape_mass[shape] += p;
    if (!realizable(tmpl, view, next)) continue;
    realizable_mass[shape] += p;
    options.emplace_back(tmpl, shape, p);
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [tmpl, shape, p] : options)
    out.emplace_back(tmpl, shape_mass[shape] * p / realizable_mass[shape]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

Generation Generator::generate(const Environment& env, const Trajectory& traj,
                               const DecodeConfig& decode) const {
  decode.validate();
  const auto views = read_encoding(encode_trajectory(env, traj, params_.encoding));
  Rng rng(decode.seed);
  const bool sample = decode.mode == DecodeMode::top_k;

  // Picks one of the first `k` weighted options; greedy takes the first.
  const auto pick = [&](const std::vector<double>& probs) -> std::size_t {
    if (!sample || probs.size() < 2) return 0;
    const std::size_t k = std::min<std::size_t>(probs.size(), decode.k);
    std::vector<double> w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += w[i] = std::pow(probs[i], 1.0 / decode.temperature);
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < k; ++i) {
      if (u < w[i]) return i;
      u -= w[i];
    }
    return k - 1;
  };

  Generation gen;
  std::vector<Clause> clauses;
  const auto name = [&](LandmarkId id) {
    std::vector<double> p{naming_prob(id, 0), naming_prob(id, 1)};
    int first = p[1] > p[0] ? 1 : 0;
    std::vector<double> ordered{p[first], p[1 - first]};
    const int form = pick(ordered) == 0 ? first : 1 - first;
    gen.log_likelihood += std::log(p[form]);
    return form;
  };

  for (std::size_t i = 0; i < views.size(); ++i) {
    const bool fin = i + 1 == views.size();
    const StepView* next = fin ? nullptr : &views[i + 1];
    const std::string ctx = step_context(views[i], fin);
    const auto options = candidates(ctx, views[i], next);
    std::string tmpl = fin ? "S" : "";
    if (!options.empty()) {
      std::vector<double> probs;
      for (const auto& o : options) probs.push_back(o.second);
      const auto& chosen = options[pick(probs)];
      tmpl = chosen.first;
      gen.log_likelihood += std::log(chosen.second);
    }
    for (const auto& part : split_parts(tmpl)) {
      if (part[0] == 'T') {
        if (part == "T:around") {
          clauses.emplace_back(TurnClause{TurnDirection::around, TurnMagnitude::full});
          continue;
        }
        const auto c2 = part.find(':', 2);
        const std::string dir = part.substr(2, c2 - 2);
        const std::string mag = part.substr(c2 + 1);
        TurnClause t;
        t.direction = dir == "left" ? TurnDirection::left : TurnDirection::right;
        t.magnitude = mag == "slight"  ? TurnMagnitude::slight
                      : mag == "sharp" ? TurnMagnitude::sharp
                                       : TurnMagnitude::plain;
        clauses.emplace_back(t);
      } else if (part == "S") {
        clauses.emplace_back(StopClause{});
      } else {
        const std::string slot = part.substr(part.rfind(':') + 1);
        const LandmarkId id = slot[0] == 'n' ? next->visible[slot[1] - '0'].front()
                                             : views[i].visible[slot[0] - '0'].front();
        const int form = name(id);
        if (part[0] == 'S') {
          clauses.emplace_back(StopClause{id, form});
        } else {
          const Relation rel =
              part.compare(0, 8, "M:toward") == 0 ? Relation::toward : Relation::past;
          clauses.emplace_back(MoveClause{rel, id, form});
        }
      }
    }
  }
  gen.instruction = render(clauses);
  return gen;
}

double Generator::score(const Environment& env, const Trajectory& traj,
                        const Instruction& instr) const {
  const auto clauses = parse_clauses(instr);
  if (clauses.empty()) return std::log(unseen_floor_);
  const auto views = read_encoding(encode_trajectory(env, traj, params_.encoding));
  const Alignment align = align_clauses(clauses, env, traj);
  double ll = 0.0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const bool fin = i + 1 == views.size();
    std::vector<const Clause*> step;
    for (std::size_t k : align.step_clauses[i]) step.push_back(&clauses[k]);
    ll += std::log(template_prob(step_context(views[i], fin),
                                 step_template(step, views[i], fin ? nullptr : &views[i + 1])));
  }
  for (const auto& c : clauses) {
    if (const auto* m = std::get_if<MoveClause>(&c)) ll += std::log(naming_prob(m->landmark, m->form));
    if (const auto* s = std::get_if<StopClause>(&c); s && s->landmark)
      ll += std::log(naming_prob(*s->landmark, s->form));
  }
  return ll / static_cast<double>(clauses.size());
}

Generation generate(const GeneratorParams& params, const Environment& env,
                    const Trajectory& traj, const DecodeConfig& decode) {
  return Generator(params).generate(env, traj, decode);
}

}  // namespace srdf
