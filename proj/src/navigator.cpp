#include "srdf/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace srdf {

const std::vector<std::string>& nav_feature_names() {
  static const std::vector<std::string> names{
      "move_landmark_match", "move_landmark_other", "next_landmark_match",
      "toward_match",        "turn_direction_match", "turn_bin_match",
      "turn_opposite",       "straight_no_turn",    "no_turn_delta",
      "abs_delta",           "distance",            "revisit",
      "backtrack",           "stop_bias",           "stop_exhausted",
      "stop_landmark_ahead", "stop_landmark_elsewhere", "stop_remaining",
      "stop_at_start"};
  return names;
}

namespace {

bool contains(const std::vector<LandmarkId>& v, LandmarkId id) {
  return std::binary_search(v.begin(), v.end(), id);
}

bool visible_anywhere(const SectorLandmarks& s, LandmarkId id) {
  for (const auto& bucket : s)
    if (contains(bucket, id)) return true;
  return false;
}

bool turn_matches(const TurnClause& t, double delta) {
  if (delta == 0.0) return false;
  switch (t.direction) {
    case TurnDirection::left: return delta < 0;
    case TurnDirection::right: return delta > 0;
    case TurnDirection::around: return std::abs(delta) > 120.0;
  }
  return false;
}

bool turn_opposes(const TurnClause& t, double delta) {
  switch (t.direction) {
    case TurnDirection::left: return delta > 0;
    case TurnDirection::right: return delta < 0;
    case TurnDirection::around: return std::abs(delta) < 90.0;
  }
  return false;
}

// Index of the first move clause at or after `from`, looking at most one
// turn clause ahead.
std::optional<std::size_t> move_at(const std::vector<Clause>& clauses,
                                   std::size_t from) {
  for (std::size_t i = from; i < clauses.size() && i < from + 2; ++i) {
    if (std::holds_alternative<MoveClause>(clauses[i])) return i;
    if (!std::holds_alternative<TurnClause>(clauses[i])) break;
  }
  return std::nullopt;
}

bool move_satisfied(const MoveClause& m, const Environment& env,
                    const Observation& obs, const Candidate& cand) {
  if (m.relation == Relation::toward)
    return visible_anywhere(env.node(cand.node).landmarks, m.landmark);
  return contains(obs.visible[cand.sector], m.landmark);
}

// The neighbor a plain "forward" would take.
std::optional<std::size_t> straight_candidate(const Observation& obs) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < obs.candidates.size(); ++i) {
    const double d = std::abs(obs.candidates[i].heading_delta);
    if (!best || d < std::abs(obs.candidates[*best].heading_delta)) best = i;
  }
  if (best && std::abs(obs.candidates[*best].heading_delta) > kDefaultTurnThreshold)
    return std::nullopt;
  return best;
}

}  // namespace

FeatureVector extract_features(const InstrState& state, const Environment& env,
                               const Observation& obs,
                               std::optional<std::size_t> candidate) {
  FeatureVector f{};
  const auto& clauses = state.clauses;
  if (state.cursor >= clauses.size())
    throw Error(ErrorCode::invalid_argument, "cursor out of range");

  if (!candidate) {
    f[kStopBias] = 1.0;
    f[kStopAtStart] = state.step == 0 ? 1.0 : 0.0;
    std::size_t remaining = 0;
    for (std::size_t i = state.cursor; i < clauses.size(); ++i)
      remaining += !std::holds_alternative<StopClause>(clauses[i]);
    f[kStopRemaining] = static_cast<double>(remaining) / 4.0;
    if (state.at_final_stop()) {
      f[kStopExhausted] = 1.0;
      if (const auto* s = std::get_if<StopClause>(&clauses.back()); s && s->landmark) {
        if (contains(obs.visible[0], *s->landmark))
          f[kStopLandmarkAhead] = 1.0;
        else if (visible_anywhere(obs.visible, *s->landmark))
          f[kStopLandmarkElsewhere] = 1.0;
      }
    }
    return f;
  }

  const Candidate& cand = obs.candidates.at(*candidate);
  const double delta = cand.heading_delta;
  const int sector = cand.sector;
  const TurnClause* turn = std::get_if<TurnClause>(&clauses[state.cursor]);
  const auto move_idx = move_at(clauses, state.cursor);

  if (move_idx) {
    const auto& m = std::get<MoveClause>(clauses[*move_idx]);
    if (m.relation == Relation::toward) {
      f[kTowardMatch] = move_satisfied(m, env, obs, cand) ? 1.0 : 0.0;
    } else if (contains(obs.visible[sector], m.landmark)) {
      f[kMoveLandmarkMatch] = 1.0;
    } else if (visible_anywhere(obs.visible, m.landmark)) {
      f[kMoveLandmarkOther] = 1.0;
    }
    if (const auto next = move_at(clauses, *move_idx + 1)) {
      const auto& m2 = std::get<MoveClause>(clauses[*next]);
      if (move_satisfied(m2, env, obs, cand)) f[kNextLandmarkMatch] = 1.0;
    }
  }

  if (turn) {
    if (turn_matches(*turn, delta)) f[kTurnDirectionMatch] = 1.0;
    if (delta != 0.0 &&
        turn_bin(delta) == std::make_pair(turn->direction, turn->magnitude))
      f[kTurnBinMatch] = 1.0;
    if (turn_opposes(*turn, delta)) f[kTurnOpposite] = 1.0;
  } else {
    f[kStraightNoTurn] = straight_candidate(obs) == candidate ? 1.0 : 0.0;
    f[kNoTurnDelta] = std::abs(delta) / 180.0;
  }
  f[kAbsDelta] = std::abs(delta) / 180.0;
  f[kDistance] = cand.distance / 10.0;
  if (std::find(state.visited.begin(), state.visited.end(), cand.node) !=
      state.visited.end())
    f[kRevisit] = 1.0;
  if (state.previous == cand.node) f[kBacktrack] = 1.0;
  return f;
}

void advance_cursor(InstrState& state, const Environment& env,
                    const Observation& obs, NodeId chosen) {
  const auto it = std::find_if(obs.candidates.begin(), obs.candidates.end(),
                               [&](const Candidate& c) { return c.node == chosen; });
  if (it == obs.candidates.end())
    throw Error(ErrorCode::invalid_trajectory, "chosen node is not a neighbor");
  const Candidate& cand = *it;
  const std::size_t last = state.clauses.size() - 1;
  const auto satisfied = [&](std::size_t i) {
    const auto* m = std::get_if<MoveClause>(&state.clauses[i]);
    return m && move_satisfied(*m, env, obs, cand);
  };

  std::size_t c = state.cursor;
  if (const auto* t = std::get_if<TurnClause>(&state.clauses[c]);
      t && turn_matches(*t, cand.heading_delta))
    ++c;
  if (c < last && satisfied(c)) {
    ++c;
  } else if (c + 1 < last && std::holds_alternative<MoveClause>(state.clauses[c]) &&
             satisfied(c + 1)) {
    c += 2;  // the clause at the cursor was not evidenced; the next one was
  }
  if (c != state.cursor) {
    state.cursor = std::min(c, last);
    state.stalled = 0;
  } else if (++state.stalled >= kStallLimit && state.cursor < last) {
    ++state.cursor;
    state.stalled = 0;
  }
  state.visited.push_back(obs.at_node);
  state.previous = obs.at_node;
  ++state.step;
}

// ---------------------------------------------------------------------------
// Params
// ---------------------------------------------------------------------------

NavigatorParams NavigatorParams::fresh() {
  return {std::vector<double>(kNumNavFeatures, 0.0), nav_feature_names(), 0};
}

void NavigatorParams::validate() const {
  if (weights.size() != feature_names.size())
    throw Error(ErrorCode::schema_violation, "navigator weights/feature mismatch");
  if (feature_names != nav_feature_names())
    throw Error(ErrorCode::schema_violation, "navigator feature set differs");
  for (double w : weights)
    if (!std::isfinite(w))
      throw Error(ErrorCode::non_finite_loss, "navigator weight is not finite");
}

std::string NavigatorParams::digest() const {
  std::string text;
  for (std::size_t i = 0; i < weights.size(); ++i)
    text += feature_names[i] + "=" + format_double(weights[i]) + "\n";
  return sha256_hex(text);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

// Every teacher-forced decision, flattened. Row 0 of each decision is stop,
// the rest are neighbors in id order.
struct DecisionTable {
  std::vector<double> rows;  // kNumNavFeatures per row
  std::vector<std::uint32_t> first_row;
  std::vector<std::uint32_t> num_rows;
  std::vector<std::uint32_t> teacher;

  std::size_t size() const { return teacher.size(); }
  const double* row(std::size_t r) const { return &rows[r * kNumNavFeatures]; }

  void add_row(const FeatureVector& f) { rows.insert(rows.end(), f.begin(), f.end()); }
};

DecisionTable build_decisions(const EnvironmentSet& envs,
                              std::span<const PairedSample> pairs) {
  DecisionTable t;
  for (const auto& p : pairs) {
    const Environment& env = envs.at(p.env_id());
    const Trajectory& traj = *p.traj;
    InstrState state(parse_clauses(p.instr));
    for (std::size_t i = 0; i < traj.nodes.size(); ++i) {
      const Observation obs = observation(env, traj.nodes[i], traj.headings[i]);
      const auto base = static_cast<std::uint32_t>(t.rows.size() / kNumNavFeatures);
      t.first_row.push_back(base);
      t.num_rows.push_back(static_cast<std::uint32_t>(obs.candidates.size() + 1));
      t.add_row(extract_features(state, env, obs, std::nullopt));
      std::uint32_t teacher = 0;
      for (std::size_t k = 0; k < obs.candidates.size(); ++k) {
        t.add_row(extract_features(state, env, obs, k));
        if (i + 1 < traj.nodes.size() && obs.candidates[k].node == traj.nodes[i + 1])
          teacher = static_cast<std::uint32_t>(k + 1);
      }
      t.teacher.push_back(teacher);
      if (i + 1 < traj.nodes.size()) advance_cursor(state, env, obs, traj.nodes[i + 1]);
    }
  }
  return t;
}

double dot(const std::vector<double>& w, const double* f) {
  double s = 0.0;
  for (int k = 0; k < kNumNavFeatures; ++k) s += w[k] * f[k];
  return s;
}

// Mean cross-entropy (+ l2/2 |w|^2) and, if `grad` is given, its gradient.
double loss_and_gradient(const DecisionTable& t, const std::vector<double>& w,
                         double l2, std::vector<double>* grad) {
  if (grad) grad->assign(kNumNavFeatures, 0.0);
  double total = 0.0;
  std::vector<double> scores;
  for (std::size_t d = 0; d < t.size(); ++d) {
    const std::uint32_t first = t.first_row[d], n = t.num_rows[d];
    scores.resize(n);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint32_t j = 0; j < n; ++j) {
      scores[j] = dot(w, t.row(first + j));
      mx = std::max(mx, scores[j]);
    }
    double z = 0.0;
    for (std::uint32_t j = 0; j < n; ++j) z += std::exp(scores[j] - mx);
    const double log_z = mx + std::log(z);
    total += log_z - scores[t.teacher[d]];
    if (grad) {
      for (std::uint32_t j = 0; j < n; ++j) {
        const double p = std::exp(scores[j] - log_z) - (j == t.teacher[d] ? 1.0 : 0.0);
        if (p == 0.0) continue;
        const double* f = t.row(first + j);
        for (int k = 0; k < kNumNavFeatures; ++k) (*grad)[k] += p * f[k];
      }
    }
  }
  const double inv = t.size() ? 1.0 / static_cast<double>(t.size()) : 0.0;
  double reg = 0.0;
  for (int k = 0; k < kNumNavFeatures; ++k) reg += w[k] * w[k];
  if (grad)
    for (int k = 0; k < kNumNavFeatures; ++k) (*grad)[k] = (*grad)[k] * inv + l2 * w[k];
  const double loss = total * inv + 0.5 * l2 * reg;
  if (!std::isfinite(loss))
    throw Error(ErrorCode::non_finite_loss,
                "navigator loss became non-finite over " + std::to_string(t.size()) +
                    " decisions");
  return loss;
}

std::vector<double> descend(const DecisionTable& t, std::vector<double> w,
                            int epochs, const NavTrainConfig& hyper,
                            std::vector<double>* curve) {
  if (t.size() == 0 || epochs <= 0) return w;
  std::vector<double> grad, trial_grad, trial(kNumNavFeatures);
  double loss = loss_and_gradient(t, w, hyper.l2, &grad);
  if (curve) curve->push_back(loss);
  for (int e = 0; e < epochs; ++e) {
    double step = hyper.learning_rate;
    bool moved = false;
    for (int halvings = 0; halvings < 40; ++halvings, step *= 0.5) {
      for (int k = 0; k < kNumNavFeatures; ++k) trial[k] = w[k] - step * grad[k];
      const double trial_loss = loss_and_gradient(t, trial, hyper.l2, &trial_grad);
      if (trial_loss <= loss) {
        w = trial;
        grad.swap(trial_grad);
        loss = trial_loss;
        moved = true;
        break;
      }
    }
    if (curve) curve->push_back(loss);
    if (!moved) break;  // no descent step exists at this scale
  }
  return w;
}

}  // namespace

double navigator_loss(const NavigatorParams& params, const EnvironmentSet& envs,
                      std::span<const PairedSample> pairs, double l2) {
  params.validate();
  return loss_and_gradient(build_decisions(envs, pairs), params.weights, l2, nullptr);
}

NavigatorParams train_navigator(const EnvironmentSet& envs,
                                std::span<const PairedSample> pretrain,
                                std::span<const PairedSample> finetune,
                                const std::optional<NavigatorParams>& init,
                                const NavTrainConfig& hyper,
                                [[maybe_unused]] std::uint64_t seed,
                                TrainReport* report) {
  if (!(hyper.learning_rate > 0.0) || hyper.l2 < 0.0 || hyper.pretrain_epochs < 0 ||
      hyper.finetune_epochs < 0)
    throw Error(ErrorCode::invalid_argument, "bad navigator training config");
  NavigatorParams params = init ? *init : NavigatorParams::fresh();
  params.validate();
  if (pretrain.empty() && finetune.empty())
    throw Error(ErrorCode::empty_input, "navigator training needs data");
  params.weights = descend(build_decisions(envs, pretrain), params.weights,
                           hyper.pretrain_epochs, hyper,
                           report ? &report->pretrain_loss : nullptr);
  params.weights = descend(build_decisions(envs, finetune), params.weights,
                           hyper.finetune_epochs, hyper,
                           report ? &report->finetune_loss : nullptr);
  params.validate();
  return params;
}

double teacher_agreement(const NavigatorParams& params, const EnvironmentSet& envs,
                         std::span<const PairedSample> pairs) {
  const DecisionTable t = build_decisions(envs, pairs);
  if (t.size() == 0) return 0.0;
  std::size_t agree = 0;
  for (std::size_t d = 0; d < t.size(); ++d) {
    std::uint32_t best = 0;
    double best_score = dot(params.weights, t.row(t.first_row[d]));
    for (std::uint32_t j = 1; j < t.num_rows[d]; ++j) {
      const double s = dot(params.weights, t.row(t.first_row[d] + j));
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    agree += best == t.teacher[d];
  }
  return static_cast<double>(agree) / static_cast<double>(t.size());
}

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

EpisodeResult follow(const NavigatorParams& params, const Environment& env,
                     const Instruction& instr, NodeId start,
                     double start_heading, int max_steps) {
  if (max_steps < 1) throw Error(ErrorCode::invalid_argument, "max_steps must be >= 1");
  env.node(start);
  InstrState state(parse_clauses(instr));
  EpisodeResult out;
  out.terminated = EpisodeResult::Termination::max_steps;
  std::vector<NodeId> nodes{start};
  double heading = normalize_heading(start_heading);
  std::vector<double> scores;
  for (int step = 0; step < max_steps; ++step) {
    const Observation obs = observation(env, nodes.back(), heading);
    scores.assign(obs.candidates.size() + 1, 0.0);
    scores[0] = dot(params.weights, extract_features(state, env, obs, std::nullopt).data());
    std::size_t best = 0;
    for (std::size_t k = 0; k < obs.candidates.size(); ++k) {
      scores[k + 1] = dot(params.weights, extract_features(state, env, obs, k).data());
      if (scores[k + 1] > scores[best]) best = k + 1;
    }
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - mx);
    out.action_log_likelihoods.push_back(scores[best] - mx - std::log(z));
    if (best == 0) {
      out.terminated = EpisodeResult::Termination::stopped;
      break;
    }
    const Candidate& cand = obs.candidates[best - 1];
    advance_cursor(state, env, obs, cand.node);
    heading = bearing(env.position(nodes.back()), env.position(cand.node));
    nodes.push_back(cand.node);
  }
  out.followed = make_trajectory(env, "followed", nodes, start_heading);
  return out;
}

}  // namespace srdf
