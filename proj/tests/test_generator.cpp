#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "fixtures.hpp"
#include "srdf/generator.hpp"

using namespace srdf;
using srdf::testing::oracle_pool;
using srdf::testing::single_world_set;

namespace {

struct GenFixture {
  Environment env = generate_environment(WorldGenConfig{}, 31, "g");
  EnvironmentSet envs = single_world_set(env);
  std::vector<Trajectory> trajs = sample_trajectories(env, 100, {2, 7}, 8);
  Pool clean = oracle_pool(env, trajs, CorruptionConfig::none(), 9);
  Pool noisy = oracle_pool(env, trajs, CorruptionConfig{}, 10);
};

const GenFixture& fixture() {
  static const GenFixture f;
  return f;
}

// Exhaustive minimum over monotone clause-to-step assignments.
std::pair<int, std::vector<std::size_t>> brute_force_alignment(
    const std::vector<Clause>& clauses, const Environment& env, const Trajectory& traj) {
  const std::size_t n = traj.nodes.size();
  int best = std::numeric_limits<int>::max();
  std::vector<std::size_t> best_steps;
  std::vector<std::size_t> steps;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == clauses.size()) {
      int cost = 0;
      for (std::size_t i = 0; i < k; ++i) {
        cost += clause_cost(clauses[i], env, traj, steps[i]);
        if (i > 0 && steps[i] == steps[i - 1]) cost += order_penalty(clauses[i - 1], clauses[i]);
      }
      if (cost < best || (cost == best && steps < best_steps)) {
        best = cost;
        best_steps = steps;
      }
      return;
    }
    for (std::size_t s = k == 0 ? 0 : steps.back(); s < n; ++s) {
      steps.push_back(s);
      rec(k + 1);
      steps.pop_back();
    }
  };
  rec(0);
  return {best, best_steps};
}

}  // namespace

TEST(Align, CleanOracleMatchesEmissionMap) {
  const auto& f = fixture();
  for (const auto& t : f.trajs) {
    const Annotation a = oracle_annotate_detailed(f.env, t, CorruptionConfig::none(), 1);
    const Alignment al = align_clauses(a.instruction, f.env, t);
    EXPECT_EQ(al.step_clauses, a.step_clauses) << a.instruction.text();
    EXPECT_EQ(al.cost, 0) << a.instruction.text();
  }
}

TEST(Align, StopOnlyGoesToFinalStep) {
  const auto& f = fixture();
  const Alignment al = align_clauses(Instruction::from_text("stop"), f.env, f.trajs[0]);
  ASSERT_EQ(al.clause_step.size(), 1u);
  EXPECT_EQ(al.clause_step[0], f.trajs[0].nodes.size() - 1);
}

TEST(Align, DynamicProgramMatchesBruteForce) {
  const auto& f = fixture();
  const auto shorts = sample_trajectories(f.env, 40, {1, 4}, 77);
  int checked = 0;
  for (std::size_t i = 0; i < shorts.size(); ++i) {
    auto clauses = parse_clauses(
        oracle_annotate(f.env, shorts[i], CorruptionConfig::total().scaled(0.5), i));
    if (clauses.size() > 5) clauses.erase(clauses.begin(), clauses.end() - 5);
    const Alignment al = align_clauses(clauses, f.env, shorts[i]);
    const auto [cost, steps] = brute_force_alignment(clauses, f.env, shorts[i]);
    EXPECT_EQ(al.cost, cost);
    EXPECT_EQ(al.clause_step, steps);
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(Encoding, ReadBackViews) {
  const auto& f = fixture();
  const Trajectory& t = f.trajs[3];
  for (auto fmt : {EncodingFormat::interleaved, EncodingFormat::observations_then_actions,
                   EncodingFormat::observation_only}) {
    const auto views = read_encoding(encode_trajectory(f.env, t, fmt));
    ASSERT_EQ(views.size(), t.nodes.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
      EXPECT_EQ(views[i].visible, observation(f.env, t.nodes[i], t.headings[i]).visible);
      const bool has_action = fmt != EncodingFormat::observation_only && i + 1 < views.size();
      EXPECT_EQ(views[i].action.has_value(), has_action);
    }
  }
}

TEST(Encoding, ActionKeysAndTemplates) {
  StepView v;
  v.visible[0] = {5};
  v.visible[6] = {7, 9};
  StepView next;
  next.visible[2] = {11};
  EXPECT_EQ(action_key(v, true), "END");
  EXPECT_EQ(action_key(v, false), "?");
  v.action = "forward";
  EXPECT_EQ(action_key(v, false), "F");
  v.action = "left:90.00";
  EXPECT_EQ(action_key(v, false), "T:left:plain");
  v.action = "right:170.00";
  EXPECT_EQ(action_key(v, false), "T:around");
  EXPECT_EQ(step_context(v, false), "T:around/10000010");

  const Clause turn = TurnClause{TurnDirection::left, TurnMagnitude::sharp};
  const Clause past = MoveClause{Relation::past, 9, 0};
  const Clause toward = MoveClause{Relation::toward, 11, 1};
  const Clause unseen = MoveClause{Relation::past, 30, 0};
  const Clause stop_at = StopClause{5, 0};
  EXPECT_EQ(step_template({&turn, &past}, v, &next), "T:left:sharp|M:past:6");
  EXPECT_EQ(step_template({&toward}, v, &next), "M:toward:n2");
  EXPECT_EQ(step_template({&unseen}, v, &next), "M:past:X");
  EXPECT_EQ(step_template({&stop_at}, v, nullptr), "S:0");
  EXPECT_EQ(step_template({}, v, nullptr), "");
}

TEST(TrainGenerator, NamingFollowsUsage) {
  const auto& f = fixture();
  Pool pool = f.clean;
  // Rename every landmark mention to its second surface form.
  for (auto& p : pool) {
    auto clauses = parse_clauses(p.instr);
    for (auto& c : clauses) {
      if (auto* m = std::get_if<MoveClause>(&c)) m->form = 1;
      if (auto* s = std::get_if<StopClause>(&c)) s->form = s->landmark ? 1 : 0;
    }
    p.instr = render(clauses);
  }
  const Generator g(train_generator(f.envs, pool, std::nullopt, {}, 0));
  const auto first = std::get<MoveClause>(parse_clauses(pool[0].instr)[1]);
  EXPECT_GT(g.naming_prob(first.landmark, 1), 0.9);
  const auto out = g.generate(f.env, f.trajs[0], DecodeConfig::greedy());
  for (const auto& c : parse_clauses(out.instruction))
    if (const auto* m = std::get_if<MoveClause>(&c)) EXPECT_EQ(m->form, 1);
}

TEST(TrainGenerator, DuplicationInvariant) {
  const auto& f = fixture();
  Pool twice = f.noisy;
  twice.insert(twice.end(), f.noisy.begin(), f.noisy.end());
  EXPECT_EQ(train_generator(f.envs, f.noisy, std::nullopt, {}, 0),
            train_generator(f.envs, twice, std::nullopt, {}, 0));
}

TEST(TrainGenerator, Versions) {
  const auto& f = fixture();
  const auto g1 = train_generator(f.envs, f.noisy, std::nullopt, {}, 0);
  EXPECT_EQ(g1.version, 1);
  EXPECT_EQ(train_generator(f.envs, f.noisy, g1, {}, 0).version, 2);
  EXPECT_NO_THROW(g1.validate());
  EXPECT_EQ(g1.digest().size(), 64u);
}

TEST(TrainGenerator, WarmStartBlends) {
  const auto& f = fixture();
  const auto a = train_generator(f.envs, f.clean, std::nullopt, {}, 0);
  GenTrainConfig full;
  full.warm_start = 1.0;
  auto b = train_generator(f.envs, f.noisy, a, full, 0);
  for (const auto& [ctx, row] : a.clause_emission)
    for (const auto& [tmpl, freq] : row)
      EXPECT_DOUBLE_EQ(b.clause_emission.at(ctx).at(tmpl), freq);
}

TEST(TrainGenerator, UnparseableOnlyPoolThrows) {
  const auto& f = fixture();
  Pool pool(f.clean.begin(), f.clean.begin() + 2);
  for (auto& p : pool) p.instr = Instruction::from_text("walk past");
  try {
    train_generator(f.envs, pool, std::nullopt, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
}

TEST(Generate, FreshModelSaysStop) {
  const auto& f = fixture();
  const auto out = generate(GeneratorParams::fresh(), f.env, f.trajs[0], DecodeConfig::greedy());
  EXPECT_EQ(out.instruction.text(), "stop");
}

TEST(Generate, GreedyIsDeterministicAndParses) {
  const auto& f = fixture();
  const Generator g(train_generator(f.envs, f.noisy, std::nullopt, {}, 0));
  for (const auto& t : f.trajs) {
    const auto a = g.generate(f.env, t, DecodeConfig::greedy());
    const auto b = g.generate(f.env, t, DecodeConfig::greedy());
    EXPECT_EQ(a.instruction, b.instruction);
    const auto clauses = parse_clauses(a.instruction);
    ASSERT_FALSE(clauses.empty());
    EXPECT_TRUE(std::holds_alternative<StopClause>(clauses.back()));
  }
}

TEST(Generate, TopOneEqualsGreedy) {
  const auto& f = fixture();
  const Generator g(train_generator(f.envs, f.noisy, std::nullopt, {}, 0));
  for (std::size_t i = 0; i < 20; ++i)
    EXPECT_EQ(g.generate(f.env, f.trajs[i], DecodeConfig::top_k(1, i)).instruction,
              g.generate(f.env, f.trajs[i], DecodeConfig::greedy()).instruction);
}

TEST(Generate, TopThreeSamplesDiffer) {
  const auto& f = fixture();
  const Generator g(train_generator(f.envs, f.noisy, std::nullopt, {}, 0));
  const auto greedy = g.generate(f.env, f.trajs[0], DecodeConfig::greedy());
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto s = g.generate(f.env, f.trajs[0], DecodeConfig::top_k(3, seed));
    distinct.insert(s.instruction.text());
    EXPECT_GE(greedy.log_likelihood, s.log_likelihood - 1e-12);
    EXPECT_NO_THROW(parse(s.instruction));
  }
  EXPECT_GE(distinct.size(), 2u);
}

TEST(Generate, CleanTrainedReproducesOracle) {
  const auto& f = fixture();
  const Generator g(train_generator(f.envs, f.clean, std::nullopt, {}, 0));
  double total = 0.0;
  for (const auto& p : f.clean) {
    const auto out = g.generate(f.env, *p.traj, DecodeConfig::greedy());
    total += proposition_f1(out.instruction, std::vector<Instruction>{p.instr}, false);
  }
  const double mean = total / static_cast<double>(f.clean.size());
  RecordProperty("mean_prop_f1", std::to_string(mean));
  EXPECT_GE(mean, 0.8);
}

TEST(Generate, ScoreRanksOracleAboveFlipped) {
  const auto& f = fixture();
  const Generator g(train_generator(f.envs, f.clean, std::nullopt, {}, 0));
  int better = 0;
  int turns = 0;
  for (const auto& p : f.clean) {
    auto clauses = parse_clauses(p.instr);
    bool flipped = false;
    for (auto& c : clauses)
      if (auto* t = std::get_if<TurnClause>(&c); t && t->direction != TurnDirection::around) {
        t->direction = t->direction == TurnDirection::left ? TurnDirection::right
                                                           : TurnDirection::left;
        flipped = true;
      }
    if (!flipped) continue;
    ++turns;
    if (g.score(f.env, *p.traj, p.instr) > g.score(f.env, *p.traj, render(clauses))) ++better;
  }
  ASSERT_GT(turns, 10);
  EXPECT_EQ(better, turns);
}

TEST(DecodeConfig, Validation) {
  EXPECT_THROW(DecodeConfig::top_k(0, 1).validate(), Error);
  EXPECT_THROW(DecodeConfig::top_k(3, 1, 0.0).validate(), Error);
  EXPECT_NO_THROW(DecodeConfig::greedy().validate());
}
