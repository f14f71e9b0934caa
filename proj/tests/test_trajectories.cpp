#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "srdf/trajectories.hpp"

using namespace srdf;
using srdf::testing::make_env;

TEST(Actions, StringRoundTrip) {
  for (const Action& a : {Action::forward(), Action::stop(), Action::left(37.25),
                          Action::right(180.0), Action::right(0.1 + 0.2)})
    EXPECT_EQ(action_from_string(action_to_string(a)), a);
  EXPECT_EQ(action_to_string(Action::left(90)), "left:90");
  EXPECT_THROW(action_from_string("left:0"), Error);
  EXPECT_THROW(action_from_string("right:181"), Error);
  EXPECT_THROW(action_from_string("jump"), Error);
}

TEST(ActionsFromPath, SingleNode) {
  const Environment env = make_env({{0, 0}, {0, 5}}, {{0, 1}});
  const ActionPlan plan = actions_from_path(env, {0}, 42.0);
  EXPECT_EQ(plan.headings, std::vector<double>{42.0});
  EXPECT_EQ(plan.actions, std::vector<Action>{Action::stop()});
}

TEST(ActionsFromPath, StraightLineHasNoTurns) {
  const Environment env = make_env({{0, 0}, {0, 5}, {0, 10}}, {{0, 1}, {1, 2}});
  const ActionPlan plan = actions_from_path(env, {0, 1, 2}, 0.0);
  EXPECT_EQ(plan.actions, (std::vector<Action>{Action::forward(), Action::forward(),
                                               Action::stop()}));
}

TEST(ActionsFromPath, RightAngleIsOneNinetyDegreeTurn) {
  // North, then east.
  const Environment env = make_env({{0, 0}, {0, 5}, {5, 5}}, {{0, 1}, {1, 2}});
  const ActionPlan plan = actions_from_path(env, {0, 1, 2}, 0.0);
  ASSERT_EQ(plan.actions.size(), 3u);
  EXPECT_EQ(plan.actions[0], Action::forward());
  EXPECT_EQ(plan.actions[1], Action::right(90.0));
  EXPECT_EQ(plan.headings, (std::vector<double>{0.0, 0.0, 90.0}));
}

TEST(ActionsFromPath, SmallDriftStaysForwardUnlessAmbiguous) {
  // 1 -> 2 drifts 20 degrees; 1 -> 3 is closer to straight ahead, so the
  // drift toward 2 has to become an explicit turn.
  const Environment env = make_env({{0, 0}, {0, 5}, {1.82, 10}, {-0.5, 10}},
                                   {{0, 1}, {1, 2}, {1, 3}});
  const ActionPlan with_rival = actions_from_path(env, {0, 1, 2}, 0.0);
  EXPECT_TRUE(with_rival.actions[1].is_turn());
  const ActionPlan plain = actions_from_path(env, {0, 1, 3}, 0.0);
  EXPECT_EQ(plain.actions[1], Action::forward());
}

TEST(ActionsFromPath, RejectsNonAdjacent) {
  const Environment env = make_env({{0, 0}, {0, 5}, {0, 10}}, {{0, 1}, {1, 2}});
  EXPECT_THROW(actions_from_path(env, {0, 2}, 0.0), Error);
  EXPECT_THROW(actions_from_path(env, {}, 0.0), Error);
}

TEST(PathLength, Definitions) {
  const Environment env = make_env({{0, 0}, {3, 4}, {3, 10}}, {{0, 1}, {1, 2}});
  EXPECT_EQ(path_length(env, {0}), 0.0);
  EXPECT_EQ(path_length(env, {0, 1}), 5.0);
  EXPECT_EQ(path_length(env, {0, 1, 2}), 11.0);
}

TEST(Sample, TwoNodeWorld) {
  const Environment env = make_env({{0, 0}, {0, 5}}, {{0, 1}});
  const auto trajs = sample_trajectories(env, 1, {1, 1}, 3);
  ASSERT_EQ(trajs.size(), 1u);
  EXPECT_EQ(trajs[0].nodes.size(), 2u);
  EXPECT_TRUE(env.adjacent(trajs[0].nodes[0], trajs[0].nodes[1]));
  EXPECT_EQ(sample_trajectories(env, 10, {1, 1}, 3).size(), 2u);
}

TEST(Sample, DeterministicAndInRange) {
  const Environment env = generate_environment(WorldGenConfig{}, 5, "w");
  const auto a = sample_trajectories(env, 100, {4, 7}, 9);
  const auto b = sample_trajectories(env, 100, {4, 7}, 9);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 100u);
  EXPECT_EQ(a[0].traj_id, "w:0000");
  for (const auto& t : a) {
    EXPECT_GE(t.steps(), 4u);
    EXPECT_LE(t.steps(), 7u);
    EXPECT_EQ(t.nodes, shortest_path(env, t.nodes.front(), t.nodes.back()));
  }
}

TEST(Sample, InvariantsAndReplayRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Environment env = generate_environment(WorldGenConfig{}, seed, "w");
    for (const auto& t : sample_trajectories(env, 50, {1, 8}, seed)) {
      EXPECT_NO_THROW(validate_trajectory(env, t));
      EXPECT_EQ(replay_actions(env, t.nodes.front(), t.headings.front(), t.actions),
                t.nodes);
      for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
        EXPECT_DOUBLE_EQ(t.headings[i + 1],
                         bearing(env.position(t.nodes[i]), env.position(t.nodes[i + 1])));
    }
  }
}

TEST(Validate, CatchesBrokenTrajectories) {
  const Environment env = make_env({{0, 0}, {0, 5}, {0, 10}}, {{0, 1}, {1, 2}});
  Trajectory good = make_trajectory(env, "t", {0, 1, 2}, 0.0);
  EXPECT_NO_THROW(validate_trajectory(env, good));
  Trajectory t = good;
  t.actions.back() = Action::forward();
  EXPECT_THROW(validate_trajectory(env, t), Error);
  t = good;
  t.nodes = {0, 2, 1};
  EXPECT_THROW(validate_trajectory(env, t), Error);
  t = good;
  t.env_id = "elsewhere";
  EXPECT_THROW(validate_trajectory(env, t), Error);
  t = good;
  t.headings.pop_back();
  EXPECT_THROW(validate_trajectory(env, t), Error);
}
