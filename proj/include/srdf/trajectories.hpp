#pragma once

#include <string>
#include <utility>
#include <vector>

#include "srdf/world.hpp"

namespace srdf {

enum class ActionKind { forward, turn_left, turn_right, stop };

// One per trajectory step. A turn action means "rotate by `degrees`, then
// move forward"; plain forward absorbs heading drift below the turn
// threshold.
struct Action {
  ActionKind kind = ActionKind::stop;
  double degrees = 0.0;  // turn magnitude in (0, 180]; 0 otherwise

  static Action forward() { return {ActionKind::forward, 0.0}; }
  static Action stop() { return {ActionKind::stop, 0.0}; }
  static Action left(double deg) { return {ActionKind::turn_left, deg}; }
  static Action right(double deg) { return {ActionKind::turn_right, deg}; }
  bool is_turn() const {
    return kind == ActionKind::turn_left || kind == ActionKind::turn_right;
  }
  // Signed rotation, positive clockwise.
  double signed_degrees() const {
    return kind == ActionKind::turn_left ? -degrees
           : kind == ActionKind::turn_right ? degrees
                                            : 0.0;
  }
  friend bool operator==(const Action&, const Action&) = default;
};

std::string action_to_string(const Action& action);
Action action_from_string(std::string_view text);

struct Trajectory {
  std::string traj_id;
  std::string env_id;
  std::vector<NodeId> nodes;       // length >= 1
  std::vector<double> headings;    // heading held on arrival at nodes[i]
  std::vector<Action> actions;     // same length, last is stop

  std::size_t steps() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline constexpr double kDefaultTurnThreshold = 30.0;

struct ActionPlan {
  std::vector<double> headings;
  std::vector<Action> actions;
};

// Throws Error(invalid_trajectory) on non-adjacent consecutive nodes.
ActionPlan actions_from_path(const Environment& env,
                             const std::vector<NodeId>& nodes,
                             double initial_heading,
                             double turn_threshold = kDefaultTurnThreshold);

// Executes actions from a start pose; the inverse of actions_from_path.
std::vector<NodeId> replay_actions(const Environment& env, NodeId start,
                                   double initial_heading,
                                   const std::vector<Action>& actions);

double path_length(const Environment& env, const std::vector<NodeId>& nodes);

Trajectory make_trajectory(const Environment& env, std::string traj_id,
                           const std::vector<NodeId>& nodes,
                           double initial_heading);

// Throws Error(invalid_trajectory) describing the first violated invariant.
void validate_trajectory(const Environment& env, const Trajectory& traj);

struct HopRange {
  int min = 4;
  int max = 7;
};

// Shortest-path trajectories between distinct (start, goal) pairs whose hop
// count lies in `hops`. Returns fewer than `count` when the world runs out
// of pairs.
std::vector<Trajectory> sample_trajectories(const Environment& env, int count,
                                            HopRange hops, std::uint64_t seed,
                                            const std::string& id_prefix = {});

}  // namespace srdf
