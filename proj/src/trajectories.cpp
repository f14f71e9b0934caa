#include "srdf/trajectories.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace srdf {

std::string action_to_string(const Action& action) {
  switch (action.kind) {
    case ActionKind::forward: return "forward";
    case ActionKind::stop: return "stop";
    case ActionKind::turn_left: return "left:" + format_double(action.degrees);
    case ActionKind::turn_right:
      return "right:" + format_double(action.degrees);
  }
  return "stop";
}

Action action_from_string(std::string_view text) {
  if (text == "forward") return Action::forward();
  if (text == "stop") return Action::stop();
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    double deg = 0.0;
    auto res = std::from_chars(tail.data(), tail.data() + tail.size(), deg);
    if (res.ec == std::errc() && res.ptr == tail.data() + tail.size() &&
        deg > 0.0 && deg <= 180.0) {
      if (head == "left") return Action::left(deg);
      if (head == "right") return Action::right(deg);
    }
  }
  throw Error(ErrorCode::schema_violation,
              "bad action '" + std::string(text) + "'");
}

namespace {

// Neighbor whose direction is angularly closest to `heading`, ties by id.
NodeId closest_neighbor(const Environment& env, NodeId at, double heading) {
  NodeId best = at;
  double best_delta = 1e300;
  const Point here = env.position(at);
  for (NodeId nb : env.neighbors(at)) {
    const double d =
        std::abs(normalize_delta(bearing(here, env.position(nb)) - heading));
    if (d < best_delta) {
      best_delta = d;
      best = nb;
    }
  }
  return best;
}

void require_adjacent(const Environment& env, NodeId a, NodeId b) {
  if (!env.contains(a) || !env.contains(b) || !env.adjacent(a, b))
    throw Error(ErrorCode::invalid_trajectory,
                "nodes " + std::to_string(a) + " and " + std::to_string(b) +
                    " are not adjacent in " + env.env_id());
}

}  // namespace

ActionPlan actions_from_path(const Environment& env,
                             const std::vector<NodeId>& nodes,
                             double initial_heading, double turn_threshold) {
  if (nodes.empty())
    throw Error(ErrorCode::invalid_trajectory, "empty path");
  if (!env.contains(nodes.front()))
    throw Error(ErrorCode::invalid_trajectory, "unknown start node");
  ActionPlan plan;
  double h = normalize_heading(initial_heading);
  plan.headings.push_back(h);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    require_adjacent(env, nodes[i], nodes[i + 1]);
    const double b = bearing(env.position(nodes[i]), env.position(nodes[i + 1]));
    const double delta = normalize_delta(b - h);
    // Forward only when replay would pick the same neighbor without turning.
    if ((std::abs(delta) <= turn_threshold &&
         closest_neighbor(env, nodes[i], h) == nodes[i + 1]) ||
        delta == 0.0) {
      plan.actions.push_back(Action::forward());
    } else if (delta > 0) {
      plan.actions.push_back(Action::right(delta));
    } else {
      plan.actions.push_back(Action::left(-delta));
    }
    h = b;
    plan.headings.push_back(h);
  }
  plan.actions.push_back(Action::stop());
  return plan;
}

std::vector<NodeId> replay_actions(const Environment& env, NodeId start,
                                   double initial_heading,
                                   const std::vector<Action>& actions) {
  std::vector<NodeId> nodes{start};
  double h = normalize_heading(initial_heading);
  NodeId at = start;
  for (const Action& a : actions) {
    if (a.kind == ActionKind::stop) break;
    h = normalize_heading(h + a.signed_degrees());
    const NodeId next = closest_neighbor(env, at, h);
    h = bearing(env.position(at), env.position(next));
    at = next;
    nodes.push_back(at);
  }
  return nodes;
}

double path_length(const Environment& env, const std::vector<NodeId>& nodes) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    require_adjacent(env, nodes[i], nodes[i + 1]);
    total += distance(env.position(nodes[i]), env.position(nodes[i + 1]));
  }
  return total;
}

Trajectory make_trajectory(const Environment& env, std::string traj_id,
                           const std::vector<NodeId>& nodes,
                           double initial_heading) {
  ActionPlan plan = actions_from_path(env, nodes, initial_heading);
  return {std::move(traj_id), env.env_id(), nodes, std::move(plan.headings),
          std::move(plan.actions)};
}

void validate_trajectory(const Environment& env, const Trajectory& traj) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::invalid_trajectory,
                "trajectory '" + traj.traj_id + "': " + why);
  };
  if (traj.env_id != env.env_id()) fail("belongs to " + traj.env_id);
  if (traj.nodes.empty()) fail("no nodes");
  if (traj.headings.size() != traj.nodes.size() ||
      traj.actions.size() != traj.nodes.size())
    fail("length mismatch");
  for (NodeId n : traj.nodes)
    if (!env.contains(n)) fail("unknown node " + std::to_string(n));
  for (std::size_t i = 0; i + 1 < traj.nodes.size(); ++i) {
    if (!env.adjacent(traj.nodes[i], traj.nodes[i + 1]))
      fail("non-adjacent step " + std::to_string(i));
    const Action& a = traj.actions[i];
    if (a.kind == ActionKind::stop) fail("stop before the final node");
    if (a.is_turn() && !(a.degrees > 0.0 && a.degrees <= 180.0))
      fail("turn magnitude out of range");
  }
  if (traj.actions.back().kind != ActionKind::stop) fail("final action is not stop");
}

std::vector<Trajectory> sample_trajectories(const Environment& env, int count,
                                            HopRange hops, std::uint64_t seed,
                                            const std::string& id_prefix) {
  if (count < 1)
    throw Error(ErrorCode::invalid_argument, "count must be at least 1");
  if (hops.min < 0 || hops.max < hops.min)
    throw Error(ErrorCode::invalid_argument, "bad hop range");
  const DistanceTable& dist = env.distances();
  std::vector<std::vector<NodeId>> paths;
  for (NodeId s = 0; s < env.size(); ++s) {
    for (NodeId g = 0; g < env.size(); ++g) {
      if (s == g && hops.min > 0) continue;
      auto path = shortest_path(env, dist, s, g);
      const int h = static_cast<int>(path.size()) - 1;
      if (h >= hops.min && h <= hops.max) paths.push_back(std::move(path));
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < paths.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, paths.size() - i);
    std::swap(paths[i], paths[j]);
  }
  if (paths.size() > static_cast<std::size_t>(count))
    paths.resize(static_cast<std::size_t>(count));
  const std::string prefix = id_prefix.empty() ? env.env_id() : id_prefix;
  std::vector<Trajectory> out;
  out.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double heading = static_cast<double>(uniform_index(rng, 360));
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), ":%04zu", i);
    out.push_back(make_trajectory(env, prefix + suffix, paths[i], heading));
  }
  return out;
}

}  // namespace srdf
