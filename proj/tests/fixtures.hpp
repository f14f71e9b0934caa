#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "srdf/instr_lang.hpp"
#include "srdf/pairs.hpp"
#include "srdf/world.hpp"

namespace srdf::testing {

// Hand-built world; every node gets landmark 100 + id in the north sector
// unless `landmarks` overrides it.
inline Environment make_env(std::vector<Point> positions,
                            std::vector<Edge> edges,
                            std::vector<SectorLandmarks> landmarks = {},
                            std::string env_id = "fixture") {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Node n;
    n.id = static_cast<NodeId>(i);
    n.position = positions[i];
    if (i < landmarks.size())
      n.landmarks = landmarks[i];
    else
      n.landmarks[0] = {static_cast<LandmarkId>(100 + i)};
    nodes.push_back(std::move(n));
  }
  return Environment(std::move(env_id), Split::train, std::move(nodes),
                     std::move(edges), 0);
}

// One oracle-annotated pair per trajectory.
inline Pool oracle_pool(const Environment& env, const std::vector<Trajectory>& trajs,
                        const CorruptionConfig& corruption, std::uint64_t seed) {
  Pool pool;
  for (const auto& t : trajs) {
    PairedSample p;
    p.pair_id = t.traj_id;
    p.traj = std::make_shared<const Trajectory>(t);
    p.instr = oracle_annotate(env, t, corruption, derive_seed(seed, hash_string(t.traj_id)));
    pool.push_back(std::move(p));
  }
  return pool;
}

// Swaps every left and right turn.
inline Instruction flip_turns(const Instruction& instr) {
  std::vector<Clause> clauses = parse_clauses(instr);
  for (auto& c : clauses)
    if (auto* t = std::get_if<TurnClause>(&c)) {
      if (t->direction == TurnDirection::left)
        t->direction = TurnDirection::right;
      else if (t->direction == TurnDirection::right)
        t->direction = TurnDirection::left;
    }
  return render(clauses);
}

inline EnvironmentSet single_world_set(const Environment& env) {
  EnvironmentSet set;
  set.add(env);
  return set;
}

}  // namespace srdf::testing
