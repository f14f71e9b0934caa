#include "srdf/world.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace srdf {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unparseable_instruction: return "unparseable_instruction";
    case ErrorCode::unknown_node: return "unknown_node";
    case ErrorCode::invalid_trajectory: return "invalid_trajectory";
    case ErrorCode::mismatched_environment: return "mismatched_environment";
    case ErrorCode::schema_violation: return "schema_violation";
    case ErrorCode::io: return "io";
    case ErrorCode::non_finite_loss: return "non_finite_loss";
    case ErrorCode::missing_model: return "missing_model";
    case ErrorCode::empty_filter: return "empty_filter";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::invariant_violation: return "invariant_violation";
  }
  return "unknown";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val_seen: return "val_seen";
    case Split::val_unseen: return "val_unseen";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val_seen") return Split::val_seen;
  if (name == "val_unseen") return Split::val_unseen;
  throw Error(ErrorCode::invalid_argument,
              "unknown split '" + std::string(name) + "'");
}

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

double bearing(Point a, Point b) {
  constexpr double kRadToDeg = 57.295779513082320876798154814105;
  return normalize_heading(std::atan2(b.x - a.x, b.y - a.y) * kRadToDeg);
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

Environment::Environment(std::string env_id, Split split,
                         std::vector<Node> nodes, std::vector<Edge> edges,
                         std::uint64_t rng_seed)
    : env_id_(std::move(env_id)),
      split_(split),
      nodes_(std::move(nodes)),
      rng_seed_(rng_seed) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::invalid_argument,
                "environment '" + env_id_ + "': " + why);
  };
  if (nodes_.empty()) fail("no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i) fail("node ids must be dense and ordered");
    bool any = false;
    for (auto& sector : nodes_[i].landmarks) {
      std::sort(sector.begin(), sector.end());
      any = any || !sector.empty();
    }
    if (!any) fail("node " + std::to_string(i) + " has no landmark");
  }
  {
    std::set<std::pair<double, double>> seen;
    for (const auto& n : nodes_)
      if (!seen.emplace(n.position.x, n.position.y).second)
        fail("duplicate node position");
  }
  for (auto& [a, b] : edges) {
    if (a == b) fail("self edge");
    if (a >= nodes_.size() || b >= nodes_.size()) fail("edge to unknown node");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    fail("duplicate edge");
  edges_ = std::move(edges);
  adjacency_.assign(nodes_.size(), {});
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  if (!is_connected(*this)) fail("graph is not connected");
  distances_ = std::make_shared<const DistanceTable>(*this);
}

const Node& Environment::node(NodeId id) const {
  if (!contains(id))
    throw Error(ErrorCode::unknown_node, "unknown node " + std::to_string(id) +
                                             " in " + env_id_);
  return nodes_[id];
}

std::span<const NodeId> Environment::neighbors(NodeId id) const {
  if (!contains(id))
    throw Error(ErrorCode::unknown_node, "unknown node " + std::to_string(id) +
                                             " in " + env_id_);
  return adjacency_[id];
}

bool Environment::adjacent(NodeId a, NodeId b) const {
  auto adj = neighbors(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

bool is_connected(const Environment& env) {
  std::vector<char> seen(env.size(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : env.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == env.size();
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

double round_cm(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

Environment generate_environment(const WorldGenConfig& config,
                                 std::uint64_t seed, std::string env_id,
                                 Split split) {
  const int n = config.nodes;
  const double d = config.mean_degree;
  if (n < 2)
    throw Error(ErrorCode::invalid_argument, "world needs at least 2 nodes");
  if (n > 2 && d < 2.0)
    throw Error(ErrorCode::invalid_argument,
                "mean degree below 2 cannot keep a >2-node world connected");
  if (d > n - 1 || d < 1.0)
    throw Error(ErrorCode::invalid_argument, "mean degree out of range");
  if (config.landmark_vocab < kSectorCount)
    throw Error(ErrorCode::invalid_argument, "landmark vocabulary too small");
  if (config.area_side <= 0.0)
    throw Error(ErrorCode::invalid_argument, "area side must be positive");

  Rng rng(seed);
  std::vector<Node> nodes(static_cast<std::size_t>(n));
  double min_sep = config.min_separation;
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0 && attempt % 2000 == 0) min_sep *= 0.5;
      Point p{round_cm(uniform01(rng) * config.area_side),
              round_cm(uniform01(rng) * config.area_side)};
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        const double dd = distance(p, nodes[j].position);
        ok = dd >= min_sep && dd > 0.0;
      }
      if (ok) {
        nodes[i].id = static_cast<NodeId>(i);
        nodes[i].position = p;
        break;
      }
    }
  }

  struct Pair {
    double len;
    NodeId a, b;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      pairs.push_back({distance(nodes[a].position, nodes[b].position),
                       static_cast<NodeId>(a), static_cast<NodeId>(b)});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.len != y.len) return x.len < y.len;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<Edge> edges;
  std::vector<std::vector<double>> directions(n);  // bearings of incident edges
  std::set<Edge> present;
  const auto add_edge = [&](NodeId a, NodeId b) {
    edges.emplace_back(a, b);
    present.emplace(a, b);
    directions[a].push_back(bearing(nodes[a].position, nodes[b].position));
    directions[b].push_back(bearing(nodes[b].position, nodes[a].position));
  };

  DisjointSets sets(n);
  for (const auto& p : pairs)
    if (sets.unite(p.a, p.b)) add_edge(p.a, p.b);

  const std::size_t target = std::max<std::size_t>(
      n - 1, static_cast<std::size_t>(std::lround(n * d / 2.0)));
  const auto too_close = [&](NodeId from, double dir) {
    for (double other : directions[from])
      if (std::abs(normalize_delta(dir - other)) < config.min_edge_angle)
        return true;
    return false;
  };
  for (const auto& p : pairs) {
    if (edges.size() >= target) break;
    if (present.count({p.a, p.b})) continue;
    if (too_close(p.a, bearing(nodes[p.a].position, nodes[p.b].position)) ||
        too_close(p.b, bearing(nodes[p.b].position, nodes[p.a].position)))
      continue;
    add_edge(p.a, p.b);
  }

  // Every sector holding a neighbor direction carries a landmark; the other
  // sectors are filled at random. Landmarks are distinct within a node.
  for (int i = 0; i < n; ++i) {
    std::array<bool, kSectorCount> occupied{};
    for (double dir : directions[i])
      occupied[static_cast<std::size_t>(sector_of_delta(dir))] = true;
    for (int s = 0; s < kSectorCount; ++s)
      if (uniform01(rng) < config.extra_landmark_prob) occupied[s] = true;
    std::vector<LandmarkId> pool(static_cast<std::size_t>(config.landmark_vocab));
    std::iota(pool.begin(), pool.end(), 0);
    std::size_t next = 0;
    for (int s = 0; s < kSectorCount; ++s) {
      if (!occupied[s]) continue;
      const std::size_t pick =
          next + uniform_index(rng, pool.size() - next);
      std::swap(pool[next], pool[pick]);
      nodes[i].landmarks[s].push_back(pool[next++]);
    }
  }

  return Environment(std::move(env_id), split, std::move(nodes),
                     std::move(edges), seed);
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

int relative_sector(int absolute_sector, double heading) {
  return sector_of_delta(45.0 * absolute_sector - heading);
}

Observation observation(const Environment& env, NodeId node, double heading) {
  const Node& here = env.node(node);
  Observation obs;
  obs.at_node = node;
  obs.heading = normalize_heading(heading);
  for (int s = 0; s < kSectorCount; ++s) {
    auto& bucket = obs.visible[relative_sector(s, obs.heading)];
    bucket.insert(bucket.end(), here.landmarks[s].begin(),
                  here.landmarks[s].end());
  }
  for (auto& bucket : obs.visible) std::sort(bucket.begin(), bucket.end());
  for (NodeId nb : env.neighbors(node)) {
    const Point there = env.position(nb);
    const double b = bearing(here.position, there);
    obs.candidates.push_back({nb, normalize_delta(b - obs.heading),
                              distance(here.position, there),
                              relative_sector(sector_of_delta(b), obs.heading)});
  }
  return obs;
}

DistanceTable::DistanceTable(const Environment& env)
    : n_(env.size()), d_(n_ * n_, std::numeric_limits<double>::infinity()) {
  for (std::size_t s = 0; s < n_; ++s) {
    double* row = &d_[s * n_];
    std::vector<char> done(n_, 0);
    row[s] = 0.0;
    for (std::size_t iter = 0; iter < n_; ++iter) {
      std::size_t u = n_;
      for (std::size_t v = 0; v < n_; ++v)
        if (!done[v] && (u == n_ || row[v] < row[u])) u = v;
      if (u == n_ || std::isinf(row[u])) break;
      done[u] = 1;
      for (NodeId v : env.neighbors(static_cast<NodeId>(u))) {
        const double cand =
            row[u] + distance(env.position(static_cast<NodeId>(u)),
                              env.position(v));
        if (cand < row[v]) row[v] = cand;
      }
    }
  }
}

std::vector<NodeId> shortest_path(const Environment& env,
                                  const DistanceTable& dist, NodeId start,
                                  NodeId goal) {
  env.node(start);
  env.node(goal);
  std::vector<NodeId> path{start};
  const double total = dist(start, goal);
  const double eps = 1e-9 * std::max(1.0, total);
  NodeId u = start;
  double walked = 0.0;
  while (u != goal) {
    NodeId chosen = u;
    double step = 0.0;
    for (NodeId v : env.neighbors(u)) {
      const double w = distance(env.position(u), env.position(v));
      if (dist(v, goal) < dist(u, goal) &&
          std::abs(walked + w + dist(v, goal) - total) <= eps) {
        chosen = v;
        step = w;
        break;  // neighbors are sorted, so this is the smallest id
      }
    }
    if (chosen == u)
      throw Error(ErrorCode::invalid_argument, "shortest path reconstruction failed");
    walked += step;
    path.push_back(chosen);
    u = chosen;
  }
  return path;
}

std::vector<NodeId> shortest_path(const Environment& env, NodeId start,
                                  NodeId goal) {
  return shortest_path(env, env.distances(), start, goal);
}

// ---------------------------------------------------------------------------
// EnvironmentSet
// ---------------------------------------------------------------------------

void EnvironmentSet::add(Environment env) {
  std::string id = env.env_id();
  if (envs_.count(id))
    throw Error(ErrorCode::invalid_argument, "duplicate environment " + id);
  envs_.emplace(std::move(id),
                std::make_shared<const Environment>(std::move(env)));
}

const Environment& EnvironmentSet::at(const std::string& env_id) const {
  auto it = envs_.find(env_id);
  if (it == envs_.end())
    throw Error(ErrorCode::mismatched_environment,
                "unknown environment '" + env_id + "'");
  return *it->second;
}

bool EnvironmentSet::contains(const std::string& env_id) const {
  return envs_.count(env_id) != 0;
}

std::vector<const Environment*> EnvironmentSet::by_split(Split split) const {
  std::vector<const Environment*> out;
  for (const auto& [id, env] : envs_)
    if (env->split() == split) out.push_back(env.get());
  return out;
}

EnvironmentSet generate_world_set(const WorldSetConfig& config,
                                  std::uint64_t seed) {
  EnvironmentSet set;
  const auto emit = [&](Split split, int count) {
    for (int i = 0; i < count; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s-%03d",
                    std::string(split_name(split)).c_str(), i);
      set.add(generate_environment(
          config.gen,
          derive_seed(seed, static_cast<int>(split) + 1, static_cast<unsigned>(i)),
          id, split));
    }
  };
  emit(Split::train, config.train_worlds);
  emit(Split::val_seen, config.val_seen_worlds);
  emit(Split::val_unseen, config.val_unseen_worlds);
  return set;
}

}  // namespace srdf
