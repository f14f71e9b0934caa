#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srdf/common.hpp"

namespace srdf {

using NodeId = std::uint32_t;
using LandmarkId = std::uint32_t;

enum class Split { train, val_seen, val_unseen };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);
// Compass bearing from a to b in [0, 360).
double bearing(Point a, Point b);

// Landmark ids bucketed by sector. For a Node the sectors are absolute
// compass sectors (0 = north, 2 = east); inside an Observation they are
// relative to the agent's heading (0 = ahead, 2 = right, 6 = left).
using SectorLandmarks = std::array<std::vector<LandmarkId>, kSectorCount>;

struct Node {
  NodeId id = 0;
  Point position;
  SectorLandmarks landmarks;
  friend bool operator==(const Node&, const Node&) = default;
};

using Edge = std::pair<NodeId, NodeId>;

class DistanceTable;

// A connected navigation graph. Node ids are dense: nodes()[i].id == i.
// The constructor validates every invariant and throws Error otherwise.
class Environment {
 public:
  Environment(std::string env_id, Split split, std::vector<Node> nodes,
              std::vector<Edge> edges, std::uint64_t rng_seed);

  const std::string& env_id() const { return env_id_; }
  Split split() const { return split_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  // Normalized (a < b) and sorted.
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return id < nodes_.size(); }
  const Node& node(NodeId id) const;
  Point position(NodeId id) const { return node(id).position; }
  // Sorted by id.
  std::span<const NodeId> neighbors(NodeId id) const;
  bool adjacent(NodeId a, NodeId b) const;
  // All-pairs shortest metric distances, computed once at construction.
  const DistanceTable& distances() const { return *distances_; }

  friend bool operator==(const Environment& a, const Environment& b) {
    return a.env_id_ == b.env_id_ && a.split_ == b.split_ &&
           a.rng_seed_ == b.rng_seed_ && a.nodes_ == b.nodes_ &&
           a.edges_ == b.edges_;
  }

 private:
  std::string env_id_;
  Split split_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::shared_ptr<const DistanceTable> distances_;
  std::uint64_t rng_seed_;
};

struct WorldGenConfig {
  int nodes = 30;
  double mean_degree = 4.0;
  int landmark_vocab = 40;
  double area_side = 30.0;   // meters
  double min_separation = 2.0;
  // Extra edges closer than this to an existing edge at either endpoint are
  // skipped, so neighbor directions stay distinguishable.
  double min_edge_angle = 20.0;
  // Probability that a sector without a neighbor still gets a landmark.
  double extra_landmark_prob = 0.3;
};

Environment generate_environment(const WorldGenConfig& config,
                                 std::uint64_t seed,
                                 std::string env_id = "world",
                                 Split split = Split::train);

struct Candidate {
  NodeId node = 0;
  double heading_delta = 0.0;  // (-180, 180]
  double distance = 0.0;
  // Relative sector whose landmarks lie in this candidate's direction (the
  // absolute sector of its bearing, seen from the current heading).
  int sector = 0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Observation {
  NodeId at_node = 0;
  double heading = 0.0;  // [0, 360)
  SectorLandmarks visible;
  std::vector<Candidate> candidates;  // sorted by node id
  friend bool operator==(const Observation&, const Observation&) = default;
};

// Relative sector in which an absolute compass sector appears at `heading`.
int relative_sector(int absolute_sector, double heading);

Observation observation(const Environment& env, NodeId node, double heading);

// All-pairs metric distances, used for shortest paths and sampling.
class DistanceTable {
 public:
  explicit DistanceTable(const Environment& env);
  double operator()(NodeId a, NodeId b) const { return d_[a * n_ + b]; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// Minimum-length path; among equal-length paths the lexicographically
// smallest node-id sequence wins.
std::vector<NodeId> shortest_path(const Environment& env, NodeId start,
                                  NodeId goal);
std::vector<NodeId> shortest_path(const Environment& env,
                                  const DistanceTable& dist, NodeId start,
                                  NodeId goal);

bool is_connected(const Environment& env);

// Environments keyed by id; shared read-only across pools and models.
class EnvironmentSet {
 public:
  void add(Environment env);
  const Environment& at(const std::string& env_id) const;
  bool contains(const std::string& env_id) const;
  std::vector<const Environment*> by_split(Split split) const;
  std::size_t size() const { return envs_.size(); }
  auto begin() const { return envs_.begin(); }
  auto end() const { return envs_.end(); }

 private:
  std::map<std::string, std::shared_ptr<const Environment>> envs_;
};

struct WorldSetConfig {
  WorldGenConfig gen;
  int train_worlds = 60;
  int val_seen_worlds = 0;
  int val_unseen_worlds = 20;
};

EnvironmentSet generate_world_set(const WorldSetConfig& config,
                                  std::uint64_t seed);

}  // namespace srdf
