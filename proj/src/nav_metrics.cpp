#include "srdf/nav_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace srdf {

double dtw(std::span<const Point> reference, std::span<const Point> query) {
  if (reference.empty() || query.empty())
    throw Error(ErrorCode::empty_input, "dtw needs two non-empty sequences");
  const std::size_t m = query.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = distance(reference[i - 1], query[j - 1]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<Point> trajectory_points(const Environment& env,
                                     const Trajectory& traj) {
  std::vector<Point> pts;
  pts.reserve(traj.nodes.size());
  for (NodeId n : traj.nodes) pts.push_back(env.position(n));
  return pts;
}

NavScores score_episode(const Environment& env, const Trajectory& reference,
                        const Trajectory& followed, double success_radius) {
  if (reference.env_id != env.env_id() || followed.env_id != env.env_id())
    throw Error(ErrorCode::mismatched_environment,
                "episode trajectories do not belong to " + env.env_id());
  if (reference.nodes.empty() || followed.nodes.empty())
    throw Error(ErrorCode::empty_input, "empty trajectory in episode");
  const auto ref_pts = trajectory_points(env, reference);
  const auto fol_pts = trajectory_points(env, followed);
  const Point goal = ref_pts.back();

  NavScores s;
  s.ne = distance(fol_pts.back(), goal);
  s.sr = s.ne <= success_radius ? 1.0 : 0.0;
  double closest = s.ne;
  for (const Point& p : fol_pts) closest = std::min(closest, distance(p, goal));
  s.osr = closest <= success_radius ? 1.0 : 0.0;

  const double l = path_length(
      env, shortest_path(env, reference.nodes.front(), reference.nodes.back()));
  const double p = path_length(env, followed.nodes);
  s.spl = l == 0.0 ? s.sr : s.sr * l / std::max(p, l);

  s.dtw = dtw(ref_pts, fol_pts);
  s.ndtw = std::exp(-s.dtw / (static_cast<double>(ref_pts.size()) * success_radius));
  s.sdtw = s.sr * s.ndtw;
  return s;
}

}  // namespace srdf
