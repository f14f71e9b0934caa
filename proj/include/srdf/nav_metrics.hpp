#pragma once

#include <span>

#include "srdf/trajectories.hpp"
#include "srdf/world.hpp"

namespace srdf {

inline constexpr double kSuccessRadius = 3.0;  // meters

struct NavScores {
  double ne = 0.0;    // navigation error, meters
  double sr = 0.0;    // {0, 1}
  double osr = 0.0;   // {0, 1}
  double spl = 0.0;
  double dtw = 0.0;   // meters
  double ndtw = 0.0;  // (0, 1]
  double sdtw = 0.0;
  friend bool operator==(const NavScores&, const NavScores&) = default;
};

// Minimum summed Euclidean cost over monotone warping paths covering both
// sequences. Throws Error(empty_input) if either is empty.
double dtw(std::span<const Point> reference, std::span<const Point> query);

std::vector<Point> trajectory_points(const Environment& env,
                                     const Trajectory& traj);

NavScores score_episode(const Environment& env, const Trajectory& reference,
                        const Trajectory& followed,
                        double success_radius = kSuccessRadius);

}  // namespace srdf
