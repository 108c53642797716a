#pragma once

#include <vector>

#include "ovac/control.hpp"
#include "ovac/types.hpp"

namespace ovac {

/// Piecewise reference trajectory through (time, position, attitude)
/// waypoints, blended with a quintic smoothstep so velocity and
/// acceleration are continuous and analytic.
class Trajectory {
 public:
  struct Waypoint {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 attitude = Vec3::Zero();
  };

  Trajectory() = default;
  explicit Trajectory(std::vector<Waypoint> waypoints);

  RefSample sample(double t) const;
  double end_time() const { return waypoints_.back().t; }
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

 private:
  std::vector<Waypoint> waypoints_;
};

}  // namespace ovac
