#include "ovac/trajectory.hpp"

#include <cmath>

namespace ovac {

Trajectory::Trajectory(std::vector<Waypoint> waypoints)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw ConfigError("trajectory needs >= 1 waypoint");
  for (size_t i = 1; i < waypoints_.size(); ++i)
    if (waypoints_[i].t <= waypoints_[i - 1].t)
      throw ConfigError("trajectory waypoint times must be increasing");
  for (const auto& w : waypoints_)
    if (std::abs(w.attitude.y()) >= 85.0 * M_PI / 180.0)
      throw ConfigError("reference pitch too close to the Euler singularity");
}

RefSample Trajectory::sample(double t) const {
  RefSample ref;
  if (t <= waypoints_.front().t) {
    ref.position = waypoints_.front().position;
    ref.attitude = waypoints_.front().attitude;
    return ref;
  }
  if (t >= waypoints_.back().t) {
    ref.position = waypoints_.back().position;
    ref.attitude = waypoints_.back().attitude;
    return ref;
  }
  size_t k = 1;
  while (waypoints_[k].t < t) ++k;
  const Waypoint& a = waypoints_[k - 1];
  const Waypoint& b = waypoints_[k];
  const double span = b.t - a.t;
  const double u = (t - a.t) / span;
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  const double ds = 30.0 * u * u * (1.0 + u * (-2.0 + u));
  const double dds = u * (60.0 + u * (-180.0 + 120.0 * u));

  ref.position = a.position + s * (b.position - a.position);
  ref.velocity = ds / span * (b.position - a.position);
  ref.acceleration = dds / (span * span) * (b.position - a.position);
  ref.attitude = a.attitude + s * (b.attitude - a.attitude);
  ref.attitude_rate = ds / span * (b.attitude - a.attitude);
  return ref;
}

}  // namespace ovac
