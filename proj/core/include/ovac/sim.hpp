#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ovac/allocation.hpp"
#include "ovac/control.hpp"
#include "ovac/trajectory.hpp"

namespace ovac {

struct NoiseSettings {
  double pos_std = 0.0;   ///< [m]
  double att_std = 0.0;   ///< [rad]
  double vel_std = 0.0;   ///< [m/s]
  double rate_std = 0.0;  ///< [rad/s]
};

/// Closed-loop scenario description. Rates: physics at 1/physics_dt, the
/// high-level controller + allocator every high_level_divisor physics
/// steps, the low-level gimbal/mixer loop every low_level_divisor steps.
struct Scenario {
  std::string name = "scenario";
  PlatformConfig platform;
  Trajectory trajectory;
  AllocatorMode mode = AllocatorMode::DownwashAware;
  double o_min = 0.0;          ///< [m], wake clearance used by the allocator
  double duration = 5.0;       ///< [s]
  std::uint64_t seed = 0;
  NoiseSettings noise;
  double command_delay = 0.02; ///< [s] transport delay on allocator output
  bool downwash_enabled = true;
  std::optional<AllocatorWeights> weights;  ///< defaults when unset
  TrackingGains gains;
  GimbalPidGains gimbal_gains;
  double thrust_time_constant = 0.015;  ///< [s], first-order rotor lag
  double physics_dt = 1e-3;             ///< [s]
  int high_level_divisor = 10;
  int low_level_divisor = 2;

  void validate() const;
};

/// One physics-tick record. Allocation-rate quantities hold the latest
/// values between allocator ticks; allocation_tick marks rows where the
/// allocator actually ran.
struct SimRecord {
  double t = 0.0;
  bool allocation_tick = false;
  Vec3 position, attitude, velocity, body_rates;
  Vec3 ref_position, ref_attitude;
  Wrench u_cmd;           ///< desired wrench u^d
  VecX x_cmd;             ///< commanded X from the allocator
  VecX x_act;             ///< achieved X (gimbal state, summed prop thrusts)
  VecX f_exact;           ///< F*
  VecX slack;
  double efficiency = 1.0;
  VecX o_values;          ///< O(x_cmd)
  VecX o_min_gated;       ///< Algorithm-1 gate at the scenario o_min
  Wrench ext;             ///< downwash disturbance wrench
  VecX prop_thrusts;      ///< 4N actual per-propeller thrusts
  double recon_err = 0.0; ///< ||W F* - u^d|| / max(1, ||u^d||)
  int qp_status = 0;
  int qp_iterations = 0;
  bool rows_dropped = false;   ///< wake rows removed on infeasibility
  bool wrench_scaled = false;  ///< wrench shrunk on infeasibility
};

struct SimLog {
  std::string scenario_name;
  std::string mode;
  double o_min = 0.0;
  std::uint64_t seed = 0;
  int n_generators = 0;
  bool diverged = false;
  double diverged_at = -1.0;
  std::vector<SimRecord> records;
};

/// Runs the closed-loop simulation. Divergence stops the run early; the
/// partial log is returned with `diverged` set.
SimLog run(const Scenario& scenario);

struct Metrics {
  Vec3 rms_pos_err = Vec3::Zero();
  double rms_pos_err_norm = 0.0;
  Vec3 rms_att_err = Vec3::Zero();
  double min_efficiency = 1.0;
  double mean_efficiency = 1.0;
  double max_z_drop = 0.0;       ///< max(z_ref - z)
  int violation_ticks = 0;       ///< allocation ticks with a gated O < o_min^2
  double total_impulse = 0.0;    ///< integral of sum T dt [N s]
  double max_reconstruction_err = 0.0;  ///< max ||W F* - u^d|| / max(1, ||u^d||)
  int allocation_calls = 0;
  bool diverged = false;
  double duration = 0.0;
};

/// Deterministic summary statistics of a log. Throws EmptyLog.
Metrics metrics(const SimLog& log);

inline constexpr const char* kLogSchemaVersion = "1";

/// CSV serialization, one row per physics tick. The optional timestamp
/// header line can be suppressed for byte-reproducible output.
void write_csv(const SimLog& log, std::ostream& out, bool with_timestamp);

/// Summary as `key = value` structured text (consumed by the compare
/// command).
void write_summary(const SimLog& log, const Metrics& m, std::ostream& out);

}  // namespace ovac
