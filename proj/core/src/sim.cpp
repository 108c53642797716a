#include "ovac/sim.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <deque>
#include <random>

#include "ovac/dynamics.hpp"

namespace ovac {

void Scenario::validate() const {
  platform.validate();
  if (duration <= 0) throw ConfigError("scenario duration must be > 0");
  if (physics_dt <= 0 || physics_dt > 0.02)
    throw ConfigError("physics_dt must be in (0, 0.02]");
  if (high_level_divisor < 1 || low_level_divisor < 1)
    throw ConfigError("rate divisors must be >= 1");
  if (command_delay < 0) throw ConfigError("command_delay must be >= 0");
  if (o_min < 0) throw ConfigError("o_min must be >= 0");
  if (thrust_time_constant < 0)
    throw ConfigError("thrust_time_constant must be >= 0");
  gains.validate();
  gimbal_gains.validate();
  if (weights) weights->validate(platform.n_generators);
}

namespace {

struct GimbalState {
  double alpha = 0.0, beta = 0.0;
  double alpha_rate = 0.0, beta_rate = 0.0;
};

int qp_status_code(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return 0;
    case QpStatus::Infeasible: return 1;
    case QpStatus::MaxIter: return 2;
  }
  return -1;
}

}  // namespace

SimLog run(const Scenario& scenario) {
  scenario.validate();
  const PlatformConfig& cfg = scenario.platform;
  const int n = cfg.n_generators;
  const double dt = scenario.physics_dt;

  const DynamicsParams dyn = DynamicsParams::from_config(cfg);
  AllocatorWeights weights =
      scenario.weights ? *scenario.weights : AllocatorWeights::defaults(n);
  weights.o_min =
      scenario.mode == AllocatorMode::DownwashAware ? scenario.o_min : 0.0;
  const Allocator allocator(cfg, weights, scenario.mode);
  const QuadMixer mixer = QuadMixer::from_config(cfg);
  const MatX& w_alloc = allocator.matrices().w;

  const double jx = cfg.module_inertia_diag.x() * 1e-4;
  const double jy = cfg.module_inertia_diag.y() * 1e-4;

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SimLog log;
  log.scenario_name = scenario.name;
  log.mode = to_string(scenario.mode);
  log.o_min = scenario.o_min;
  log.seed = scenario.seed;
  log.n_generators = n;

  // Initial condition: at rest on the reference with level actuators at
  // the hover thrust share.
  const RefSample ref0 = scenario.trajectory.sample(0.0);
  PlatformState ps;
  ps.position = ref0.position;
  ps.attitude = ref0.attitude;
  ps.actuators = AllocationVector(n);

  AllocationVector x_cmd_prev(n);
  const double hover_thrust = dyn.mass * kGravity / n;
  for (int i = 0; i < n; ++i) x_cmd_prev.thrust(i) = hover_thrust;

  std::vector<GimbalState> gimbals(n);
  MatX t_state = MatX::Constant(n, 4, hover_thrust / 4.0);
  MatX t_cmd = t_state;

  std::deque<std::pair<double, AllocationVector>> command_fifo;
  command_fifo.emplace_back(0.0, x_cmd_prev);
  AllocationVector x_active = x_cmd_prev;

  std::vector<GimbalPid> pid_alpha(n), pid_beta(n);
  Vec3 pos_integral = Vec3::Zero();

  const int steps = static_cast<int>(std::llround(scenario.duration / dt));
  const double dt_high = dt * scenario.high_level_divisor;
  const double dt_low = dt * scenario.low_level_divisor;

  SimRecord rec;
  rec.x_cmd = x_cmd_prev.raw();
  rec.f_exact = forces_from_x(x_cmd_prev);
  rec.slack = VecX::Zero(3 * n);
  rec.o_values = constraint_vector(cfg, x_cmd_prev);
  rec.o_min_gated = constraint_bound(cfg, x_cmd_prev, scenario.o_min);
  rec.efficiency = 1.0;

  log.records.reserve(steps);

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;

    if (k % scenario.high_level_divisor == 0) {
      PlatformState measured = ps;
      if (scenario.noise.pos_std > 0)
        for (int a = 0; a < 3; ++a)
          measured.position(a) += scenario.noise.pos_std * gauss(rng);
      if (scenario.noise.att_std > 0)
        for (int a = 0; a < 3; ++a)
          measured.attitude(a) += scenario.noise.att_std * gauss(rng);
      if (scenario.noise.vel_std > 0)
        for (int a = 0; a < 3; ++a)
          measured.velocity(a) += scenario.noise.vel_std * gauss(rng);
      if (scenario.noise.rate_std > 0)
        for (int a = 0; a < 3; ++a)
          measured.body_rates(a) += scenario.noise.rate_std * gauss(rng);

      const RefSample ref = scenario.trajectory.sample(t);
      const Wrench u_d =
          high_level(ref, measured, scenario.gains, dyn, dt_high,
                     &pos_integral);
      const AllocationResult ar = allocator.allocate(u_d, x_cmd_prev);
      x_cmd_prev = ar.x_new;
      command_fifo.emplace_back(t + scenario.command_delay, ar.x_new);

      rec.allocation_tick = true;
      rec.u_cmd = u_d;
      rec.x_cmd = ar.x_new.raw();
      rec.f_exact = ar.f_exact;
      rec.slack = ar.slack;
      rec.efficiency = ar.efficiency;
      rec.o_values = ar.constraint_values;
      rec.o_min_gated = constraint_bound(cfg, ar.x_new, scenario.o_min);
      rec.qp_status = qp_status_code(ar.qp_status);
      rec.qp_iterations = ar.qp_iterations;
      rec.rows_dropped = ar.downwash_rows_dropped;
      rec.wrench_scaled = ar.wrench_scaled;
      rec.recon_err = (w_alloc * ar.f_exact - u_d.stacked()).norm() /
                      std::max(1.0, u_d.stacked().norm());
    } else {
      rec.allocation_tick = false;
    }

    while (!command_fifo.empty() && command_fifo.front().first <= t + 1e-12) {
      x_active = command_fifo.front().second;
      command_fifo.pop_front();
    }

    if (k % scenario.low_level_divisor == 0) {
      for (int i = 0; i < n; ++i) {
        const double a_acc = pid_alpha[i].update(
            x_active.alpha(i) - gimbals[i].alpha, dt_low,
            scenario.gimbal_gains.kp_alpha, scenario.gimbal_gains.ki_alpha,
            scenario.gimbal_gains.kd_alpha,
            scenario.gimbal_gains.integral_limit);
        const double b_acc = pid_beta[i].update(
            x_active.beta(i) - gimbals[i].beta, dt_low,
            scenario.gimbal_gains.kp_beta, scenario.gimbal_gains.ki_beta,
            scenario.gimbal_gains.kd_beta,
            scenario.gimbal_gains.integral_limit);
        const Vec3 torque =
            joint_torques(a_acc, b_acc, gimbals[i].beta, jx, jy);
        t_cmd.row(i) = mixer.mix(x_active.thrust(i), torque).thrusts;
      }
    }

    // Rotor lag and the resulting actual actuator state.
    if (scenario.thrust_time_constant > 0)
      t_state += (t_cmd - t_state) * (dt / scenario.thrust_time_constant);
    else
      t_state = t_cmd;

    AllocationVector x_actual(n);
    for (int i = 0; i < n; ++i) {
      x_actual.alpha(i) = gimbals[i].alpha;
      x_actual.beta(i) = gimbals[i].beta;
      x_actual.thrust(i) = t_state.row(i).sum();
    }

    const Wrench u = actuation_wrench(cfg, x_actual);
    Wrench ext;
    std::vector<Vec3> delta_m(n, Vec3::Zero());
    if (scenario.downwash_enabled) {
      const MatX delta_t =
          thrust_decrements(cfg, cfg.downwash, x_actual, t_state);
      auto [ext_w, dm] = disturbance_wrench(cfg, delta_t, ps.attitude,
                                            x_actual);
      ext = ext_w;
      delta_m = std::move(dm);
    }

    // Gimbal joints: achieved torque from the lagged rotor thrusts plus
    // the downwash torque disturbance, mapped back to joint accelerations.
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector4d tq = mixer.forward * t_state.row(i).transpose();
      const Vec3 m = tq.tail<3>() + delta_m[i];
      const double cb = std::cos(gimbals[i].beta);
      const double sb = std::sin(gimbals[i].beta);
      const double a_acc = (m.x() * cb + m.z() * sb) / jx;
      const double b_acc = m.y() / jy;
      gimbals[i].alpha_rate += a_acc * dt;
      gimbals[i].beta_rate += b_acc * dt;
      gimbals[i].alpha += gimbals[i].alpha_rate * dt;
      gimbals[i].beta += gimbals[i].beta_rate * dt;
    }

    const RefSample ref = scenario.trajectory.sample(t);
    rec.t = t;
    rec.position = ps.position;
    rec.attitude = ps.attitude;
    rec.velocity = ps.velocity;
    rec.body_rates = ps.body_rates;
    rec.ref_position = ref.position;
    rec.ref_attitude = ref.attitude;
    rec.ext = ext;
    rec.x_act = x_actual.raw();
    rec.prop_thrusts =
        Eigen::Map<const VecX>(t_state.data(), t_state.size());

    try {
      ps = step(dyn, ps, u, ext, dt);
      ps.actuators = x_actual;
    } catch (const IntegrationDiverged&) {
      log.diverged = true;
      log.diverged_at = t;
      log.records.push_back(rec);
      break;
    } catch (const AttitudeSingular&) {
      log.diverged = true;
      log.diverged_at = t;
      log.records.push_back(rec);
      break;
    }
    log.records.push_back(rec);
  }

  return log;
}

Metrics metrics(const SimLog& log) {
  if (log.records.empty()) throw EmptyLog("simulation log has no records");

  Metrics m;
  m.diverged = log.diverged;
  m.duration = log.records.back().t;

  Vec3 sq_pos = Vec3::Zero(), sq_att = Vec3::Zero();
  double eta_sum = 0.0;
  int eta_count = 0;
  const double dt = log.records.size() > 1
                        ? log.records[1].t - log.records[0].t
                        : 0.0;

  // W depends only on the mount layout; rebuild it for the reconstruction
  // check from the record dimensions (regular layout is assumed for logs;
  // custom layouts carry their own tests).
  for (const auto& r : log.records) {
    const Vec3 pe = r.ref_position - r.position;
    const Vec3 ae = r.ref_attitude - r.attitude;
    sq_pos += pe.cwiseProduct(pe);
    sq_att += ae.cwiseProduct(ae);
    m.max_z_drop = std::max(m.max_z_drop, pe.z());
    m.min_efficiency = std::min(m.min_efficiency, r.efficiency);
    eta_sum += r.efficiency;
    ++eta_count;
    const int n = static_cast<int>(r.x_cmd.size()) / 3;
    m.total_impulse += r.x_cmd.tail(n).sum() * dt;
    if (r.allocation_tick) {
      ++m.allocation_calls;
      m.max_reconstruction_err = std::max(m.max_reconstruction_err, r.recon_err);
      bool violated = false;
      for (int k = 0; k < r.o_min_gated.size(); ++k)
        if (r.o_min_gated(k) > 0.0 &&
            r.o_values(k) < r.o_min_gated(k) - 1e-6)
          violated = true;
      if (violated) ++m.violation_ticks;
    }
  }
  const double count = static_cast<double>(log.records.size());
  m.rms_pos_err = (sq_pos / count).cwiseSqrt();
  m.rms_att_err = (sq_att / count).cwiseSqrt();
  m.rms_pos_err_norm = std::sqrt(sq_pos.sum() / count);
  m.mean_efficiency = eta_sum / eta_count;

  return m;
}

namespace {

void print_num(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void print_vec(std::ostream& out, const VecX& v) {
  for (int i = 0; i < v.size(); ++i) {
    out << ',';
    print_num(out, v(i));
  }
}

}  // namespace

void write_csv(const SimLog& log, std::ostream& out, bool with_timestamp) {
  const int n = log.n_generators;
  out << "# ovac-simlog v" << kLogSchemaVersion << " scenario="
      << log.scenario_name << " mode=" << log.mode << " o_min=" << log.o_min
      << " seed=" << log.seed << " n=" << n << " diverged="
      << (log.diverged ? 1 : 0) << "\n";
  if (with_timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated " << buf << "\n";
  }

  out << "t,alloc_tick";
  const char* axes[3] = {"x", "y", "z"};
  for (auto a : axes) out << ",pos_" << a;
  for (auto a : axes) out << ",att_" << a;
  for (auto a : axes) out << ",vel_" << a;
  for (auto a : axes) out << ",rate_" << a;
  for (auto a : axes) out << ",ref_pos_" << a;
  for (auto a : axes) out << ",ref_att_" << a;
  for (auto a : axes) out << ",ud_f" << a;
  for (auto a : axes) out << ",ud_t" << a;
  for (int i = 0; i < 3 * n; ++i) out << ",x_cmd_" << i;
  for (int i = 0; i < 3 * n; ++i) out << ",x_act_" << i;
  for (int i = 0; i < 3 * n; ++i) out << ",f_star_" << i;
  for (int i = 0; i < 3 * n; ++i) out << ",slack_" << i;
  out << ",eta";
  for (int i = 0; i < n * (n - 1); ++i) out << ",o_" << i;
  for (int i = 0; i < n * (n - 1); ++i) out << ",o_min_" << i;
  for (auto a : axes) out << ",ext_f" << a;
  for (auto a : axes) out << ",ext_t" << a;
  for (int i = 0; i < 4 * n; ++i) out << ",t_prop_" << i;
  out << ",recon_err,qp_status,qp_iterations,rows_dropped,wrench_scaled\n";

  for (const auto& r : log.records) {
    print_num(out, r.t);
    out << ',' << (r.allocation_tick ? 1 : 0);
    print_vec(out, r.position);
    print_vec(out, r.attitude);
    print_vec(out, r.velocity);
    print_vec(out, r.body_rates);
    print_vec(out, r.ref_position);
    print_vec(out, r.ref_attitude);
    print_vec(out, r.u_cmd.force);
    print_vec(out, r.u_cmd.torque);
    print_vec(out, r.x_cmd);
    print_vec(out, r.x_act);
    print_vec(out, r.f_exact);
    print_vec(out, r.slack);
    out << ',';
    print_num(out, r.efficiency);
    print_vec(out, r.o_values);
    print_vec(out, r.o_min_gated);
    print_vec(out, r.ext.force);
    print_vec(out, r.ext.torque);
    print_vec(out, r.prop_thrusts);
    out << ',';
    print_num(out, r.recon_err);
    out << ',' << r.qp_status << ',' << r.qp_iterations << ','
        << (r.rows_dropped ? 1 : 0) << ',' << (r.wrench_scaled ? 1 : 0)
        << "\n";
  }
}

void write_summary(const SimLog& log, const Metrics& m, std::ostream& out) {
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  out << "schema = ovac-summary-v" << kLogSchemaVersion << "\n";
  out << "scenario = " << log.scenario_name << "\n";
  out << "mode = " << log.mode << "\n";
  out << "o_min_m = " << num(log.o_min) << "\n";
  out << "seed = " << log.seed << "\n";
  out << "diverged = " << (m.diverged ? 1 : 0) << "\n";
  out << "duration_s = " << num(m.duration) << "\n";
  out << "allocation_calls = " << m.allocation_calls << "\n";
  out << "rms_pos_err_x_m = " << num(m.rms_pos_err.x()) << "\n";
  out << "rms_pos_err_y_m = " << num(m.rms_pos_err.y()) << "\n";
  out << "rms_pos_err_z_m = " << num(m.rms_pos_err.z()) << "\n";
  out << "rms_pos_err_norm_m = " << num(m.rms_pos_err_norm) << "\n";
  out << "rms_att_err_roll_rad = " << num(m.rms_att_err.x()) << "\n";
  out << "rms_att_err_pitch_rad = " << num(m.rms_att_err.y()) << "\n";
  out << "rms_att_err_yaw_rad = " << num(m.rms_att_err.z()) << "\n";
  out << "min_eta = " << num(m.min_efficiency) << "\n";
  out << "mean_eta = " << num(m.mean_efficiency) << "\n";
  out << "max_z_drop_m = " << num(m.max_z_drop) << "\n";
  out << "violation_ticks = " << m.violation_ticks << "\n";
  out << "total_impulse_ns = " << num(m.total_impulse) << "\n";
  out << "max_reconstruction_err = " << num(m.max_reconstruction_err) << "\n";
}

}  // namespace ovac
