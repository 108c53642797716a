// Acceptance gate: end-to-end checks of the allocator, its oracles, and
// the three shipped closed-loop scenarios. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "ovac/config_io.hpp"
#include "ovac/sim.hpp"
#include "qp_reference.hpp"

using namespace ovac;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

AllocationVector random_x(std::mt19937_64& rng, const PlatformConfig& c) {
  std::uniform_real_distribution<double> ang(-1.0, 1.0);
  std::uniform_real_distribution<double> thr(0.05, c.thrust_limits(1));
  AllocationVector x(c.n_generators);
  for (int i = 0; i < c.n_generators; ++i) {
    x.alpha(i) = ang(rng);
    x.beta(i) = ang(rng);
    x.thrust(i) = thr(rng);
  }
  return x;
}

Wrench hover_wrench(const PlatformConfig& c) {
  Wrench u;
  u.force = {0, 0, c.total_mass() * kGravity};
  return u;
}

// ---- criterion 1: sustained allocation throughput and reconstruction ----

void criterion_1() {
  const PlatformConfig c = PlatformConfig::four_platform();
  AllocatorWeights w = AllocatorWeights::defaults(4);
  w.o_min = 0.07;
  const Allocator alloc(c, w, AllocatorMode::DownwashAware);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> df(-0.3, 0.3);
  std::uniform_real_distribution<double> dm(-0.02, 0.02);

  AllocationVector x(4);
  for (int i = 0; i < 4; ++i) x.thrust(i) = c.total_mass() * kGravity / 4;

  const int calls = 10000;
  double max_recon = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < calls; ++k) {
    Wrench u = hover_wrench(c);
    u.force += Vec3(df(rng), df(rng), df(rng));
    u.torque = Vec3(dm(rng), dm(rng), dm(rng));
    const AllocationResult r = alloc.allocate(u, x);
    const double recon =
        (alloc.matrices().w * r.f_exact - u.stacked()).norm() /
        std::max(1.0, u.stacked().norm());
    max_recon = std::max(max_recon, recon);
    x = r.x_new;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(1, max_recon <= 1e-9 && secs < 10.0,
         "10^4 allocation calls reconstruct the wrench",
         "max recon " + fmt(max_recon) + ", " + fmt(secs) + " s");
}

// ---- criterion 2: analytic Jacobians against finite differences ----

void criterion_2() {
  std::mt19937_64 rng(22);
  const double h = 1e-7;
  double worst_f = 0.0, worst_o = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PlatformConfig c = trial % 2 ? PlatformConfig::six_platform()
                                       : PlatformConfig::four_platform();
    const AllocationVector x = random_x(rng, c);
    const int n3 = 3 * c.n_generators;

    const MatX jf = jacobian_f(x);
    const MatX jo = constraint_jacobian(c, x);
    for (int j = 0; j < n3; ++j) {
      AllocationVector xp(VecX(x.raw())), xm(VecX(x.raw()));
      xp.raw()(j) += h;
      xm.raw()(j) -= h;
      const VecX df = (forces_from_x(xp) - forces_from_x(xm)) / (2 * h);
      worst_f = std::max(worst_f, (jf.col(j) - df).cwiseAbs().maxCoeff());
      const VecX doo =
          (constraint_vector(c, xp) - constraint_vector(c, xm)) / (2 * h);
      worst_o = std::max(worst_o, (jo.col(j) - doo).cwiseAbs().maxCoeff());
    }
  }
  report(2, worst_f <= 1e-5 && worst_o <= 1e-5,
         "force and clearance Jacobians match finite differences",
         "max err " + fmt(worst_f) + " / " + fmt(worst_o));
}

// ---- criterion 3: QP kernel against the operator-splitting reference ----

void criterion_3() {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> n_d(2, 30);
  double worst_obj = 0.0, worst_kkt = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const int n = n_d(rng);
    QpProblem p;
    MatX m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
    p.h = m.transpose() * m + MatX::Identity(n, n);
    p.f = VecX::NullaryExpr(n, [&](int) { return unit(rng); });
    const VecX x_feas = VecX::NullaryExpr(n, [&](int) { return unit(rng); });
    const int n_eq = std::uniform_int_distribution<int>(0, std::min(5, n - 1))(rng);
    if (n_eq) {
      p.a_eq = MatX::NullaryExpr(n_eq, n, [&](int, int) { return unit(rng); });
      p.b_eq = p.a_eq * x_feas;
    }
    const int n_in = std::uniform_int_distribution<int>(0, 8)(rng);
    if (n_in) {
      p.a_in = MatX::NullaryExpr(n_in, n, [&](int, int) { return unit(rng); });
      p.b_in = p.a_in * x_feas;
      for (int i = 0; i < n_in; ++i) p.b_in(i) -= std::abs(unit(rng));
    }
    p.lb = x_feas.array() - 1.5;
    p.ub = x_feas.array() + 1.5;

    const QpSolution s = solve(p);
    if (s.status != QpStatus::Optimal) {
      ok = false;
      break;
    }
    worst_kkt =
        std::max({worst_kkt, s.primal_residual, s.dual_residual});
    const auto ref = ovac_test::reference_solve(p);
    if (!ref.converged) {
      ok = false;
      break;
    }
    worst_obj = std::max(worst_obj,
                         std::abs(s.objective - ref.objective) /
                             std::max(1.0, std::abs(ref.objective)));
  }
  report(3, ok && worst_obj <= 1e-6 && worst_kkt <= 1e-6,
         "200 random QPs agree with the reference solver",
         "max objective gap " + fmt(worst_obj) + ", max KKT residual " +
             fmt(worst_kkt));
}

// ---- criteria 4-7: shipped scenarios ----

Scenario load(const std::string& dir, const std::string& file) {
  return load_scenario(dir + "/" + file);
}

void criterion_4(const std::string& dir) {
  Scenario sc = load(dir, "hover4.scn");
  const double t_hover =
      sc.platform.total_mass() * kGravity / sc.platform.n_generators;
  bool ok = true;
  std::string detail;
  for (const auto mode :
       {AllocatorMode::Conventional, AllocatorMode::DownwashAware}) {
    sc.mode = mode;
    const SimLog log = run(sc);
    const Metrics m = metrics(log);
    double max_t_err = 0.0;
    const auto& last = log.records.back();
    for (int i = 0; i < sc.platform.n_generators; ++i)
      max_t_err = std::max(
          max_t_err, std::abs(last.x_cmd(2 * sc.platform.n_generators + i) -
                              t_hover));
    ok = ok && !m.diverged && m.mean_efficiency >= 0.999 && max_t_err <= 1e-3;
    detail += std::string(to_string(mode)) + ": eta " +
              fmt(m.mean_efficiency) + ", |T - mg/N| " + fmt(max_t_err) + "; ";
  }
  report(4, ok, "hover splits the weight evenly at full efficiency", detail);
}

struct ScenarioOutcome {
  Metrics m;
  int late_violations = 0;  // gated clearance violations for t > 1 s
  double drop_first = 0.0, drop_second = 0.0;  // max z sag per half
  bool diverged = false;
};

ScenarioOutcome run_outcome(const Scenario& sc) {
  const SimLog log = run(sc);
  ScenarioOutcome out;
  out.m = metrics(log);
  out.diverged = log.diverged;
  const double mid = sc.duration / 2;
  for (const auto& r : log.records) {
    const double sag = r.ref_position.z() - r.position.z();
    (r.t < mid ? out.drop_first : out.drop_second) =
        std::max(r.t < mid ? out.drop_first : out.drop_second, sag);
    if (r.allocation_tick && r.t > 1.0) {
      for (int k = 0; k < r.o_min_gated.size(); ++k)
        if (r.o_min_gated(k) > 0.0 && r.o_values(k) < r.o_min_gated(k) - 1e-6) {
          ++out.late_violations;
          break;
        }
    }
  }
  return out;
}

void criteria_5_6(const std::string& dir) {
  Scenario sc = load(dir, "tilt6.scn");

  sc.mode = AllocatorMode::Conventional;
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioOutcome conv = run_outcome(sc);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const double conv_drop = std::max(conv.drop_first, conv.drop_second);
  report(5,
         conv_drop >= 0.1 && conv.m.violation_ticks > 0 && secs < 60.0,
         "wake-blind vertical hold sags and violates clearance",
         "drop " + fmt(conv_drop) + " m, " +
             std::to_string(conv.m.violation_ticks) + " violation ticks, " +
             fmt(secs) + " s");

  sc.mode = AllocatorMode::DownwashAware;
  const ScenarioOutcome aware = run_outcome(sc);
  const double aware_drop = std::max(aware.drop_first, aware.drop_second);
  report(6,
         !aware.diverged && aware.late_violations == 0 &&
             aware_drop <= 0.3 * conv_drop && aware.m.mean_efficiency >= 0.90,
         "clearance-aware vertical hold keeps modules out of the wake",
         "drop " + fmt(aware_drop) + " m (blind " + fmt(conv_drop) + "), " +
             std::to_string(aware.late_violations) + " late violations, eta " +
             fmt(aware.m.mean_efficiency));
}

void criterion_7(const std::string& dir) {
  Scenario sc = load(dir, "twist4.scn");

  sc.mode = AllocatorMode::Conventional;
  const ScenarioOutcome conv = run_outcome(sc);
  const bool conv_ok =
      conv.diverged ||
      (conv.drop_second > 0.15 && conv.drop_second > conv.drop_first);

  sc.mode = AllocatorMode::DownwashAware;
  const ScenarioOutcome aware = run_outcome(sc);
  const bool aware_ok = !aware.diverged && aware.m.rms_pos_err_norm <= 0.05;

  report(7, conv_ok && aware_ok,
         "paired wake events escalate blind, stay tracked aware",
         "blind drops " + fmt(conv.drop_first) + "/" + fmt(conv.drop_second) +
             (conv.diverged ? " m (diverged)" : " m") + ", aware rms " +
             fmt(aware.m.rms_pos_err_norm) + " m");
}

// ---- criterion 8: mode equivalence with gating disabled ----

void criterion_8() {
  const PlatformConfig c = PlatformConfig::four_platform();
  AllocatorWeights w = AllocatorWeights::defaults(4);
  w.gamma = 0.0;
  w.o_min = 0.0;
  const Allocator conv(c, w, AllocatorMode::Conventional);
  const Allocator aware(c, w, AllocatorMode::DownwashAware);

  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> df(-0.3, 0.3);
  std::uniform_real_distribution<double> dm(-0.02, 0.02);
  AllocationVector xc(4), xa(4);
  for (int i = 0; i < 4; ++i)
    xc.thrust(i) = xa.thrust(i) = c.total_mass() * kGravity / 4;
  int mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    Wrench u = hover_wrench(c);
    u.force += Vec3(df(rng), df(rng), df(rng));
    u.torque = Vec3(dm(rng), dm(rng), dm(rng));
    const AllocationResult rc = conv.allocate(u, xc);
    const AllocationResult ra = aware.allocate(u, xa);
    for (int j = 0; j < 12; ++j)
      if (rc.x_new.raw()(j) != ra.x_new.raw()(j)) ++mismatches;
    xc = rc.x_new;
    xa = ra.x_new;
  }
  report(8, mismatches == 0,
         "aware mode with clearance off is bitwise the blind mode",
         std::to_string(mismatches) + " mismatched coordinates");
}

// ---- criterion 9: low-level round trips and the clearance gate table ----

void criterion_9() {
  const PlatformConfig c = PlatformConfig::four_platform();
  std::mt19937_64 rng(99);

  // Inverse kinematics round trip.
  double worst_ik = 0.0;
  for (int k = 0; k < 500; ++k) {
    const AllocationVector x = random_x(rng, c);
    const AllocationVector back = inverse_kinematics(
        forces_from_x(x), Allocator::kThrustFloor, AllocationVector(4));
    worst_ik =
        std::max(worst_ik, (back.raw() - x.raw()).cwiseAbs().maxCoeff());
  }

  // Mixer round trip away from saturation.
  const QuadMixer mixer = QuadMixer::from_config(c);
  std::uniform_real_distribution<double> thr(0.3, 0.9);
  std::uniform_real_distribution<double> tq(-3e-3, 3e-3);
  double worst_mix = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double t = thr(rng);
    const Vec3 torque(tq(rng), tq(rng), 0.1 * tq(rng));
    const auto r = mixer.mix(t, torque);
    if (r.saturated) continue;
    Eigen::Vector4d cmd;
    cmd << t, torque;
    worst_mix = std::max(
        worst_mix, (mixer.forward * r.thrusts - cmd).cwiseAbs().maxCoeff());
  }

  // Gate truth table: the pairwise bound is o_min^2 exactly when the flow
  // from the upstream generator travels toward the other mount.
  const double o_min = 0.1;
  bool gate_ok = true;
  AllocationVector level(4);
  for (int i = 0; i < 4; ++i) level.thrust(i) = 0.5;
  // Level flight: every wake goes straight down, never toward a coplanar
  // neighbor -> every row gated off.
  gate_ok = gate_ok &&
            constraint_bound(c, level, o_min).maxCoeff() == 0.0;
  // Generator 0 twisted to beta = pi/2: its wake flows along -x, toward
  // all three other mounts; everyone else still points down.
  AllocationVector twisted = level;
  twisted.beta(0) = M_PI / 2;
  const VecX gated = constraint_bound(c, twisted, o_min);
  for (int k = 0; k < gated.size(); ++k) {
    const bool expect_on = k < 3;  // ordered pairs (0,j) come first
    gate_ok = gate_ok && (gated(k) == (expect_on ? o_min * o_min : 0.0));
  }

  report(9,
         worst_ik <= 1e-10 && worst_mix <= 1e-10 && gate_ok,
         "kinematic round trips and the wake gate truth table",
         "ik " + fmt(worst_ik) + ", mixer " + fmt(worst_mix) + ", gate " +
             (gate_ok ? "ok" : "wrong"));
}

// ---- criterion 10: reproducibility ----

void criterion_10(const std::string& dir) {
  Scenario sc = load(dir, "hover4.scn");
  sc.duration = 2.0;
  sc.noise.pos_std = 1e-3;
  sc.seed = 12345;
  std::ostringstream a, b;
  write_csv(run(sc), a, /*with_timestamp=*/false);
  write_csv(run(sc), b, /*with_timestamp=*/false);
  report(10, a.str() == b.str() && !a.str().empty(),
         "same seed reproduces the log byte for byte",
         std::to_string(a.str().size()) + " bytes compared");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <scenario-dir>\n");
    return 2;
  }
  const std::string dir = argv[1];
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4(dir);
    criteria_5_6(dir);
    criterion_7(dir);
    criterion_8();
    criterion_9();
    criterion_10(dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 2;
  }
  return g_failures == 0 ? 0 : 1;
}
