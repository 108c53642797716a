// ovac: scenario runner and analysis front-end.
// Exit codes: 0 success, 1 configuration/usage error, 2 simulation diverged.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ovac/allocation.hpp"
#include "ovac/config_io.hpp"
#include "ovac/downwash.hpp"
#include "ovac/sim.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("OVAC_OUT_DIR");
  return env && *env ? env : ".";
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& mode_override, double o_min_override,
            double gamma_override, long long seed_override, bool no_timestamp,
            bool verbose) {
  ovac::Scenario scenario = ovac::load_scenario(scenario_path);
  if (!mode_override.empty())
    scenario.mode = ovac::allocator_mode_from_string(mode_override);
  if (o_min_override >= 0.0) scenario.o_min = o_min_override;
  if (gamma_override >= 0.0) {
    if (!scenario.weights)
      scenario.weights =
          ovac::AllocatorWeights::defaults(scenario.platform.n_generators);
    scenario.weights->gamma = gamma_override;
  }
  if (seed_override >= 0)
    scenario.seed = static_cast<std::uint64_t>(seed_override);
  scenario.validate();

  if (verbose)
    std::cerr << "running " << scenario.name << " [" << to_string(scenario.mode)
              << ", o_min=" << scenario.o_min << ", seed=" << scenario.seed
              << ", " << scenario.duration << " s]\n";

  const ovac::SimLog log = ovac::run(scenario);
  const ovac::Metrics m = ovac::metrics(log);

  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / scenario.name;
  {
    std::ofstream csv(base.string() + ".log.csv", std::ios::binary);
    if (!csv) {
      std::cerr << "error: cannot write " << base.string() << ".log.csv\n";
      return 1;
    }
    ovac::write_csv(log, csv, !no_timestamp);
  }
  {
    std::ofstream summary(base.string() + ".summary", std::ios::binary);
    if (!summary) {
      std::cerr << "error: cannot write " << base.string() << ".summary\n";
      return 1;
    }
    ovac::write_summary(log, m, summary);
  }
  if (verbose || log.diverged)
    std::cerr << scenario.name << ": rms_pos_err=" << m.rms_pos_err_norm
              << " m, mean_eta=" << m.mean_efficiency
              << ", violations=" << m.violation_ticks
              << (log.diverged ? " [DIVERGED]" : "") << "\n";
  std::cout << base.string() << ".log.csv\n"
            << base.string() << ".summary\n";
  return log.diverged ? 2 : 0;
}

std::map<std::string, std::string> read_summary(const std::string& path) {
  const ovac::ParsedConfig cfg = ovac::ParsedConfig::from_file(path);
  std::map<std::string, std::string> kv;
  for (const auto& e : cfg.entries) kv[e.key] = e.value;
  if (!kv.count("scenario") || !kv.count("schema"))
    throw ovac::ConfigError(path + ": not a summary file");
  return kv;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& csv_out) {
  const auto a = read_summary(path_a);
  const auto b = read_summary(path_b);
  if (a.at("scenario") != b.at("scenario")) {
    std::cerr << "error: scenario mismatch: '" << a.at("scenario") << "' vs '"
              << b.at("scenario") << "'\n";
    return 1;
  }

  const std::vector<std::string> keys = {
      "rms_pos_err_norm_m", "rms_pos_err_z_m",  "rms_att_err_pitch_rad",
      "min_eta",            "mean_eta",         "max_z_drop_m",
      "violation_ticks",    "total_impulse_ns", "diverged"};
  const auto val = [](const std::map<std::string, std::string>& kv,
                      const std::string& k) {
    const auto it = kv.find(k);
    return it == kv.end() ? 0.0 : std::atof(it->second.c_str());
  };

  std::printf("scenario: %s\n", a.at("scenario").c_str());
  std::printf("%-24s %16s %16s %16s\n", "metric",
              ("A:" + a.at("mode")).c_str(), ("B:" + b.at("mode")).c_str(),
              "delta (B-A)");
  std::string csv = "metric,a_" + a.at("mode") + ",b_" + b.at("mode") +
                    ",delta\n";
  for (const auto& k : keys) {
    const double va = val(a, k), vb = val(b, k);
    std::printf("%-24s %16.6g %16.6g %16.6g\n", k.c_str(), va, vb, vb - va);
    char row[160];
    std::snprintf(row, sizeof(row), "%s,%.12g,%.12g,%.12g\n", k.c_str(), va,
                  vb, vb - va);
    csv += row;
  }
  if (!csv_out.empty()) {
    std::ofstream out(csv_out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << csv_out << "\n";
      return 1;
    }
    out << csv;
  }
  return 0;
}

int cmd_field(const std::string& platform_path, double thrust, double z_min,
              double z_max, int z_steps, double r_min, double r_max,
              int r_steps, const std::string& out_path) {
  ovac::PlatformConfig config = platform_path.empty()
                                    ? ovac::PlatformConfig::four_platform()
                                    : ovac::load_platform_config(platform_path);
  ovac::DownwashModel model = config.downwash;
  if (z_steps < 1 || r_steps < 1)
    throw ovac::ConfigError("grid needs at least one step per axis");
  if (z_min <= model.z0)
    throw ovac::ConfigError("grid starts at or before the efflux plane");
  if (z_max > model.z0 + model.zfe_extent * model.r0)
    throw ovac::ConfigError("grid extends beyond the near-field validity");

  if (model.v0 <= 0.0) model.v0 = ovac::efflux_velocity(model, thrust);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out = &file;
  }
  *out << "z_m,r_m,v_ms\n";
  char row[96];
  for (int iz = 0; iz < z_steps; ++iz) {
    const double z =
        z_steps == 1 ? z_min : z_min + (z_max - z_min) * iz / (z_steps - 1);
    for (int ir = 0; ir < r_steps; ++ir) {
      const double r =
          r_steps == 1 ? r_min : r_min + (r_max - r_min) * ir / (r_steps - 1);
      const double v = ovac::axial_velocity(model, z, r);
      std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g\n", z, r, v);
      *out << row;
    }
  }
  return 0;
}

int cmd_validate(const std::string& path, std::string kind) {
  if (kind == "auto")
    kind = fs::path(path).extension() == ".scn" ? "scenario" : "platform";
  if (kind == "scenario") {
    const ovac::Scenario s = ovac::load_scenario(path);
    std::cout << "ok: scenario '" << s.name << "', "
              << s.platform.n_generators << " generators, "
              << s.trajectory.waypoints().size() << " waypoints, "
              << s.duration << " s\n";
  } else if (kind == "platform") {
    const ovac::PlatformConfig c = ovac::load_platform_config(path);
    std::cout << "ok: platform with " << c.n_generators
              << " generators, total mass " << c.total_mass() << " kg\n";
  } else {
    std::cerr << "error: unknown kind '" << kind << "'\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"over-actuated platform allocation toolbench"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario, write CSV + summary");
  std::string scenario_path, out_dir = default_out_dir(), mode_override;
  double o_min_override = -1.0, gamma_override = -1.0;
  long long seed_override = -1;
  bool no_timestamp = false, verbose = false;
  run->add_option("--scenario", scenario_path, "scenario file (.scn)")
      ->required();
  run->add_option("--out-dir", out_dir, "output directory ($OVAC_OUT_DIR)");
  run->add_option("--mode", mode_override,
                  "override allocator mode (conventional|downwash-aware)");
  run->add_option("--o-min", o_min_override, "override wake clearance [m]");
  run->add_option("--gamma", gamma_override, "override thrust-sum weight");
  run->add_option("--seed", seed_override, "override noise seed");
  run->add_flag("--no-timestamp", no_timestamp,
                "omit the timestamp header line for byte-reproducible logs");
  run->add_flag("-v,--verbose", verbose, "progress on stderr");

  // compare
  auto* compare =
      app.add_subcommand("compare", "compare two run summaries side by side");
  std::string summary_a, summary_b, compare_csv;
  compare->add_option("a", summary_a, "first .summary file")->required();
  compare->add_option("b", summary_b, "second .summary file")->required();
  compare->add_option("--csv", compare_csv, "also write the table as CSV");

  // field
  auto* field = app.add_subcommand(
      "field", "sample the downwash velocity field on a (z, r) grid");
  std::string field_platform, field_out;
  double thrust = 0.5395, z_min = 0.05, z_max = 0.4, r_min = 0.0, r_max = 0.1;
  int z_steps = 36, r_steps = 21;
  field->add_option("--platform", field_platform,
                    "platform config supplying the aero constants");
  field->add_option("--thrust", thrust, "source thrust [N]");
  field->add_option("--z-min", z_min, "grid start below the rotor [m]");
  field->add_option("--z-max", z_max, "grid end [m]");
  field->add_option("--z-steps", z_steps, "axial sample count");
  field->add_option("--r-min", r_min, "radial grid start [m]");
  field->add_option("--r-max", r_max, "radial grid end [m]");
  field->add_option("--r-steps", r_steps, "radial sample count");
  field->add_option("--out", field_out, "output CSV (default stdout)");

  // validate-config
  auto* validate =
      app.add_subcommand("validate-config", "parse and validate a config file");
  std::string validate_path, validate_kind = "auto";
  validate->add_option("path", validate_path, "config file")->required();
  validate->add_option("--kind", validate_kind,
                       "platform|scenario|auto (auto: .scn means scenario)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, out_dir, mode_override, o_min_override,
                     gamma_override, seed_override, no_timestamp, verbose);
    if (compare->parsed()) return cmd_compare(summary_a, summary_b, compare_csv);
    if (field->parsed())
      return cmd_field(field_platform, thrust, z_min, z_max, z_steps, r_min,
                       r_max, r_steps, field_out);
    if (validate->parsed()) return cmd_validate(validate_path, validate_kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
