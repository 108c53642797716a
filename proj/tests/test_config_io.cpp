#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "ovac/config_io.hpp"

using namespace ovac;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("ovac_cfg_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

const char* kMinimalPlatform = "preset = four\n";

std::string minimal_scenario(const std::string& platform_file) {
  return "platform = " + platform_file +
         "\n"
         "duration_s = 1.0\n"
         "waypoint = 0 0 0 0 0 0 0\n"
         "waypoint = 1 0 0 0.5 0 0 0\n";
}

}  // namespace

TEST_CASE("parser splits keys, values, and comments") {
  const ParsedConfig cfg = ParsedConfig::from_string(
      "# leading comment\n"
      "a = 1\n"
      "\n"
      "  b   =  two words  # trailing comment\n");
  REQUIRE(cfg.entries.size() == 2);
  CHECK(cfg.entries[0].key == "a");
  CHECK(cfg.entries[0].value == "1");
  CHECK(cfg.entries[0].line == 2);
  CHECK(cfg.entries[1].key == "b");
  CHECK(cfg.entries[1].value == "two words");
  CHECK(cfg.entries[1].line == 4);
}

TEST_CASE("parser rejects malformed lines with file:line diagnostics") {
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(ParsedConfig::from_string("no equals sign\n", "f.cfg"),
                       Contains("f.cfg:1"), ConfigError);
  CHECK_THROWS_WITH_AS(ParsedConfig::from_string("a =\n= b\n", "f.cfg"),
                       Contains("empty value"), ConfigError);
  CHECK_THROWS_WITH_AS(ParsedConfig::from_string("ok = 1\n = b\n", "f.cfg"),
                       Contains("f.cfg:2"), ConfigError);
}

TEST_CASE("platform file round-trips a preset with overrides") {
  TempDir tmp;
  const auto p = tmp.write("plat.cfg",
                           "preset = six\n"
                           "frame_mass_kg = 0.042\n"
                           "com_offset_m = 0.01 0 -0.002\n"
                           "tilt_limits_rad = -2.0 2.0\n"
                           "downwash_bv_sm = 0.08\n");
  const PlatformConfig c = load_platform_config(p.string());
  CHECK(c.n_generators == 6);
  CHECK(c.frame_mass == 0.042);
  CHECK((c.com_offset - Vec3(0.01, 0, -0.002)).norm() == 0.0);
  CHECK(c.tilt_limits(0) == -2.0);
  CHECK(c.downwash.bv == 0.08);
  // Untouched keys keep the preset values.
  const PlatformConfig base = PlatformConfig::six_platform();
  CHECK(c.module_mass == base.module_mass);
  CHECK(c.thrust_limits == base.thrust_limits);
}

TEST_CASE("unknown platform key names the offending line") {
  TempDir tmp;
  const auto p = tmp.write("plat.cfg",
                           "preset = four\n"
                           "frame_masse_kg = 0.02\n");
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(load_platform_config(p.string()),
                       Contains("frame_masse_kg"), ConfigError);
  CHECK_THROWS_WITH_AS(load_platform_config(p.string()), Contains(":2"),
                       ConfigError);
}

TEST_CASE("bad platform values are rejected") {
  TempDir tmp;
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(
      load_platform_config(
          tmp.write("a.cfg", "preset = four\nframe_mass_kg = heavy\n")
              .string()),
      Contains("expected a number"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_platform_config(
          tmp.write("b.cfg", "preset = four\ncom_offset_m = 1 2\n").string()),
      Contains("3 numbers"), ConfigError);
  CHECK_THROWS_AS(
      load_platform_config(
          tmp.write("c.cfg", "preset = four\nn_generators = 2\n").string()),
      ConfigError);  // semantic validation still runs
  CHECK_THROWS_WITH_AS(
      load_platform_config(
          tmp.write("d.cfg", "preset = five\n").string()),
      Contains("unknown preset"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_platform_config(
          tmp.write("e.cfg", "preset = four\npreset = six\n").string()),
      Contains("duplicate"), ConfigError);
}

TEST_CASE("mount positions must be given together") {
  TempDir tmp;
  const auto p = tmp.write("plat.cfg",
                           "preset = four\n"
                           "mount_position_m_1 = 0.2 0 0\n"
                           "mount_position_m_2 = 0 0.2 0\n");
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(load_platform_config(p.string()),
                       Contains("mount_position_m_3"), ConfigError);

  const auto full = tmp.write("full.cfg",
                              "preset = four\n"
                              "mount_position_m_1 = 0.2 0 0\n"
                              "mount_position_m_2 = 0 0.2 0\n"
                              "mount_position_m_3 = -0.2 0 0\n"
                              "mount_position_m_4 = 0 -0.2 0\n");
  const PlatformConfig c = load_platform_config(full.string());
  REQUIRE(c.mount_positions.size() == 4);
  CHECK((c.mount(1) - Vec3(0, 0.2, 0)).norm() == 0.0);
}

TEST_CASE("scenario file loads with platform path relative to itself") {
  TempDir tmp;
  fs::create_directories(tmp.dir / "sub");
  tmp.write("sub/plat.cfg", kMinimalPlatform);
  const auto sc_path =
      tmp.write("sub/run.cfg", minimal_scenario("plat.cfg") +
                                   "mode = conventional\n"
                                   "o_min_m = 0.12\n"
                                   "seed = 7\n"
                                   "gamma = 0.2\n"
                                   "kp_pos = 5 5 6\n"
                                   "gimbal_kp = 800\n");
  const Scenario s = load_scenario(sc_path.string());
  CHECK(s.name == "run");  // file stem when no name key
  CHECK(s.platform.n_generators == 4);
  CHECK(s.mode == AllocatorMode::Conventional);
  CHECK(s.o_min == 0.12);
  CHECK(s.seed == 7);
  REQUIRE(s.weights.has_value());
  CHECK(s.weights->gamma == 0.2);
  CHECK((s.gains.kp_pos - Vec3(5, 5, 6)).norm() == 0.0);
  CHECK(s.gimbal_gains.kp_alpha == 800);
  CHECK(s.gimbal_gains.kp_beta == 800);
  REQUIRE(s.trajectory.waypoints().size() == 2);
  CHECK(s.trajectory.end_time() == 1.0);
}

TEST_CASE("scenario requires a platform and at least one waypoint") {
  TempDir tmp;
  tmp.write("plat.cfg", kMinimalPlatform);
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(
      load_scenario(
          tmp.write("a.cfg", "duration_s = 1\nwaypoint = 0 0 0 0 0 0 0\n")
              .string()),
      Contains("platform"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(
          tmp.write("b.cfg", "platform = plat.cfg\nduration_s = 1\n")
              .string()),
      Contains("waypoint"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(tmp.write("c.cfg", minimal_scenario("plat.cfg") +
                                           "waypoint = 0 0 0\n")
                        .string()),
      Contains("7 numbers"), ConfigError);
  CHECK_THROWS_WITH_AS(
      load_scenario(tmp.write("d.cfg", minimal_scenario("plat.cfg") +
                                           "mode = psychic\n")
                        .string()),
      Contains("unknown mode"), ConfigError);
  CHECK_THROWS_AS(load_scenario((tmp.dir / "missing.cfg").string()),
                  ConfigError);
}

TEST_CASE("scenario semantic validation runs after parsing") {
  TempDir tmp;
  tmp.write("plat.cfg", kMinimalPlatform);
  CHECK_THROWS_AS(
      load_scenario(tmp.write("a.cfg", minimal_scenario("plat.cfg") +
                                           "physics_dt_s = 0.5\n")
                        .string()),
      ConfigError);
  CHECK_THROWS_AS(
      load_scenario(tmp.write("b.cfg", minimal_scenario("plat.cfg") +
                                           "o_min_m = -1\n")
                        .string()),
      ConfigError);
}

TEST_CASE("rate limit shorthand expands to the stacked layout") {
  TempDir tmp;
  const auto p = tmp.write("plat.cfg",
                           "preset = six\n"
                           "rate_limit_angle_rad = 0.05\n"
                           "rate_limit_thrust_n = 0.15\n");
  const PlatformConfig c = load_platform_config(p.string());
  REQUIRE(c.rate_limit_hi.size() == 18);
  CHECK(c.rate_limit_hi.head(12).maxCoeff() == 0.05);
  CHECK(c.rate_limit_hi.tail(6).minCoeff() == 0.15);
  CHECK((c.rate_limit_lo + c.rate_limit_hi).norm() == 0.0);
}

TEST_CASE("shipped scenario files load and validate") {
  // The repo-level scenario corpus must stay parseable.
  const fs::path root = fs::path(SCENARIO_DIR);
  int seen = 0;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.path().extension() == ".cfg") {
      CHECK_NOTHROW(load_platform_config(e.path().string()));
    } else if (e.path().extension() == ".scn") {
      CHECK_NOTHROW(load_scenario(e.path().string()));
    } else {
      continue;
    }
    ++seen;
  }
  CHECK(seen >= 5);  // two platforms + hover/tilt/twist scenarios
}
