#include "ovac/config_io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ovac/allocation.hpp"

namespace ovac {
namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

/// Cursor over a ParsedConfig with typed accessors. Every accessor marks
/// the entry consumed so reject_unknown() can catch typos afterward.
class Reader {
 public:
  explicit Reader(const ParsedConfig& cfg) : cfg_(cfg) {}

  const ParsedConfig::Entry* find(const std::string& key) const {
    const ParsedConfig::Entry* hit = nullptr;
    for (const auto& e : cfg_.entries)
      if (e.key == key) {
        if (hit) fail(cfg_.path, e.line, "duplicate key '" + key + "'");
        hit = &e;
      }
    if (hit) hit->consumed = true;
    return hit;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  double number(const ParsedConfig::Entry& e) const {
    std::istringstream is(e.value);
    double v;
    if (!(is >> v) || !(is >> std::ws).eof())
      fail(cfg_.path, e.line, "expected a number for '" + e.key + "', got '" +
                                  e.value + "'");
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto* e = find(key);
    return e ? number(*e) : fallback;
  }

  int get_int(const std::string& key, int fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    const double v = number(*e);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      fail(cfg_.path, e->line, "expected an integer for '" + key + "'");
    return i;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    fail(cfg_.path, e->line,
         "expected true/false for '" + key + "', got '" + e->value + "'");
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
  }

  VecX numbers(const ParsedConfig::Entry& e, int count) const {
    std::istringstream is(e.value);
    VecX v(count);
    for (int i = 0; i < count; ++i)
      if (!(is >> v(i)))
        fail(cfg_.path, e.line,
             "expected " + std::to_string(count) + " numbers for '" + e.key +
                 "', got '" + e.value + "'");
    if (!(is >> std::ws).eof())
      fail(cfg_.path, e.line,
           "expected exactly " + std::to_string(count) + " numbers for '" +
               e.key + "'");
    return v;
  }

  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const {
    const auto* e = find(key);
    return e ? Vec3(numbers(*e, 3)) : fallback;
  }

  Eigen::Vector2d get_vec2(const std::string& key,
                           const Eigen::Vector2d& fallback) const {
    const auto* e = find(key);
    return e ? Eigen::Vector2d(numbers(*e, 2)) : fallback;
  }

  const ParsedConfig& cfg() const { return cfg_; }

 private:
  const ParsedConfig& cfg_;
};

ParsedConfig parse_lines(std::istream& in, const std::string& path) {
  ParsedConfig cfg;
  cfg.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos)
      fail(path, lineno, "expected 'key = value', got '" + body + "'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail(path, lineno, "empty key");
    if (value.empty()) fail(path, lineno, "empty value for '" + key + "'");
    cfg.entries.push_back({key, value, lineno, false});
  }
  return cfg;
}

PlatformConfig platform_from(const ParsedConfig& parsed) {
  Reader r(parsed);
  PlatformConfig base;
  const std::string preset = r.get_string("preset", "");
  if (preset == "four") base = PlatformConfig::four_platform();
  else if (preset == "six") base = PlatformConfig::six_platform();
  else if (!preset.empty())
    throw ConfigError(parsed.path + ": unknown preset '" + preset +
                      "' (expected four or six)");

  PlatformConfig c = base;
  c.n_generators = r.get_int("n_generators", base.n_generators);
  c.frame_mass = r.get_double("frame_mass_kg", base.frame_mass);
  c.module_mass = r.get_double("module_mass_kg", base.module_mass);
  c.frame_inertia_diag =
      r.get_vec3("frame_inertia_kgcm2", base.frame_inertia_diag);
  c.module_inertia_diag =
      r.get_vec3("module_inertia_kgcm2", base.module_inertia_diag);
  c.arm_length = r.get_double("arm_length_m", base.arm_length);
  c.prop_offset = r.get_double("prop_offset_m", base.prop_offset);
  c.max_prop_thrust = r.get_double("max_prop_thrust_n", base.max_prop_thrust);
  c.prop_thrust_const =
      r.get_double("prop_thrust_const_ns2", base.prop_thrust_const);
  c.prop_drag_const =
      r.get_double("prop_drag_const_nms2", base.prop_drag_const);
  c.com_offset = r.get_vec3("com_offset_m", base.com_offset);
  c.tilt_limits = r.get_vec2("tilt_limits_rad", base.tilt_limits);
  c.twist_limits = r.get_vec2("twist_limits_rad", base.twist_limits);
  c.thrust_limits = r.get_vec2("thrust_limits_n", base.thrust_limits);

  // Symmetric per-tick rate limits; expanded to the stacked X layout.
  if (r.has("rate_limit_angle_rad") || r.has("rate_limit_thrust_n")) {
    const double da = r.get_double("rate_limit_angle_rad", 0.06);
    const double dt = r.get_double("rate_limit_thrust_n", 0.2);
    const int n = c.n_generators;
    VecX hi(3 * n);
    hi.head(2 * n).setConstant(da);
    hi.tail(n).setConstant(dt);
    c.rate_limit_hi = hi;
    c.rate_limit_lo = -hi;
  }

  // mount_position_m_<i> overrides the regular N-gon layout; all N must be
  // given, 1-based.
  bool any_mount = false;
  for (int i = 1; i <= c.n_generators; ++i)
    if (r.has("mount_position_m_" + std::to_string(i))) any_mount = true;
  if (any_mount) {
    c.mount_positions.clear();
    for (int i = 1; i <= c.n_generators; ++i) {
      const std::string key = "mount_position_m_" + std::to_string(i);
      const auto* e = r.find(key);
      if (!e)
        throw ConfigError(parsed.path + ": missing '" + key +
                          "' (all mount positions must be given together)");
      c.mount_positions.push_back(Vec3(r.numbers(*e, 3)));
    }
  }

  c.downwash.k_visc = r.get_double("downwash_k_visc", base.downwash.k_visc);
  c.downwash.z0 = r.get_double("downwash_z0_m", base.downwash.z0);
  c.downwash.r0 = r.get_double("downwash_r0_m", base.downwash.r0);
  c.downwash.v0 = r.get_double("downwash_v0_ms", base.downwash.v0);
  c.downwash.rm0 = r.get_double("downwash_rm0_m", base.downwash.rm0);
  c.downwash.c1 = r.get_double("downwash_c1", base.downwash.c1);
  c.downwash.c2 = r.get_double("downwash_c2", base.downwash.c2);
  c.downwash.bv = r.get_double("downwash_bv_sm", base.downwash.bv);
  c.downwash.rho = r.get_double("downwash_rho_kgm3", base.downwash.rho);
  c.downwash.zfe_extent =
      r.get_double("downwash_zfe_extent", base.downwash.zfe_extent);

  parsed.reject_unknown();
  c.validate();
  return c;
}

}  // namespace

ParsedConfig ParsedConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_lines(in, path);
}

ParsedConfig ParsedConfig::from_string(const std::string& text,
                                       const std::string& path) {
  std::istringstream in(text);
  return parse_lines(in, path);
}

void ParsedConfig::reject_unknown() const {
  for (const auto& e : entries)
    if (!e.consumed) fail(path, e.line, "unknown key '" + e.key + "'");
}

PlatformConfig load_platform_config(const std::string& path) {
  return platform_from(ParsedConfig::from_file(path));
}

Scenario load_scenario(const std::string& path) {
  const ParsedConfig parsed = ParsedConfig::from_file(path);
  Reader r(parsed);
  Scenario s;
  s.name = r.get_string("name", std::filesystem::path(path).stem().string());

  const auto* platform_entry = r.find("platform");
  if (!platform_entry)
    throw ConfigError(parsed.path + ": missing required key 'platform'");
  std::filesystem::path platform_path(platform_entry->value);
  if (platform_path.is_relative())
    platform_path = std::filesystem::path(path).parent_path() / platform_path;
  s.platform = load_platform_config(platform_path.string());

  const std::string mode = r.get_string("mode", "downwash-aware");
  try {
    s.mode = allocator_mode_from_string(mode);
  } catch (const ConfigError&) {
    throw ConfigError(parsed.path + ": unknown mode '" + mode +
                      "' (expected conventional or downwash-aware)");
  }
  s.o_min = r.get_double("o_min_m", s.o_min);
  s.duration = r.get_double("duration_s", s.duration);
  s.seed = static_cast<std::uint64_t>(r.get_double("seed", 0.0));
  s.noise.pos_std = r.get_double("noise_pos_std_m", 0.0);
  s.noise.att_std = r.get_double("noise_att_std_rad", 0.0);
  s.noise.vel_std = r.get_double("noise_vel_std_ms", 0.0);
  s.noise.rate_std = r.get_double("noise_rate_std_rads", 0.0);
  s.command_delay = r.get_double("command_delay_s", s.command_delay);
  s.downwash_enabled = r.get_bool("downwash_enabled", s.downwash_enabled);
  s.thrust_time_constant =
      r.get_double("thrust_time_constant_s", s.thrust_time_constant);
  s.physics_dt = r.get_double("physics_dt_s", s.physics_dt);
  s.high_level_divisor = r.get_int("high_level_divisor", s.high_level_divisor);
  s.low_level_divisor = r.get_int("low_level_divisor", s.low_level_divisor);

  if (r.has("gamma") || r.has("q1_scale") || r.has("q2_scale") ||
      r.has("q3_scale")) {
    AllocatorWeights w = AllocatorWeights::defaults(s.platform.n_generators);
    const int n = s.platform.n_generators;
    w.q1 = r.get_double("q1_scale", 1.0) * MatX::Identity(3 * n, 3 * n);
    w.q2 = r.get_double("q2_scale", 1e4) * MatX::Identity(3 * n, 3 * n);
    w.q3 =
        r.get_double("q3_scale", 1e-2) * MatX::Identity(3 * n - 6, 3 * n - 6);
    w.gamma = r.get_double("gamma", w.gamma);
    s.weights = w;
  }

  s.gains.kp_pos = r.get_vec3("kp_pos", s.gains.kp_pos);
  s.gains.kd_pos = r.get_vec3("kd_pos", s.gains.kd_pos);
  s.gains.ki_pos = r.get_vec3("ki_pos", s.gains.ki_pos);
  s.gains.kp_att = r.get_vec3("kp_att", s.gains.kp_att);
  s.gains.kd_att = r.get_vec3("kd_att", s.gains.kd_att);
  s.gimbal_gains.kp_alpha = r.get_double("gimbal_kp", s.gimbal_gains.kp_alpha);
  s.gimbal_gains.ki_alpha = r.get_double("gimbal_ki", s.gimbal_gains.ki_alpha);
  s.gimbal_gains.kd_alpha = r.get_double("gimbal_kd", s.gimbal_gains.kd_alpha);
  s.gimbal_gains.kp_beta = s.gimbal_gains.kp_alpha;
  s.gimbal_gains.ki_beta = s.gimbal_gains.ki_alpha;
  s.gimbal_gains.kd_beta = s.gimbal_gains.kd_alpha;
  s.gimbal_gains.integral_limit =
      r.get_double("gimbal_integral_limit", s.gimbal_gains.integral_limit);

  // waypoint = t_s x_m y_m z_m roll_rad pitch_rad yaw_rad
  std::vector<Trajectory::Waypoint> wps;
  for (const auto& e : parsed.entries) {
    if (e.key != "waypoint") continue;
    e.consumed = true;
    const VecX v = r.numbers(e, 7);
    Trajectory::Waypoint w;
    w.t = v(0);
    w.position = v.segment<3>(1);
    w.attitude = v.segment<3>(4);
    wps.push_back(w);
  }
  if (wps.empty())
    throw ConfigError(parsed.path + ": scenario needs at least one waypoint");
  s.trajectory = Trajectory(std::move(wps));

  parsed.reject_unknown();
  s.validate();
  return s;
}

}  // namespace ovac
