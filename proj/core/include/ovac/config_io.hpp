#pragma once

#include <string>
#include <vector>

#include "ovac/sim.hpp"
#include "ovac/types.hpp"

namespace ovac {

/// Line-based `key = value` config text. Keys carry explicit units
/// (e.g. frame_mass_kg); unknown keys are rejected with a file:line
/// diagnostic to catch typos. `#` starts a comment; repeated keys are
/// allowed only where the schema says so (waypoints, mount positions).
struct ParsedConfig {
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  std::string path;
  std::vector<Entry> entries;

  static ParsedConfig from_file(const std::string& path);
  static ParsedConfig from_string(const std::string& text,
                                  const std::string& path = "<string>");

  /// Throws ConfigError naming the first unconsumed key.
  void reject_unknown() const;
};

PlatformConfig load_platform_config(const std::string& path);

/// Loads a scenario file; its `platform` key is resolved relative to the
/// scenario file's directory. CLI-style overrides may be applied afterward.
Scenario load_scenario(const std::string& path);

}  // namespace ovac
