#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clothsim/inverse.hpp"
#include "clothsim/mpm.hpp"

namespace clothsim {

/// Sectioned key-value file:
///   [section]
///   key = value      # comment
/// Values keep their raw text; typed access parses on demand.
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile parse_file(const std::filesystem::path& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin = "<memory>");

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& section, const std::string& key, const Vec3& fallback) const;

  /// Required variant: throws ConfigError when missing.
  std::string require_string(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::string lookup(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_;
};

/// Everything a run needs, resolved and validated from a config file
/// plus `--set section.key=value` overrides.
struct RunConfig {
  std::filesystem::path config_dir;

  // [inputs]
  std::filesystem::path cloth_path;
  std::optional<std::filesystem::path> collider_path;
  std::optional<std::filesystem::path> target_path;
  std::optional<std::filesystem::path> simulated_path;
  std::optional<std::filesystem::path> body_path;

  // [output]
  std::filesystem::path output_dir = "out";
  std::string output_format = "obj";  // obj | ply

  SimConfig sim;
  PhysParams phys;
  OptimConfig optim;

  // [metrics]
  double tau = 0.001;
  int metric_samples = 10000;
  uint64_t seed = 0;

  KeyValueFile raw;

  static RunConfig load(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides);

  /// Echo of every effective setting, suitable for the run manifest.
  std::string echo() const;
};

}  // namespace clothsim
