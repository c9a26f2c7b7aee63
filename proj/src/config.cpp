#include "clothsim/config.hpp"

#include <fstream>
#include <sstream>

namespace clothsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path.string());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
  KeyValueFile out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + " line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": empty key");
    }
    out.sections_[section][key] = trim(line.substr(eq + 1));
  }
  return out;
}

bool KeyValueFile::has(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  return sit != sections_.end() && sit->second.count(key) > 0;
}

void KeyValueFile::set(const std::string& section, const std::string& key,
                       const std::string& value) {
  sections_[section][key] = value;
}

std::string KeyValueFile::lookup(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) throw ConfigError("missing config section [" + section + "]");
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) {
    throw ConfigError("missing config key " + section + "." + key);
  }
  return kit->second;
}

std::string KeyValueFile::get_string(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
  return has(section, key) ? lookup(section, key) : fallback;
}

std::string KeyValueFile::require_string(const std::string& section, const std::string& key) const {
  return lookup(section, key);
}

double KeyValueFile::get_double(const std::string& section, const std::string& key,
                                double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = lookup(section, key);
  try {
    size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config value " + section + "." + key + " is not a number: '" + raw + "'");
  }
}

int KeyValueFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = lookup(section, key);
  try {
    size_t pos = 0;
    const int v = std::stoi(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config value " + section + "." + key + " is not an integer: '" + raw + "'");
  }
}

bool KeyValueFile::get_bool(const std::string& section, const std::string& key,
                            bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = lookup(section, key);
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError("config value " + section + "." + key + " is not a boolean: '" + raw + "'");
}

Vec3 KeyValueFile::get_vec3(const std::string& section, const std::string& key,
                            const Vec3& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = lookup(section, key);
  std::istringstream ss(raw);
  Vec3 v;
  if (!(ss >> v.x() >> v.y() >> v.z())) {
    throw ConfigError("config value " + section + "." + key + " is not a 3-vector: '" + raw + "'");
  }
  std::string extra;
  if (ss >> extra) {
    throw ConfigError("config value " + section + "." + key + " has trailing tokens: '" + raw + "'");
  }
  return v;
}

RunConfig RunConfig::load(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  RunConfig rc;
  rc.raw = KeyValueFile::parse_file(path);
  rc.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override must be section.key=value, got '" + ov + "'");
    }
    rc.raw.set(ov.substr(0, dot), ov.substr(dot + 1, eq - dot - 1), ov.substr(eq + 1));
  }
  const KeyValueFile& kv = rc.raw;

  auto resolve = [&](const std::string& raw_path) -> std::filesystem::path {
    std::filesystem::path p = raw_path;
    return p.is_absolute() ? p : rc.config_dir / p;
  };

  if (kv.has("inputs", "cloth")) rc.cloth_path = resolve(kv.require_string("inputs", "cloth"));
  if (kv.has("inputs", "collider")) {
    rc.collider_path = resolve(kv.require_string("inputs", "collider"));
  }
  if (kv.has("inputs", "target")) rc.target_path = resolve(kv.require_string("inputs", "target"));
  if (kv.has("inputs", "simulated")) {
    rc.simulated_path = resolve(kv.require_string("inputs", "simulated"));
  }
  if (kv.has("inputs", "body")) rc.body_path = resolve(kv.require_string("inputs", "body"));

  rc.output_dir = resolve(kv.get_string("output", "dir", "out"));
  rc.output_format = kv.get_string("output", "format", "obj");
  if (rc.output_format != "obj" && rc.output_format != "ply") {
    throw ConfigError("output.format must be obj or ply");
  }

  rc.sim.frame_dt = kv.get_double("sim", "frame_dt", rc.sim.frame_dt);
  rc.sim.substeps = kv.get_int("sim", "substeps", rc.sim.substeps);
  rc.sim.grid_resolution = kv.get_int("sim", "grid_resolution", rc.sim.grid_resolution);
  rc.sim.gravity = kv.get_vec3("sim", "gravity", rc.sim.gravity);
  rc.sim.deterministic = kv.get_bool("sim", "deterministic", rc.sim.deterministic);
  rc.sim.frames = kv.get_int("sim", "frames", rc.sim.frames);
  rc.sim.friction = kv.get_double("sim", "friction", rc.sim.friction);
  rc.sim.strict_cfl = kv.get_bool("sim", "strict_cfl", rc.sim.strict_cfl);
  rc.sim.strict_domain = kv.get_bool("sim", "strict_domain", rc.sim.strict_domain);
  if (kv.has("sim", "domain_min") != kv.has("sim", "domain_max")) {
    throw ConfigError("domain_min and domain_max must be given together");
  }
  if (kv.has("sim", "domain_min")) {
    Aabb box;
    box.lo = kv.get_vec3("sim", "domain_min", Vec3::Zero());
    box.hi = kv.get_vec3("sim", "domain_max", Vec3::Zero());
    rc.sim.domain = box;
  }
  rc.sim.validate();

  rc.phys.elastic.E = kv.get_double("phys", "E", rc.phys.elastic.E);
  rc.phys.elastic.nu = kv.get_double("phys", "nu", rc.phys.elastic.nu);
  rc.phys.elastic.gamma = kv.get_double("phys", "gamma", rc.phys.elastic.gamma);
  rc.phys.elastic.kappa = kv.get_double("phys", "kappa", rc.phys.elastic.kappa);
  rc.phys.rho = kv.get_double("phys", "rho", rc.phys.rho);
  rc.phys.alpha = kv.get_double("phys", "alpha", rc.phys.alpha);
  rc.phys.validate();

  rc.optim.iterations = kv.get_int("optim", "iterations", rc.optim.iterations);
  rc.optim.d_rho = kv.get_double("optim", "d_rho", rc.optim.d_rho);
  rc.optim.d_E = kv.get_double("optim", "d_E", rc.optim.d_E);
  rc.optim.d_alpha = kv.get_double("optim", "d_alpha", rc.optim.d_alpha);
  rc.optim.lr_rho = kv.get_double("optim", "lr_rho", rc.optim.lr_rho);
  rc.optim.lr_E = kv.get_double("optim", "lr_E", rc.optim.lr_E);
  rc.optim.lr_alpha = kv.get_double("optim", "lr_alpha", rc.optim.lr_alpha);
  rc.optim.beta1 = kv.get_double("optim", "beta1", rc.optim.beta1);
  rc.optim.beta2 = kv.get_double("optim", "beta2", rc.optim.beta2);
  rc.optim.adam_eps = kv.get_double("optim", "adam_eps", rc.optim.adam_eps);
  rc.optim.init_rho = kv.get_double("optim", "init_rho", rc.optim.init_rho);
  rc.optim.init_E = kv.get_double("optim", "init_E", rc.optim.init_E);
  rc.optim.init_alpha = kv.get_double("optim", "init_alpha", rc.optim.init_alpha);
  rc.optim.fixed_nu = kv.get_double("optim", "nu", rc.optim.fixed_nu);
  rc.optim.fixed_gamma = kv.get_double("optim", "gamma", rc.optim.fixed_gamma);
  rc.optim.fixed_kappa = kv.get_double("optim", "kappa", rc.optim.fixed_kappa);
  rc.optim.horizon = kv.get_int("optim", "horizon", rc.optim.horizon);
  rc.optim.validate();

  rc.tau = kv.get_double("metrics", "tau", rc.tau);
  if (!(rc.tau > 0.0)) throw ConfigError("metrics.tau must be > 0");
  rc.metric_samples = kv.get_int("metrics", "samples", rc.metric_samples);
  if (rc.metric_samples < 1) throw ConfigError("metrics.samples must be >= 1");
  rc.seed = static_cast<uint64_t>(kv.get_int("metrics", "seed", 0));

  // referenced inputs must exist up front
  for (const auto& p : {rc.cloth_path}) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError("input path does not exist: " + p.string());
    }
  }
  for (const auto& opt : {rc.collider_path, rc.target_path, rc.simulated_path, rc.body_path}) {
    if (opt && !std::filesystem::exists(*opt)) {
      throw ConfigError("input path does not exist: " + opt->string());
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(rc.output_dir, ec);
  if (ec) {
    throw ConfigError("output directory not creatable: " + rc.output_dir.string() + " (" +
                      ec.message() + ")");
  }
  return rc;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  for (const auto& [section, keys] : raw.sections()) {
    for (const auto& [key, value] : keys) {
      out << "config " << (section.empty() ? "" : section + ".") << key << " = " << value << "\n";
    }
  }
  return out.str();
}

}  // namespace clothsim
