// Run configuration: a TOML-style key-value format with [section] headers,
// '#' comments, strings, numbers, and booleans. Parsing keeps line numbers
// so validation errors point at the offending line.
#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "ifdm/core.hpp"
#include "ifdm/packed.hpp"

namespace ifdm {

struct ConfigValue {
  std::string raw;
  int line = 0;
  bool quoted = false;
};

using ConfigMap = std::map<std::string, ConfigValue>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    bool in_quote = false;
    std::string stripped;
    for (char c : line) {
      if (c == '"') in_quote = !in_quote;
      if (c == '#' && !in_quote) break;
      stripped += c;
    }
    stripped = detail::trim(stripped);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw ConfigError("malformed section header", line_no);
      section = detail::trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value", line_no);
    std::string key = detail::trim(stripped.substr(0, eq));
    std::string val = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (val.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    ConfigValue cv;
    cv.line = line_no;
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"') {
      cv.raw = val.substr(1, val.size() - 2);
      cv.quoted = true;
    } else {
      cv.raw = val;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (map.count(full))
      throw ConfigError("duplicate key '" + full + "'", line_no);
    map[full] = cv;
  }
  return map;
}

struct RunConfig {
  // [grid]
  int n = 16;
  // [time]
  Real T = 0.1;
  int nt = 8;       // dual lattice intervals
  Real dt = 2e-3;   // forward stepper
  // [scheme]
  Backend backend = Backend::spectral;
  // [dual]
  Real a_v = 100.0, a_alpha = 100.0, a_p = 100.0;
  Real tol = 1e-8;
  int max_iter = 500;
  Real d0_scale = 0.0;       // random initial dual state magnitude
  Real base_perturb = 0.0;   // base-state pollution for recovery experiments
  // [forward]
  Real nu = 0.0, eta = 0.0;
  bool dealias = true;
  int sample_every = 1;
  // [scenario]
  std::string scenario = "constant";
  std::uint64_t seed = 1;
  std::string file;  // snapshot stem for scenario = from_file
  // [io]
  std::string output_dir = "out";

  AuxWeights aux() const { return AuxWeights{a_v, a_alpha, a_p}; }
  int forward_steps() const {
    return static_cast<int>(std::llround(T / dt));
  }
};

namespace detail {

inline Real parse_real(const ConfigValue& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const Real r = std::stod(v.raw, &pos);
    if (pos != v.raw.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v.raw + "'",
                      v.line);
  }
}

inline int parse_int(const ConfigValue& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long r = std::stol(v.raw, &pos);
    if (pos != v.raw.size()) throw std::invalid_argument("");
    return static_cast<int>(r);
  } catch (...) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v.raw + "'",
                      v.line);
  }
}

inline std::uint64_t parse_u64(const ConfigValue& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long r = std::stoull(v.raw, &pos);
    if (pos != v.raw.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError("key '" + key + "': expected an unsigned integer", v.line);
  }
}

inline bool parse_bool(const ConfigValue& v, const std::string& key) {
  if (v.raw == "true") return true;
  if (v.raw == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false", v.line);
}

}  // namespace detail

inline RunConfig config_from_map(const ConfigMap& m) {
  RunConfig c;
  for (const auto& [key, val] : m) {
    if (key == "grid.n") c.n = detail::parse_int(val, key);
    else if (key == "time.T") c.T = detail::parse_real(val, key);
    else if (key == "time.nt") c.nt = detail::parse_int(val, key);
    else if (key == "time.dt") c.dt = detail::parse_real(val, key);
    else if (key == "scheme.backend") {
      if (val.raw == "spectral") c.backend = Backend::spectral;
      else if (val.raw == "fd2") c.backend = Backend::fd2;
      else throw ConfigError("scheme.backend must be 'spectral' or 'fd2'", val.line);
    }
    else if (key == "dual.a_v") c.a_v = detail::parse_real(val, key);
    else if (key == "dual.a_alpha") c.a_alpha = detail::parse_real(val, key);
    else if (key == "dual.a_p") c.a_p = detail::parse_real(val, key);
    else if (key == "dual.tol") c.tol = detail::parse_real(val, key);
    else if (key == "dual.max_iter") c.max_iter = detail::parse_int(val, key);
    else if (key == "dual.d0_scale") c.d0_scale = detail::parse_real(val, key);
    else if (key == "dual.base_perturb") c.base_perturb = detail::parse_real(val, key);
    else if (key == "forward.nu") c.nu = detail::parse_real(val, key);
    else if (key == "forward.eta") c.eta = detail::parse_real(val, key);
    else if (key == "forward.dealias") c.dealias = detail::parse_bool(val, key);
    else if (key == "forward.sample_every") c.sample_every = detail::parse_int(val, key);
    else if (key == "scenario.name") c.scenario = val.raw;
    else if (key == "scenario.seed") c.seed = detail::parse_u64(val, key);
    else if (key == "scenario.file") c.file = val.raw;
    else if (key == "io.output_dir") c.output_dir = val.raw;
    else throw ConfigError("unknown key '" + key + "'", val.line);
  }

  // Range validation, pointing at the offending line where one exists.
  auto line_of = [&m](const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second.line;
  };
  if (c.n < 4) throw ConfigError("grid.n must be >= 4", line_of("grid.n"));
  if (!(c.T > 0.0)) throw ConfigError("time.T must be positive", line_of("time.T"));
  if (c.nt < 2) throw ConfigError("time.nt must be >= 2", line_of("time.nt"));
  if (!(c.dt > 0.0)) throw ConfigError("time.dt must be positive", line_of("time.dt"));
  if (!(c.a_v > 0.0)) throw ConfigError("dual.a_v must be positive", line_of("dual.a_v"));
  if (!(c.a_alpha > 0.0))
    throw ConfigError("dual.a_alpha must be positive", line_of("dual.a_alpha"));
  if (!(c.a_p > 0.0)) throw ConfigError("dual.a_p must be positive", line_of("dual.a_p"));
  if (!(c.tol > 0.0)) throw ConfigError("dual.tol must be positive", line_of("dual.tol"));
  if (c.max_iter < 1)
    throw ConfigError("dual.max_iter must be >= 1", line_of("dual.max_iter"));
  if (c.d0_scale < 0.0)
    throw ConfigError("dual.d0_scale must be >= 0", line_of("dual.d0_scale"));
  if (c.base_perturb < 0.0)
    throw ConfigError("dual.base_perturb must be >= 0", line_of("dual.base_perturb"));
  if (c.nu < 0.0) throw ConfigError("forward.nu must be >= 0", line_of("forward.nu"));
  if (c.eta < 0.0) throw ConfigError("forward.eta must be >= 0", line_of("forward.eta"));
  if (c.sample_every < 1)
    throw ConfigError("forward.sample_every must be >= 1", line_of("forward.sample_every"));
  if (c.scenario != "constant" && c.scenario != "beltrami_alfven" &&
      c.scenario != "random_smooth" && c.scenario != "mhd_embed" &&
      c.scenario != "from_file")
    throw ConfigError("scenario.name must be one of constant, beltrami_alfven, "
                      "random_smooth, mhd_embed, from_file",
                      line_of("scenario.name"));
  if (c.scenario == "from_file" && c.file.empty())
    throw ConfigError("scenario.file required when scenario.name = from_file",
                      line_of("scenario.name"));
  if (c.forward_steps() < 1)
    throw ConfigError("time.T / time.dt must give at least one step",
                      line_of("time.dt"));
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  return config_from_map(parse_config_text(text));
}

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](Real v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "[grid]\nn = " << c.n << "\n\n";
  out << "[time]\nT = " << num(c.T) << "\nnt = " << c.nt << "\ndt = " << num(c.dt)
      << "\n\n";
  out << "[scheme]\nbackend = \"" << to_string(c.backend) << "\"\n\n";
  out << "[dual]\na_v = " << num(c.a_v) << "\na_alpha = " << num(c.a_alpha)
      << "\na_p = " << num(c.a_p) << "\ntol = " << num(c.tol)
      << "\nmax_iter = " << c.max_iter << "\nd0_scale = " << num(c.d0_scale)
      << "\nbase_perturb = " << num(c.base_perturb) << "\n\n";
  out << "[forward]\nnu = " << num(c.nu) << "\neta = " << num(c.eta)
      << "\ndealias = " << (c.dealias ? "true" : "false")
      << "\nsample_every = " << c.sample_every << "\n\n";
  out << "[scenario]\nname = \"" << c.scenario << "\"\nseed = " << c.seed << "\n";
  if (!c.file.empty()) out << "file = \"" << c.file << "\"\n";
  out << "\n[io]\noutput_dir = \"" << c.output_dir << "\"\n";
  return out.str();
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.n == b.n && a.T == b.T && a.nt == b.nt && a.dt == b.dt &&
         a.backend == b.backend && a.a_v == b.a_v && a.a_alpha == b.a_alpha &&
         a.a_p == b.a_p && a.tol == b.tol && a.max_iter == b.max_iter &&
         a.d0_scale == b.d0_scale && a.base_perturb == b.base_perturb &&
         a.nu == b.nu && a.eta == b.eta && a.dealias == b.dealias &&
         a.sample_every == b.sample_every && a.scenario == b.scenario &&
         a.seed == b.seed && a.file == b.file && a.output_dir == b.output_dir;
}

}  // namespace ifdm
