#pragma once

// Run configuration and its text format.
//
// Grammar (one item per line):
//   config   := { line }
//   line     := blank | comment | section | pair
//   comment  := ('#' | ';') any-text
//   section  := '[' name ']'
//   pair     := key ws* '=' ws* value       value runs to end of line, trimmed
// Keys are unique within a section. Unknown sections or keys are errors.

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "quditops/error.hpp"
#include "quditops/io.hpp"
#include "quditops/models.hpp"

namespace quditops {

/// Bad user input in a config file or on the command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline ConfigSections parse_sections(const std::string& text) {
  ConfigSections out;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    if (!out[section].emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

struct RunConfig {
  std::string command = "lanczos";

  // [model]
  std::string model = "ising1d";  // ising1d | ising2d | potts | kitaev-potts
  std::string spin = "1";         // S as "1", "1/2", "3/2", ...
  int d = 3;                      // potts, kitaev-potts
  std::string coupling = "1";     // J, or "auto" for 1/sqrt(S(S+1))
  double hx = 1.0;
  double hz = 1.0;
  double h = 1.0;
  std::string boundary = "thermodynamic";  // thermodynamic | ring | torus | open
  int lx = 0;
  int ly = 0;
  std::vector<double> jx;  // kitaev-potts per-bond couplings; empty means 1
  std::vector<double> jy;
  bool hermitian_closure = true;

  // [lanczos]
  int n_max = 12;
  std::uint64_t budget = 200'000'000;
  std::uint64_t memory_mb = 0;
  unsigned threads = 1;
  std::string checkpoint;  // write resumable state here when set
  std::string resume;      // continue from this checkpoint when set

  // [fit]
  std::string fit_form = "linear_log";
  int fit_n_min = 2;
  int fit_n_max = 0;
  std::uint64_t random_seed = 1;

  // [autocorr]
  std::string input = "bn.json";
  double t_max = 3.0;
  double dt = 0.05;
  int n_total = 4000;  // linear growth spreads weight over ~exp(2 alpha t) sites
  bool extrapolate = true;

  // [oed]
  std::string seed = "Z@1";
  std::uint64_t cap = 100'000'000;

  // [evolve]
  double quench_time = 0.0;  // 0 disables the quench
  std::vector<double> quench_jx;
  std::vector<double> quench_jy;

  // [verify]
  std::string suite = "all";
  double perturb = 0.0;

  // [output]
  std::string output_dir = ".";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_double(v[i]);
  return out;
}

inline double to_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw ConfigError(key + ": '" + s + "' is not a number");
  return v;
}

inline long long to_integer(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

inline std::uint64_t to_unsigned(const std::string& key, const std::string& s) {
  const long long v = to_integer(key, s);
  if (v < 0) throw ConfigError(key + ": must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

inline bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

inline std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

// Binds each (section, key) to a field for both directions of the format.
template <typename Visitor>
void visit_fields(RunConfig& c, Visitor&& v) {
  v("run", "command", c.command);
  v("model", "name", c.model);
  v("model", "spin", c.spin);
  v("model", "d", c.d);
  v("model", "J", c.coupling);
  v("model", "hx", c.hx);
  v("model", "hz", c.hz);
  v("model", "h", c.h);
  v("model", "boundary", c.boundary);
  v("model", "L", c.lx);
  v("model", "Ly", c.ly);
  v("model", "jx", c.jx);
  v("model", "jy", c.jy);
  v("model", "hermitian_closure", c.hermitian_closure);
  v("lanczos", "n_max", c.n_max);
  v("lanczos", "budget", c.budget);
  v("lanczos", "memory_mb", c.memory_mb);
  v("lanczos", "threads", c.threads);
  v("lanczos", "checkpoint", c.checkpoint);
  v("lanczos", "resume", c.resume);
  v("fit", "form", c.fit_form);
  v("fit", "n_min", c.fit_n_min);
  v("fit", "n_max", c.fit_n_max);
  v("fit", "random_seed", c.random_seed);
  v("autocorr", "input", c.input);
  v("autocorr", "t_max", c.t_max);
  v("autocorr", "dt", c.dt);
  v("autocorr", "n_total", c.n_total);
  v("autocorr", "extrapolate", c.extrapolate);
  v("oed", "seed", c.seed);
  v("oed", "cap", c.cap);
  v("evolve", "quench_time", c.quench_time);
  v("evolve", "quench_jx", c.quench_jx);
  v("evolve", "quench_jy", c.quench_jy);
  v("verify", "suite", c.suite);
  v("verify", "perturb", c.perturb);
  v("output", "dir", c.output_dir);
}

}  // namespace detail

inline std::string to_config_text(const RunConfig& config) {
  RunConfig c = config;
  std::ostringstream os;
  std::string current;
  detail::visit_fields(c, [&](const char* section, const char* key, auto& field) {
    if (current != section) {
      os << (current.empty() ? "" : "\n") << '[' << section << "]\n";
      current = section;
    }
    using T = std::decay_t<decltype(field)>;
    os << key << " = ";
    if constexpr (std::is_same_v<T, std::string>) os << field;
    else if constexpr (std::is_same_v<T, bool>) os << (field ? "true" : "false");
    else if constexpr (std::is_same_v<T, double>) os << io::format_double(field);
    else if constexpr (std::is_same_v<T, std::vector<double>>) os << detail::join(field);
    else os << field;
    os << '\n';
  });
  return os.str();
}

/// Applies the sections on top of `base`; unknown keys are errors.
inline RunConfig apply_sections(const ConfigSections& sections, RunConfig base = {}) {
  std::map<std::string, std::map<std::string, bool>> known;
  detail::visit_fields(base, [&](const char* section, const char* key, auto& field) {
    known[section][key] = true;
    auto s = sections.find(section);
    if (s == sections.end()) return;
    auto k = s->second.find(key);
    if (k == s->second.end()) return;
    const std::string name = std::string(section) + "." + key;
    const std::string& value = k->second;
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, std::string>) field = value;
    else if constexpr (std::is_same_v<T, bool>) field = detail::to_bool(name, value);
    else if constexpr (std::is_same_v<T, double>) field = detail::to_double(name, value);
    else if constexpr (std::is_same_v<T, std::vector<double>>) field = detail::to_list(name, value);
    else if constexpr (std::is_same_v<T, int>) field = static_cast<int>(detail::to_integer(name, value));
    else if constexpr (std::is_same_v<T, unsigned>) field = static_cast<unsigned>(detail::to_unsigned(name, value));
    else field = detail::to_unsigned(name, value);
  });
  for (const auto& [section, keys] : sections) {
    if (!known.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (!known[section].count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
  return base;
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
  return apply_sections(parse_sections(text), std::move(base));
}

inline std::string config_fingerprint(const RunConfig& c) {
  return io::fingerprint(std::string(io::kArtifactVersion) + "\n" + to_config_text(c));
}

// ----------------------------------------------------------- model mapping

inline SpinValue parse_spin(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      const int v = std::stoi(s);
      if (v < 1 || std::to_string(v) != s) throw ConfigError("spin '" + s + "' is not a positive half-integer");
      return SpinValue{2 * v};
    }
    if (s.substr(slash + 1) != "2") throw ConfigError("spin '" + s + "' must have denominator 2");
    const int num = std::stoi(s.substr(0, slash));
    if (num < 1 || num % 2 == 0) throw ConfigError("spin '" + s + "' is not a positive half-integer");
    return SpinValue{num};
  } catch (const std::logic_error&) {
    throw ConfigError("spin '" + s + "' is not a positive half-integer");
  }
}

inline LatticeSpec resolve_lattice(const RunConfig& c, int dimension) {
  if (c.boundary == "thermodynamic") return dimension == 1 ? LatticeSpec::chain() : LatticeSpec::plane();
  if (c.boundary == "ring") {
    if (dimension != 1) throw ConfigError("ring boundary needs a one-dimensional model");
    if (c.lx < 2) throw ConfigError("ring needs L >= 2");
    return LatticeSpec::ring(c.lx);
  }
  if (c.boundary == "torus") {
    if (dimension != 2) throw ConfigError("torus boundary needs a two-dimensional model");
    const int ly = c.ly > 0 ? c.ly : c.lx;
    if (c.lx < 2 || ly < 2) throw ConfigError("torus needs L, Ly >= 2");
    return LatticeSpec::torus(c.lx, ly);
  }
  throw ConfigError("unknown boundary '" + c.boundary + "'");
}

inline ModelSpec resolve_model(const RunConfig& c) {
  if (c.model == "ising1d" || c.model == "ising2d") {
    IsingModel m;
    m.spin = parse_spin(c.spin);
    m.J = c.coupling == "auto" ? coupling_convention(m.spin) : detail::to_double("model.J", c.coupling);
    m.hx = c.hx;
    m.hz = c.hz;
    m.lattice = resolve_lattice(c, c.model == "ising1d" ? 1 : 2);
    return m;
  }
  if (c.model == "potts") {
    if (c.d < 2 || c.d > 15) throw ConfigError("potts needs 2 <= d <= 15");
    PottsModel m;
    m.d = c.d;
    if (c.coupling == "auto") throw ConfigError("J = auto applies to spin models only");
    m.J = detail::to_double("model.J", c.coupling);
    m.h = c.h;
    m.lattice = resolve_lattice(c, 1);
    return m;
  }
  if (c.model == "kitaev-potts") {
    if (c.d < 2 || c.d > 15) throw ConfigError("kitaev-potts needs 2 <= d <= 15");
    KitaevPottsModel m;
    m.d = c.d;
    m.sites = c.lx;
    if (m.sites < 2) throw ConfigError("kitaev-potts needs L >= 2 sites");
    // unspecified boundary: ring when the bond pattern closes, open otherwise
    if (c.boundary == "ring") m.periodic = true;
    else if (c.boundary == "open") m.periodic = false;
    else if (c.boundary == "thermodynamic") m.periodic = m.sites % 2 == 0;
    else throw ConfigError("kitaev-potts needs boundary = ring or open");
    if (m.periodic && m.sites % 2) throw ConfigError("periodic kitaev-potts needs an even number of sites");
    m.hermitian_closure = c.hermitian_closure;
    for (double j : c.jx) m.jx.emplace_back(j);
    for (double j : c.jy) m.jy.emplace_back(j);
    return m;
  }
  throw ConfigError("unknown model '" + c.model + "'");
}

/// Parses "Z@1", "X2Z1@0", "Z@0+Z@3": Weyl factors X^a Z^b at 0-based sites,
/// summed with unit coefficients.
inline std::vector<PhasedString> parse_seed(const std::string& spec, int d) {
  std::vector<PhasedString> out;
  std::istringstream is(spec);
  std::string part;
  while (std::getline(is, part, '+')) {
    part = trim(part);
    const auto at = part.find('@');
    if (at == std::string::npos || at == 0) throw ConfigError("seed '" + part + "' must look like Z@1");
    const std::string ops = part.substr(0, at);
    int site = 0;
    try {
      std::size_t used = 0;
      site = std::stoi(part.substr(at + 1), &used);
      if (used != part.size() - at - 1 || site < 0) throw std::invalid_argument("site");
    } catch (const std::logic_error&) {
      throw ConfigError("seed '" + part + "' has a bad site index");
    }
    int v = 0, w = 0;
    std::size_t i = 0;
    while (i < ops.size()) {
      const char letter = ops[i++];
      int exponent = 0;
      std::size_t digits = 0;
      while (i < ops.size() && std::isdigit(static_cast<unsigned char>(ops[i]))) {
        exponent = exponent * 10 + (ops[i++] - '0');
        ++digits;
      }
      if (!digits) exponent = 1;
      if (letter == 'X') v = (v + exponent) % d;
      else if (letter == 'Z') w = (w + exponent) % d;
      else throw ConfigError("seed '" + part + "': only X and Z factors are allowed");
    }
    out.push_back({Complex(1.0), WeylString::single(d, Site{site, 0}, v, w)});
  }
  if (out.empty()) throw ConfigError("empty seed");
  return out;
}

}  // namespace quditops
