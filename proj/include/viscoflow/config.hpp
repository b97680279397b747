#pragma once

// Plain-text run configuration: `[section]` headers, `key = value` lines and
// `#` comments. Every key has a default; unknown keys are rejected. The
// canonical emission writes every key in a fixed order with %.17g numbers,
// so parse(emit(c)) reproduces c exactly.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "viscoflow/constitutive.hpp"
#include "viscoflow/grid.hpp"
#include "viscoflow/mms.hpp"
#include "viscoflow/scenario.hpp"

namespace viscoflow {

struct TimeOptions {
  double dt = 0.01;
  double t_end = 0.1;
  double cfl_max = 0.5;
};

struct OutputOptions {
  std::string dir = "out";
  int energy_every = 1;    // monitored steps between energy.csv rows
  int snapshot_every = 0;  // steps between field snapshots, 0 = final state only
  std::string format = "vtk";  // vtk | raw | none
};

using MmsOptions = MmsSettings;

struct SweepOptions {
  std::vector<double> eps{0.1, 0.05, 0.01, 0.0};
  std::vector<double> gamma{0.1, 0.5, 0.9};
};

struct IdentityOptions {
  long samples = 100000;
  long convexity_samples = 10000;
  std::string mutation = "none";  // none | negate_gamma_term (test-only)
};

struct SimConfig {
  std::string mode = "run";
  std::uint64_t seed = 42;
  int threads = 1;
  Index3 cells{16, 16, 16};
  Vec3 length{1.0, 1.0, 1.0};
  std::array<Bc, 3> bc{Bc::periodic, Bc::periodic, Bc::periodic};
  ModelParams model;
  ScenarioParams scenario;
  TimeOptions time;
  OutputOptions output;
  MmsOptions mms;
  SweepOptions sweep;
  IdentityOptions identities;

  /// Grid before scenario-imposed boundary tags.
  Grid grid() const {
    Grid g;
    g.n = cells;
    for (int d = 0; d < 3; ++d) {
      g.h[d] = length[d] / cells[d];
      g.bc[d] = {bc[d], bc[d]};
    }
    return g;
  }
};

inline const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> m{"run", "verify_mms", "sweep_eps", "sweep_gamma", "check_identities"};
  return m;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct BadValue {
  std::string reason;
};

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) throw BadValue{"expected a number, got '" + s + "'"};
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) throw BadValue{"expected an integer, got '" + s + "'"};
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw BadValue{"expected true or false, got '" + s + "'"};
}

inline Bc parse_bc(const std::string& s) {
  for (Bc b : {Bc::periodic, Bc::navier_slip, Bc::no_slip})
    if (s == to_string(b)) return b;
  throw BadValue{"expected periodic, navier_slip or no_slip, got '" + s + "'"};
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw BadValue{"expected a comma-separated list of numbers"};
  return out;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_double(v[i]);
  return out;
}

struct Key {
  std::string section, name;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string&)> set;
};

template <class F>
Key number(std::string sec, std::string name, F field) {
  return {sec, name, [field](const SimConfig& c) { return fmt_double(field(const_cast<SimConfig&>(c))); },
          [field](SimConfig& c, const std::string& v) { field(c) = parse_double(v); }};
}

template <class Int, class F>
Key integer(std::string sec, std::string name, F field) {
  return {sec, name, [field](const SimConfig& c) { return std::to_string(field(const_cast<SimConfig&>(c))); },
          [field](SimConfig& c, const std::string& v) { field(c) = parse_int<Int>(v); }};
}

template <class F>
Key text(std::string sec, std::string name, F field) {
  return {sec, name, [field](const SimConfig& c) { return field(const_cast<SimConfig&>(c)); },
          [field](SimConfig& c, const std::string& v) { field(c) = v; }};
}

template <class F>
Key flag(std::string sec, std::string name, F field) {
  return {sec, name, [field](const SimConfig& c) { return std::string(field(const_cast<SimConfig&>(c)) ? "true" : "false"); },
          [field](SimConfig& c, const std::string& v) { field(c) = parse_bool(v); }};
}

inline const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> v;
    v.push_back(text("run", "mode", [](SimConfig& c) -> std::string& { return c.mode; }));
    v.push_back(integer<std::uint64_t>("run", "seed", [](SimConfig& c) -> std::uint64_t& { return c.seed; }));
    v.push_back(integer<int>("run", "threads", [](SimConfig& c) -> int& { return c.threads; }));
    for (int d = 0; d < 3; ++d) {
      const std::string ax(1, "xyz"[d]);
      v.push_back(integer<int>("grid", "n" + ax, [d](SimConfig& c) -> int& { return c.cells[d]; }));
      v.push_back(number("grid", "l" + ax, [d](SimConfig& c) -> double& { return c.length[d]; }));
      v.push_back({"grid", "bc_" + ax, [d](const SimConfig& c) { return std::string(to_string(c.bc[d])); },
                   [d](SimConfig& c, const std::string& s) { c.bc[d] = parse_bc(s); }});
    }
    v.push_back(number("model", "nu", [](SimConfig& c) -> double& { return c.model.nu; }));
    v.push_back(number("model", "mu", [](SimConfig& c) -> double& { return c.model.mu; }));
    v.push_back(number("model", "lambda", [](SimConfig& c) -> double& { return c.model.lambda_diff; }));
    v.push_back(number("model", "sigma", [](SimConfig& c) -> double& { return c.model.sigma; }));
    v.push_back(number("model", "delta1", [](SimConfig& c) -> double& { return c.model.delta1; }));
    v.push_back(number("model", "delta2", [](SimConfig& c) -> double& { return c.model.delta2; }));
    v.push_back(number("model", "a", [](SimConfig& c) -> double& { return c.model.a; }));
    v.push_back(number("model", "gamma", [](SimConfig& c) -> double& { return c.model.gamma; }));
    v.push_back(number("model", "eps", [](SimConfig& c) -> double& { return c.model.eps; }));
    v.push_back(flag("model", "classical_diagnostics", [](SimConfig& c) -> bool& { return c.model.classical_diagnostics; }));
    v.push_back(text("scenario", "name", [](SimConfig& c) -> std::string& { return c.scenario.name; }));
    v.push_back(number("scenario", "amplitude", [](SimConfig& c) -> double& { return c.scenario.amplitude; }));
    v.push_back(number("scenario", "lid_velocity", [](SimConfig& c) -> double& { return c.scenario.lid_velocity; }));
    v.push_back(number("scenario", "b0_amplitude", [](SimConfig& c) -> double& { return c.scenario.b0_amplitude; }));
    v.push_back(number("scenario", "b0_dip", [](SimConfig& c) -> double& { return c.scenario.b0_dip; }));
    v.push_back(flag("scenario", "defect", [](SimConfig& c) -> bool& { return c.scenario.defect; }));
    v.push_back(number("time", "dt", [](SimConfig& c) -> double& { return c.time.dt; }));
    v.push_back(number("time", "t_end", [](SimConfig& c) -> double& { return c.time.t_end; }));
    v.push_back(number("time", "cfl_max", [](SimConfig& c) -> double& { return c.time.cfl_max; }));
    v.push_back(text("output", "dir", [](SimConfig& c) -> std::string& { return c.output.dir; }));
    v.push_back(integer<int>("output", "energy_every", [](SimConfig& c) -> int& { return c.output.energy_every; }));
    v.push_back(integer<int>("output", "snapshot_every", [](SimConfig& c) -> int& { return c.output.snapshot_every; }));
    v.push_back(text("output", "format", [](SimConfig& c) -> std::string& { return c.output.format; }));
    v.push_back(integer<int>("mms", "n0", [](SimConfig& c) -> int& { return c.mms.n0; }));
    v.push_back(integer<int>("mms", "levels", [](SimConfig& c) -> int& { return c.mms.levels; }));
    v.push_back(number("mms", "beta", [](SimConfig& c) -> double& { return c.mms.beta; }));
    v.push_back(number("mms", "t_end", [](SimConfig& c) -> double& { return c.mms.t_end; }));
    v.push_back(number("mms", "cfl", [](SimConfig& c) -> double& { return c.mms.cfl; }));
    v.push_back(integer<int>("mms", "temporal_n", [](SimConfig& c) -> int& { return c.mms.temporal_n; }));
    v.push_back(number("mms", "temporal_t_end", [](SimConfig& c) -> double& { return c.mms.temporal_t_end; }));
    v.push_back(number("mms", "temporal_dt", [](SimConfig& c) -> double& { return c.mms.temporal_dt; }));
    v.push_back(integer<int>("mms", "temporal_levels", [](SimConfig& c) -> int& { return c.mms.temporal_levels; }));
    v.push_back({"sweep", "eps", [](const SimConfig& c) { return fmt_list(c.sweep.eps); },
                 [](SimConfig& c, const std::string& s) { c.sweep.eps = parse_list(s); }});
    v.push_back({"sweep", "gamma", [](const SimConfig& c) { return fmt_list(c.sweep.gamma); },
                 [](SimConfig& c, const std::string& s) { c.sweep.gamma = parse_list(s); }});
    v.push_back(integer<long>("identities", "samples", [](SimConfig& c) -> long& { return c.identities.samples; }));
    v.push_back(integer<long>("identities", "convexity_samples",
                              [](SimConfig& c) -> long& { return c.identities.convexity_samples; }));
    v.push_back(text("identities", "mutation", [](SimConfig& c) -> std::string& { return c.identities.mutation; }));
    return v;
  }();
  return k;
}

inline bool one_of(const std::string& s, const std::vector<std::string>& allowed) {
  for (const auto& a : allowed)
    if (s == a) return true;
  return false;
}

}  // namespace detail

/// Throws ValidationError naming the first offending key.
inline void validate_config(const SimConfig& c) {
  if (!detail::one_of(c.mode, mode_names())) throw ValidationError("run.mode", "unknown mode '" + c.mode + "'");
  if (c.threads < 1) throw ValidationError("run.threads", "must be >= 1");
  for (int d = 0; d < 3; ++d) {
    if (!(c.length[d] > 0.0) || !std::isfinite(c.length[d]))
      throw ValidationError(std::string("grid.l") + "xyz"[d], "must be positive");
    if (c.cells[d] < 1) throw ValidationError(std::string("grid.n") + "xyz"[d], "must be >= 1");
  }
  scenario_grid(c.scenario, c.grid()).validate();
  c.model.validate();
  if (!detail::one_of(c.scenario.name, scenario_names()))
    throw ValidationError("scenario.name", "unknown scenario '" + c.scenario.name + "'");
  if (!std::isfinite(c.scenario.amplitude)) throw ValidationError("scenario.amplitude", "must be finite");
  if (!std::isfinite(c.scenario.lid_velocity)) throw ValidationError("scenario.lid_velocity", "must be finite");
  if (!(std::abs(c.scenario.b0_amplitude) < 1.0 / 1.2))
    throw ValidationError("scenario.b0_amplitude", "must satisfy |b0_amplitude| < 1/1.2 for an SPD B0");
  if (!(c.scenario.b0_dip >= 0.0 && c.scenario.b0_dip < 1.0)) throw ValidationError("scenario.b0_dip", "must lie in [0,1)");
  if (!(c.time.dt > 0.0)) throw ValidationError("time.dt", "must be positive");
  if (!(c.time.t_end >= 0.0)) throw ValidationError("time.t_end", "must be nonnegative");
  if (!(c.time.cfl_max > 0.0)) throw ValidationError("time.cfl_max", "must be positive");
  if (c.output.energy_every < 1) throw ValidationError("output.energy_every", "must be >= 1");
  if (c.output.snapshot_every < 0) throw ValidationError("output.snapshot_every", "must be >= 0");
  if (!detail::one_of(c.output.format, {"vtk", "raw", "none"}))
    throw ValidationError("output.format", "must be vtk, raw or none");
  if (c.mms.n0 < 4) throw ValidationError("mms.n0", "must be >= 4");
  if (c.mms.levels < 2) throw ValidationError("mms.levels", "must be >= 2");
  if (!(c.mms.beta > 0.0 && c.mms.beta <= 0.25)) throw ValidationError("mms.beta", "must lie in (0, 0.25]");
  if (!(c.mms.t_end > 0.0) || !(c.mms.temporal_t_end > 0.0)) throw ValidationError("mms.t_end", "must be positive");
  if (!(c.mms.cfl > 0.0 && c.mms.cfl <= 0.5)) throw ValidationError("mms.cfl", "must lie in (0, 0.5]");
  if (c.mms.temporal_n < 4) throw ValidationError("mms.temporal_n", "must be >= 4");
  if (!(c.mms.temporal_dt > 0.0)) throw ValidationError("mms.temporal_dt", "must be positive");
  if (c.mms.temporal_levels < 3) throw ValidationError("mms.temporal_levels", "must be >= 3");
  for (double e : c.sweep.eps)
    if (!(e >= 0.0 && e < 1.0)) throw ValidationError("sweep.eps", "entries must lie in [0,1)");
  for (double g : c.sweep.gamma)
    if (!((g > 0.0 || (g == 0.0 && c.model.classical_diagnostics)) && g < 1.0))
      throw ValidationError("sweep.gamma", "entries must lie in (0,1), or [0,1) with classical_diagnostics");
  if (c.identities.samples < 1 || c.identities.convexity_samples < 0)
    throw ValidationError("identities.samples", "must be positive");
  if (!detail::one_of(c.identities.mutation, {"none", "negate_gamma_term"}))
    throw ValidationError("identities.mutation", "must be none or negate_gamma_term");
}

/// Parses and validates. `[model] preset = oldroyd_b | giesekus` resets the
/// relaxation rates before any explicit model key is applied.
inline SimConfig parse_config(const std::string& text) {
  SimConfig c;
  struct Entry {
    int line;
    std::string section, key, value;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& k : detail::keys()) known = known || k.section == section;
      if (!known) throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "missing key");
    if (section.empty()) throw ParseError(line, "key '" + key + "' outside of a section");
    if (!seen.insert(section + "." + key).second) throw ParseError(line, "duplicate key " + section + "." + key);
    entries.push_back({line, section, key, value});
  }

  for (const Entry& e : entries) {
    if (e.section != "model" || e.key != "preset") continue;
    if (e.value == "oldroyd_b") {
      c.model.delta1 = 1.0;
      c.model.delta2 = 0.0;
    } else if (e.value == "giesekus") {
      c.model.delta1 = 0.0;
      c.model.delta2 = 1.0;
    } else {
      throw ParseError(e.line, "unknown preset '" + e.value + "' (expected oldroyd_b or giesekus)");
    }
  }
  for (const Entry& e : entries) {
    if (e.section == "model" && e.key == "preset") continue;
    const detail::Key* k = nullptr;
    for (const auto& cand : detail::keys())
      if (cand.section == e.section && cand.name == e.key) k = &cand;
    if (!k) throw ParseError(e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
    try {
      k->set(c, e.value);
    } catch (const detail::BadValue& b) {
      throw ParseError(e.line, e.section + "." + e.key + ": " + b.reason);
    }
  }
  validate_config(c);
  return c;
}

/// Canonical text form: every key, fixed order, %.17g numbers.
inline std::string emit_config(const SimConfig& c) {
  std::string out, section;
  for (const auto& k : detail::keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(c) + "\n";
  }
  return out;
}

}  // namespace viscoflow
