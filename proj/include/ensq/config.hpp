// Copyright 2026 The ensq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration: an INI file checked against a fixed schema. Every key has
// a default and a provenance tag; keys set by the user are tagged "user" in
// the resolved echo. Unknown sections or keys are schema errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ensq/dynamics.hpp"
#include "ensq/ensemble.hpp"

namespace ensq {

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Provenance { paper_default, free, user };

inline const char* provenance_tag(Provenance p) {
  switch (p) {
    case Provenance::paper_default: return "paper-default";
    case Provenance::free: return "free";
    case Provenance::user: return "user";
  }
  return "free";
}

struct SchemaEntry {
  const char* key;  // section.name
  const char* value;
  Provenance provenance;
  const char* help;
};

// clang-format off
inline const std::vector<SchemaEntry>& config_schema() {
  using P = Provenance;
  static const std::vector<SchemaEntry> schema = {
    {"run.experiment", "", P::free, "rabi|ramsey|blockade2|threshold|certify|spectrum|fit"},
    {"run.trials", "1000", P::free, "Monte Carlo trials per scan point"},
    {"run.seed", "1", P::free, "64-bit base seed"},
    {"run.threads", "1", P::free, "worker threads; results do not depend on it"},
    {"run.output_dir", "", P::free, "empty: $ENSQ_OUTPUT_DIR or ./ensq-out"},

    {"trap.mean_atoms", "7.6", P::paper_default, "mean of the loading distribution"},
    {"trap.sigma_perp_um", "0.7", P::paper_default, "transverse rms cloud size"},
    {"trap.sigma_z_um", "7", P::paper_default, "axial rms cloud size"},
    {"trap.temperature_uK", "150", P::paper_default, "atom temperature"},
    {"trap.loading", "poisson", P::free, "poisson|fixed"},
    {"trap.fixed_atoms", "0", P::free, "atom number for fixed loading"},

    {"beam.profile", "gaussian", P::free, "gaussian|uniform"},
    {"beam.w_perp_um", "10", P::free, "transverse 1/e² intensity radius of the coupling"},
    {"beam.w_z_um", "100", P::free, "axial coupling scale"},
    {"beam.pi_time_zero_us", "0.24", P::paper_default, "collective |0̄>-|r̄> π time at the mean atom number"},
    {"beam.pi_time_one_us", "0.68", P::paper_default, "single-atom |1>-|r> π time"},

    {"rydberg.n", "97", P::paper_default, "principal quantum number"},
    {"rydberg.n_ref", "97", P::paper_default, "reference principal quantum number"},
    {"rydberg.r_ref_um", "8.7", P::paper_default, "reference separation"},
    {"rydberg.v_ref_mhz", "500", P::free, "pair shift / 2π at the reference point"},
    {"rydberg.angular", "z_enhanced", P::free, "isotropic|z_enhanced"},
    {"rydberg.anisotropy", "2", P::free, "a in (1 + a cos²θ)/(1 + a/3)"},
    {"rydberg.r_min_um", "1", P::free, "pair separations are clamped from below"},
    {"rydberg.r_char_um", "5", P::free, "short-range scale"},

    {"noise.laser_linewidth_hz", "100", P::paper_default, "beatnote FWHM"},
    {"noise.t2_ms", "0", P::free, ">0: collision rate such that laser + collisions reach 1/e at T2 (mean atom number)"},
    {"noise.collision_rate_per_pair", "0", P::free, "rad/s per collision partner (used when t2_ms = 0)"},
    {"noise.collision_density", "mean_field", P::free, "mean_field|realized"},
    {"noise.doppler", "true", P::free, "Doppler shifts on"},
    {"noise.trap_t2_ms", "0", P::free, "trap channel coherence time, 0 = off"},
    {"noise.rydberg_lifetime_us", "0", P::free, "0 = no decay"},
    {"noise.anti_blockade_sigma_mhz", "0", P::free, "extra pair-shift spread / 2π below r_char"},

    {"measurement.leak_0_to_1", "0.015", P::paper_default, "g0 survival of the push-out"},
    {"measurement.blowaway_leak", "0.002", P::paper_default, "additional g0 survival"},
    {"measurement.retain_1", "1", P::free, "g1 retention"},
    {"measurement.rydberg_maps_to", "loss", P::free, "loss|g1"},

    {"sim.e_max", "2", P::free, "excitation truncation of the basis"},
    {"sim.area_reference", "realized", P::free, "realized|nominal"},
    {"sim.preparation_fidelity", "1", P::free, "per-site probability that the |0̄>-|r̄> excitation works in a trajectory"},
    {"sim.inter_pulse_gap_us", "0.06", P::paper_default, "free evolution between pulses"},
    {"sim.reject_empty", "true", P::free, "redraw realizations with an empty site"},

    {"scan.start", "auto", P::free, "first scan value"},
    {"scan.stop", "auto", P::free, "last scan value"},
    {"scan.points", "auto", P::free, "number of scan values"},

    {"rabi.observable", "detect", P::free, "detect|detect_expected|p1bar"},

    {"ramsey.phases", "8", P::free, "analysis phases per gap"},
    {"ramsey.offset_hz", "0", P::free, "g1 frequency offset during the gap"},
    {"ramsey.observable", "detect", P::free, "detect|detect_expected|p1bar"},
    {"ramsey.agree_tolerance_ms", "0.3", P::paper_default, "T2 difference below which the two fit forms agree"},

    {"blockade2.separation_um", "8.7", P::paper_default, "control-target distance"},
    {"blockade2.control_mean_atoms", "9.9", P::paper_default, "mean loading of the control site"},
    {"blockade2.target_mean_atoms", "6.2", P::paper_default, "mean loading of the target site"},
    {"blockade2.perfect_blockade", "false", P::free, "replace cross-site shifts by a huge value"},
    {"blockade2.observable", "detect_expected", P::free, "detect|detect_expected|p1bar"},

    {"threshold.atoms", "5", P::free, "N"},
    {"threshold.k", "3", P::free, "entanglement depth"},
    {"threshold.samples", "100000", P::free, "random descriptors"},
    {"threshold.bins", "50", P::free, "P0 bins"},
    {"threshold.sampler", "general", P::free, "general|blockaded"},
    {"threshold.refine_steps", "200", P::free, "hill-climb moves per bin"},

    {"certify.points", "", P::free, "file with lines 'P0 err' and 'P1 err'"},
    {"certify.p0", "0.44", P::paper_default, ""},
    {"certify.p0_err", "0.02", P::paper_default, ""},
    {"certify.p1", "0.46", P::paper_default, ""},
    {"certify.p1_err", "0.03", P::paper_default, ""},
    {"certify.atoms", "0", P::free, ">0: also test every blockaded k-bound"},

    {"spectrum.atoms", "5", P::free, "fixed atom number, 0 = use the loading distribution"},
    {"spectrum.samples", "10000", P::free, "realizations"},

    {"fit.input", "", P::free, "scan CSV to fit"},
    {"fit.model", "both", P::free, "gaussian|kuhr|both|damped_rabi"},
  };
  return schema;
}
// clang-format on

class Config {
 public:
  Config() {
    for (const auto& e : config_schema()) values_[e.key] = {e.value, e.provenance};
  }

  static Config from_ini(std::istream& is) {
    Config c;
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw SchemaError(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) throw SchemaError("config: key '" + section + "' outside a section");
      for (const auto& [key, value] : body) c.set(section + "." + key, value.data());
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("config: cannot open " + path);
    return from_ini(in);
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw SchemaError("config: unknown key '" + key + "'");
    it->second = {trim(value), Provenance::user};
  }

  // Sets a default-tagged value (used for experiment-dependent defaults).
  void resolve_default(const std::string& key, const std::string& value) {
    auto& v = values_.at(key);
    if (v.provenance != Provenance::user) v.value = value;
  }

  bool is_user(const std::string& key) const { return entry(key).provenance == Provenance::user; }

  std::string str(const std::string& key) const { return entry(key).value; }

  double number(const std::string& key) const {
    const auto& s = entry(key).value;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw SchemaError("config: " + key + " = '" + s + "' is not a number");
    }
    return v;
  }

  std::int64_t integer(const std::string& key) const {
    const auto& s = entry(key).value;
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw SchemaError("config: " + key + " = '" + s + "' is not an integer");
    }
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& s = entry(key).value;
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw SchemaError("config: " + key + " = '" + s + "' is not a non-negative integer");
    }
    return v;
  }

  bool boolean(const std::string& key) const {
    const auto& s = entry(key).value;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw SchemaError("config: " + key + " = '" + s + "' is not a boolean");
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const {
    const auto& s = entry(key).value;
    for (const char* a : allowed)
      if (s == a) return s;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
    throw SchemaError("config: " + key + " = '" + s + "' is not one of " + list);
  }

  // Resolved configuration as INI with one provenance comment per key.
  void write_resolved(std::ostream& os) const {
    std::string section;
    for (const auto& e : config_schema()) {
      const std::string key = e.key;
      const auto dot = key.find('.');
      const std::string sec = key.substr(0, dot);
      if (sec != section) {
        os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
        section = sec;
      }
      const auto& v = entry(key);
      os << key.substr(dot + 1) << " = " << v.value << "  ; [" << provenance_tag(v.provenance) << "]\n";
    }
  }

 private:
  struct Value {
    std::string value;
    Provenance provenance;
  };

  const Value& entry(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw SchemaError("config: unknown key '" + key + "'");
    return it->second;
  }

  static std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::map<std::string, Value> values_;
};

// -- typed views ---------------------------------------------------------------

inline TrapParams trap_from(const Config& c) {
  TrapParams t;
  t.mean_atoms = c.number("trap.mean_atoms");
  t.sigma_perp_um = c.number("trap.sigma_perp_um");
  t.sigma_z_um = c.number("trap.sigma_z_um");
  t.temperature_uK = c.number("trap.temperature_uK");
  t.loading = c.choice("trap.loading", {"poisson", "fixed"}) == "fixed" ? Loading::fixed : Loading::poisson;
  t.fixed_atoms = static_cast<int>(c.integer("trap.fixed_atoms"));
  t.validate();
  return t;
}

inline BeamModel beam_from(const Config& c) {
  BeamModel b;
  b.profile = c.choice("beam.profile", {"gaussian", "uniform"}) == "uniform" ? BeamProfile::uniform
                                                                            : BeamProfile::gaussian;
  b.w_perp_um = c.number("beam.w_perp_um");
  b.w_z_um = c.number("beam.w_z_um");
  const double t0 = c.number("beam.pi_time_zero_us") * 1e-6;
  const double t1 = c.number("beam.pi_time_one_us") * 1e-6;
  if (!(t0 > 0 && t1 > 0)) throw SchemaError("config: π times must be positive");
  b.omega_zero = kPi / (t0 * std::sqrt(c.number("trap.mean_atoms")));
  b.omega_one = kPi / t1;
  b.validate();
  return b;
}

inline RydbergModel rydberg_from(const Config& c) {
  RydbergModel r;
  r.n_principal = static_cast<int>(c.integer("rydberg.n"));
  r.n_ref = static_cast<int>(c.integer("rydberg.n_ref"));
  r.r_ref_um = c.number("rydberg.r_ref_um");
  r.v_ref = kTwoPi * 1e6 * c.number("rydberg.v_ref_mhz");
  r.angular = c.choice("rydberg.angular", {"isotropic", "z_enhanced"}) == "isotropic" ? Angular::isotropic
                                                                                      : Angular::z_enhanced;
  r.anisotropy = c.number("rydberg.anisotropy");
  r.r_min_um = c.number("rydberg.r_min_um");
  r.r_char_um = c.number("rydberg.r_char_um");
  r.validate();
  return r;
}

inline NoiseModel noise_from(const Config& c) {
  NoiseModel n;
  n.laser_linewidth_hz = c.number("noise.laser_linewidth_hz");
  n.collision_density = c.choice("noise.collision_density", {"mean_field", "realized"}) == "realized"
                            ? CollisionDensity::realized
                            : CollisionDensity::mean_field;
  const double t2 = c.number("noise.t2_ms") * 1e-3;
  n.collision_rate_per_pair =
      t2 > 0 ? collision_rate_for_t2(t2, c.number("trap.mean_atoms"), n.laser_linewidth_hz)
             : c.number("noise.collision_rate_per_pair");
  n.doppler = c.boolean("noise.doppler");
  n.trap_dephasing_t2 = c.number("noise.trap_t2_ms") * 1e-3;
  n.rydberg_lifetime = c.number("noise.rydberg_lifetime_us") * 1e-6;
  n.anti_blockade_sigma = kTwoPi * 1e6 * c.number("noise.anti_blockade_sigma_mhz");
  n.anti_blockade_r_char_um = c.number("rydberg.r_char_um");
  n.validate();
  return n;
}

inline MeasurementModel measurement_from(const Config& c) {
  MeasurementModel m;
  m.leak_0_to_1 = c.number("measurement.leak_0_to_1");
  m.blowaway_leak = c.number("measurement.blowaway_leak");
  m.retain_1 = c.number("measurement.retain_1");
  m.rydberg_maps_to = c.choice("measurement.rydberg_maps_to", {"loss", "g1"}) == "g1" ? RydbergFate::g1
                                                                                      : RydbergFate::loss;
  m.validate();
  return m;
}

inline RunOptions options_from(const Config& c) {
  RunOptions o;
  o.e_max = static_cast<int>(c.integer("sim.e_max"));
  if (o.e_max < 1) throw SchemaError("config: sim.e_max must be at least 1");
  o.area_reference = c.choice("sim.area_reference", {"realized", "nominal"}) == "nominal" ? AreaReference::nominal
                                                                                        : AreaReference::realized;
  o.preparation_fidelity = c.number("sim.preparation_fidelity");
  o.measurement = measurement_from(c);
  return o;
}

}  // namespace ensq
