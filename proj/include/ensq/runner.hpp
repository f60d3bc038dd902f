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

// Experiments behind the command-line subcommands. Each returns its artifacts
// as (file name, contents) pairs; identical configurations give identical
// bytes at any thread count.
//
// Every experiment writes config.resolved.ini and results.csv
// (scan_value,mean,stderr,trials). Per experiment:
//   rabi       scan: R0 pulse duration (µs); observable after R0(t) R1(π)
//   ramsey     scan: gap (ms); mean = fringe peak-to-peak amplitude over
//              ramsey.phases analysis phases; report: both envelope fits
//   blockade2  scan: θ/π; results = U_b target, also ua.csv, ub_post.csv,
//              control.csv; report: ratio at θ = π, fits, slope, F
//   threshold  scan: P̄0 bin centre; mean = max P̄1, trials = bin count
//   certify    report only (results.csv holds the fraction)
//   spectrum   spectrum.csv per realization; results = mean ᾱ_N/(√N Ω)
//   fit        report.txt and residuals.csv for fit.input

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ensq/analysis.hpp"
#include "ensq/config.hpp"
#include "ensq/dynamics.hpp"
#include "ensq/entanglement.hpp"
#include "ensq/hamiltonian.hpp"
#include "ensq/sequences.hpp"

namespace ensq {

using Artifacts = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"rabi",     "ramsey",   "blockade2", "threshold",
                                                 "certify", "spectrum", "fit"};
  return names;
}

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline std::vector<double> scan_grid(Config& cfg, double start, double stop, int points) {
  cfg.resolve_default("scan.start", fmt(start));
  cfg.resolve_default("scan.stop", fmt(stop));
  cfg.resolve_default("scan.points", std::to_string(points));
  const double a = cfg.number("scan.start");
  const double b = cfg.number("scan.stop");
  const auto n = cfg.integer("scan.points");
  if (n < 1) throw SchemaError("config: scan.points must be at least 1");
  std::vector<double> g;
  for (std::int64_t i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
  return g;
}

inline MonteCarloConfig mc_from(const Config& cfg, std::size_t sites) {
  MonteCarloConfig mc;
  const auto trap = trap_from(cfg);
  mc.sites.assign(sites, trap);
  if (sites == 2) {
    mc.sites[0].mean_atoms = cfg.number("blockade2.control_mean_atoms");
    mc.sites[1].mean_atoms = cfg.number("blockade2.target_mean_atoms");
    mc.sites[1].center_um = Vec3(cfg.number("blockade2.separation_um"), 0.0, 0.0);
  }
  mc.beam = beam_from(cfg);
  mc.rydberg = rydberg_from(cfg);
  mc.noise = noise_from(cfg);
  mc.options = options_from(cfg);
  mc.reject_empty = cfg.boolean("sim.reject_empty");
  mc.seed = cfg.unsigned_integer("run.seed");
  mc.threads = static_cast<int>(cfg.integer("run.threads"));
  return mc;
}

inline Duration spacing_from(const Config& cfg) {
  return {cfg.number("sim.inter_pulse_gap_us"), TimeUnit::us};
}

inline std::size_t trials_from(const Config& cfg) {
  const auto t = cfg.integer("run.trials");
  if (t < 1) throw SchemaError("config: run.trials must be at least 1");
  return static_cast<std::size_t>(t);
}

// Seed of scan point i, shared by every program evaluated at that point.
inline std::uint64_t point_seed(std::uint64_t seed, std::size_t i) { return splitmix64(seed ^ splitmix64(i + 1)); }

inline std::string observable_name(const Config& cfg, const std::string& key, const std::string& site) {
  return site + "." + cfg.choice(key, {"detect", "detect_expected", "p1bar"});
}

struct Column {
  std::vector<double> x, mean, err, trials;

  void push(double xv, const Estimate& e) {
    x.push_back(xv);
    mean.push_back(e.mean);
    err.push_back(e.stderr_);
    trials.push_back(static_cast<double>(e.count));
  }

  std::string csv() const {
    std::ostringstream os;
    os << "scan_value,mean,stderr,trials\n";
    for (std::size_t i = 0; i < x.size(); ++i)
      os << fmt(x[i]) << ',' << fmt(mean[i]) << ',' << fmt(err[i]) << ',' << fmt(trials[i]) << '\n';
    return os.str();
  }

  // Points with positive error bars; zero errors (noiseless data) drop the
  // weights altogether.
  ScanData scan(double x_scale = 1.0) const {
    ScanData d;
    bool weighted = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(mean[i])) continue;
      d.x.push_back(x[i] * x_scale);
      d.y.push_back(mean[i]);
      d.yerr.push_back(err[i]);
      weighted = weighted && err[i] > 0;
    }
    if (!weighted) d.yerr.clear();
    return d;
  }
};

inline std::string report_text(const std::vector<std::pair<std::string, std::string>>& lines) {
  std::ostringstream os;
  for (const auto& [k, v] : lines) os << k << '=' << v << '\n';
  return os.str();
}

inline void append_fit(std::vector<std::pair<std::string, std::string>>& lines, const std::string& prefix,
                       const FitResult& f) {
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    lines.push_back({prefix + f.names[i], fmt(f.values[i])});
    lines.push_back({prefix + f.names[i] + "_stderr", fmt(f.stderrs[i])});
  }
  lines.push_back({prefix + "chi2_reduced", fmt(f.chi2_reduced)});
  lines.push_back({prefix + "converged", f.converged ? "true" : "false"});
}

}  // namespace detail

inline Artifacts run_rabi(Config& cfg) {
  const auto grid = detail::scan_grid(cfg, 0.0, 1.2, 25);
  auto mc = detail::mc_from(cfg, 1);
  const std::size_t trials = detail::trials_from(cfg);
  const std::string obs = detail::observable_name(cfg, "rabi.observable", "s");
  const auto spacing = detail::spacing_from(cfg);
  detail::Column col;
  // One seed for every duration: the curve is traced on common realizations.
  mc.seed = detail::point_seed(cfg.unsigned_integer("run.seed"), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t_us = grid[i];
    ProgramFactory factory = [t_us, spacing](const Register&) {
      PulseProgram p;
      Pulse r0;
      r0.duration = Duration{t_us, TimeUnit::us};
      p.steps.push_back(r0);
      if (spacing.seconds() > 0) p.steps.push_back(Gap{spacing, {}});
      p.steps.push_back(make_pulse(Site::single, Transition::one_ryd, Angle::pi(1)));
      return with_measurement(p);
    };
    col.push(t_us, monte_carlo(factory, mc, trials)[obs]);
  }
  std::vector<std::pair<std::string, std::string>> rep = {{"experiment", "rabi"}, {"observable", obs}};
  try {
    const auto fit = fit_damped_rabi(col.scan(1e-6));
    detail::append_fit(rep, "fit.", fit);
    const double nominal = std::sqrt(cfg.number("trap.mean_atoms")) * mc.beam.omega_zero;
    rep.push_back({"omega_over_sqrtN_omega", detail::fmt(fit.value("omega") / nominal)});
  } catch (const NumericalError& e) {
    rep.push_back({"fit.error", e.what()});
  }
  return {{"results.csv", col.csv()}, {"report.txt", detail::report_text(rep)}};
}

// Fringe amplitude per gap from the first harmonic in the analysis phase,
// with every phase of one trial sharing the same realization and noise.
inline Artifacts run_ramsey(Config& cfg) {
  const auto grid = detail::scan_grid(cfg, 0.0, 5.0, 8);
  auto mc = detail::mc_from(cfg, 1);
  const std::size_t trials = detail::trials_from(cfg);
  const auto phases = cfg.integer("ramsey.phases");
  if (phases < 3) throw SchemaError("config: ramsey.phases must be at least 3");
  const Frequency offset{cfg.number("ramsey.offset_hz"), FrequencyUnit::Hz};
  const std::string obs = detail::observable_name(cfg, "ramsey.observable", "s");
  const auto spacing = detail::spacing_from(cfg);
  const auto names = standard_observables(1);
  const auto slot = static_cast<std::size_t>(std::find(names.begin(), names.end(), obs) - names.begin());
  detail::Column col;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::uint64_t seed = detail::point_seed(cfg.unsigned_integer("run.seed"), i);
    const Duration gap{grid[i], TimeUnit::ms};
    const auto res = monte_carlo_trials({"re", "im"}, trials, mc.threads, [&](std::size_t t) {
      Rng base = trial_rng(seed, t);
      const Register reg = draw_register(mc, base);
      cplx acc = 0.0;
      for (std::int64_t j = 0; j < phases; ++j) {
        Rng rng = base;
        const double phi = 2.0 * static_cast<double>(j) / static_cast<double>(phases);
        const auto prog = with_measurement(ramsey_program(gap, Angle::pi(phi), offset, Site::single, spacing));
        const auto row = standard_row(run_program(prog, reg, mc.noise, mc.options, rng), reg);
        acc += row[slot] * std::polar(1.0, -kPi * phi);
      }
      acc /= static_cast<double>(phases);
      return std::vector<double>{acc.real(), acc.imag()};
    });
    const cplx c(res["re"].mean, res["im"].mean);
    const double amp = 4.0 * std::abs(c);
    const double u = std::abs(c) > 0 ? std::arg(c) : 0.0;
    const double err = 4.0 * std::hypot(res["re"].stderr_ * std::cos(u), res["im"].stderr_ * std::sin(u));
    col.push(grid[i], {amp, err, res["re"].count});
  }
  std::vector<std::pair<std::string, std::string>> rep = {{"experiment", "ramsey"}, {"observable", obs}};
  const auto data = col.scan(1e-3);
  try {
    const auto ga = fit_gaussian_decay(data);
    const auto kb = fit_kuhr_decay(data);
    detail::append_fit(rep, "gaussian.", ga);
    detail::append_fit(rep, "kuhr.", kb);
    const double diff = std::abs(ga.value("T2") - kb.value("T2"));
    const double sigma = std::hypot(ga.stderr_of("T2"), kb.stderr_of("T2"));
    rep.push_back({"T2_difference", detail::fmt(diff)});
    rep.push_back({"T2_difference_over_sigma", detail::fmt(sigma > 0 ? diff / sigma : 0.0)});
    rep.push_back({"fits_agree", diff <= cfg.number("ramsey.agree_tolerance_ms") * 1e-3 ? "true" : "false"});
  } catch (const Error& e) {
    rep.push_back({"fit.error", e.what()});
  }
  return {{"results.csv", col.csv()}, {"report.txt", detail::report_text(rep)}};
}

inline Artifacts run_blockade2(Config& cfg) {
  const auto grid = detail::scan_grid(cfg, 0.0, 1.0, 9);
  auto mc = detail::mc_from(cfg, 2);
  if (cfg.boolean("blockade2.perfect_blockade")) mc.cross_site_shift = 1e6 * mc.beam.omega_zero * 10.0;
  const std::size_t trials = detail::trials_from(cfg);
  const std::string obs = cfg.choice("blockade2.observable", {"detect", "detect_expected", "p1bar"});
  const auto spacing = detail::spacing_from(cfg);
  detail::Column ua, ub, post, control;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    mc.seed = detail::point_seed(cfg.unsigned_integer("run.seed"), i);
    const Angle theta = Angle::pi(grid[i]);
    const auto a = monte_carlo([&](const Register&) { return with_measurement(ua_program(theta, Site::target, spacing)); },
                               mc, trials);
    const auto b = monte_carlo([&](const Register&) { return with_measurement(ub_program(theta, spacing)); }, mc,
                               trials);
    ua.push(grid[i], a["t." + obs]);
    ub.push(grid[i], b["t." + obs]);
    post.push(grid[i], b["t.detect_post"]);
    control.push(grid[i], b["c." + obs]);
  }
  std::vector<std::pair<std::string, std::string>> rep = {{"experiment", "blockade2"}, {"observable", obs}};
  std::size_t at_pi = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - 1.0) < std::abs(grid[at_pi] - 1.0)) at_pi = i;
  rep.push_back({"theta_over_pi_ratio_point", detail::fmt(grid[at_pi])});
  rep.push_back({"ratio_ub_over_ua", detail::fmt(ub.mean[at_pi] / ua.mean[at_pi])});
  rep.push_back({"postselected_target", detail::fmt(post.mean[at_pi])});
  const double floor = leakage_background(mc.options.measurement, mc.sites[1].mean_atoms, AtomStatistics::poisson);
  rep.push_back({"leakage_floor", detail::fmt(floor)});
  try {
    const auto data = ua.scan(kPi);
    FitResult fa = data.size() >= 6 ? fit_damped_rabi(data) : FitResult{};
    if (fa.predict) {
      detail::append_fit(rep, "ua_fit.", fa);
      const auto s = fit_scale(ub.scan(kPi), fa.predict);
      rep.push_back({"ub_scale_of_ua_fit", detail::fmt(s.value("scale"))});
      rep.push_back({"ub_scale_of_ua_fit_stderr", detail::fmt(s.stderr_of("scale"))});
    }
  } catch (const Error& e) {
    rep.push_back({"ua_fit.error", e.what()});
  }
  try {
    const auto slope = small_angle_slope(control.scan(kPi));
    rep.push_back({"control_small_angle_slope", detail::fmt(slope.value("slope"))});
    rep.push_back({"control_small_angle_slope_stderr", detail::fmt(slope.stderr_of("slope"))});
  } catch (const Error& e) {
    rep.push_back({"control_small_angle_slope.error", e.what()});
  }
  const double omega_nominal = std::sqrt(mc.sites[1].mean_atoms) * mc.beam.omega_zero;
  rep.push_back({"F", detail::fmt(scaling_parameter_F(omega_nominal, mc.rydberg.n_principal,
                                                      cfg.number("blockade2.separation_um"), mc.rydberg.n_ref,
                                                      mc.rydberg.r_ref_um))});
  return {{"results.csv", ub.csv()},
          {"ua.csv", ua.csv()},
          {"ub_post.csv", post.csv()},
          {"control.csv", control.csv()},
          {"report.txt", detail::report_text(rep)}};
}

inline Artifacts run_threshold(Config& cfg) {
  const int n = static_cast<int>(cfg.integer("threshold.atoms"));
  const int k = static_cast<int>(cfg.integer("threshold.k"));
  ThresholdOptions opt;
  opt.samples = static_cast<std::size_t>(cfg.unsigned_integer("threshold.samples"));
  opt.bins = static_cast<std::size_t>(cfg.unsigned_integer("threshold.bins"));
  opt.sampler = cfg.choice("threshold.sampler", {"general", "blockaded"}) == "blockaded" ? ThresholdSampler::blockaded
                                                                                       : ThresholdSampler::general;
  opt.refine_steps = static_cast<int>(cfg.integer("threshold.refine_steps"));
  opt.seed = cfg.unsigned_integer("run.seed");
  opt.threads = static_cast<int>(cfg.integer("run.threads"));
  const auto curve = numerical_threshold(n, k, opt);
  std::ostringstream os;
  os << "scan_value,mean,stderr,trials\n";
  std::size_t empty = 0;
  for (std::size_t b = 0; b < curve.bins(); ++b) {
    os << detail::fmt(curve.center(b)) << ',' << detail::fmt(curve.max_p1[b]) << ",0," << curve.counts[b] << '\n';
    empty += curve.empty(b) ? 1 : 0;
  }
  std::vector<std::pair<std::string, std::string>> rep = {{"experiment", "threshold"},
                                                          {"atoms", std::to_string(n)},
                                                          {"k", std::to_string(k)},
                                                          {"samples", std::to_string(opt.samples)},
                                                          {"empty_bins", std::to_string(empty)},
                                                          {"analytic_slope", detail::fmt(double(k) / n)}};
  return {{"results.csv", os.str()}, {"report.txt", detail::report_text(rep)}};
}

// Points file: two whitespace-separated lines "P0 err" and "P1 err"; '#'
// starts a comment.
inline std::array<double, 4> read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("certify: cannot open " + path);
  std::vector<double> v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    double a = 0, b = 0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw ParseError("certify: expected 'value error'", line_no, 1);
    v.push_back(a);
    v.push_back(b);
  }
  if (v.size() != 4) throw ParseError("certify: expected exactly two points", line_no, 1);
  return {v[0], v[1], v[2], v[3]};
}

inline Artifacts run_certify(Config& cfg) {
  std::array<double, 4> pts{cfg.number("certify.p0"), cfg.number("certify.p0_err"), cfg.number("certify.p1"),
                            cfg.number("certify.p1_err")};
  if (!cfg.str("certify.points").empty()) pts = read_points(cfg.str("certify.points"));
  const int atoms = static_cast<int>(cfg.integer("certify.atoms"));
  const auto r = certify_fraction(pts[0], pts[1], pts[2], pts[3], atoms);
  const double boot = certify_bootstrap_stderr(pts[0], pts[1], pts[2], pts[3], 100000, cfg.unsigned_integer("run.seed"));
  std::vector<std::pair<std::string, std::string>> rep = {
      {"experiment", "certify"},         {"p0", detail::fmt(pts[0])},      {"p0_err", detail::fmt(pts[1])},
      {"p1", detail::fmt(pts[2])},       {"p1_err", detail::fmt(pts[3])},  {"fraction", detail::fmt(r.fraction)},
      {"fraction_stderr", detail::fmt(r.stderr_)}, {"fraction_bootstrap_stderr", detail::fmt(boot)}};
  for (std::size_t k = 0; k < r.analytic_met.size(); ++k) {
    rep.push_back({"exceeds_bound_k" + std::to_string(k + 1), r.analytic_met[k] ? "true" : "false"});
  }
  std::ostringstream os;
  os << "scan_value,mean,stderr,trials\n" << detail::fmt(pts[0]) << ',' << detail::fmt(r.fraction) << ',' << detail::fmt(r.stderr_) << ",1\n";
  return {{"results.csv", os.str()}, {"report.txt", detail::report_text(rep)}};
}

inline Artifacts run_spectrum(Config& cfg) {
  auto mc = detail::mc_from(cfg, 1);
  const auto atoms = cfg.integer("spectrum.atoms");
  if (atoms > 0) {
    mc.sites[0].loading = Loading::fixed;
    mc.sites[0].fixed_atoms = static_cast<int>(atoms);
  }
  const auto samples = static_cast<std::size_t>(cfg.unsigned_integer("spectrum.samples"));
  if (samples == 0) throw SchemaError("config: spectrum.samples must be positive");
  const std::uint64_t seed = cfg.unsigned_integer("run.seed");
  std::vector<std::array<double, 6>> rows(samples);
  const auto res = monte_carlo_trials({"ratio", "p_minus", "p_perp"}, samples, mc.threads, [&](std::size_t t) {
    Rng rng = trial_rng(seed, t);
    const Register reg = draw_register(mc, rng);
    const auto& s = reg.atoms;
    const double abar = collective_coupling(s.alphas);
    const double ratio = abar / (std::sqrt(s.mean_atoms) * mc.beam.omega_zero);
    const auto proj = dressed_projection(s);
    rows[t] = {static_cast<double>(s.size()), abar, ratio, proj.p_minus, proj.p_plus, proj.p_perp};
    return std::vector<double>{ratio, proj.p_minus, proj.p_perp};
  });
  std::ostringstream sp;
  sp << "atoms,alpha_bar,ratio,p_minus,p_plus,p_perp\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) sp << (c ? "," : "") << detail::fmt(r[c]);
    sp << '\n';
  }
  auto median = [&](int c) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  std::vector<std::pair<std::string, std::string>> rep = {
      {"experiment", "spectrum"},
      {"mean_ratio", detail::fmt(res["ratio"].mean)},
      {"mean_ratio_stderr", detail::fmt(res["ratio"].stderr_)},
      {"median_p_minus", detail::fmt(median(3))},
      {"median_p_perp", detail::fmt(median(5))}};
  std::ostringstream os;
  os << "scan_value,mean,stderr,trials\n"
     << detail::fmt(atoms > 0 ? static_cast<double>(atoms) : cfg.number("trap.mean_atoms")) << ',' << detail::fmt(res["ratio"].mean)
     << ',' << detail::fmt(res["ratio"].stderr_) << ',' << samples << '\n';
  return {{"results.csv", os.str()}, {"spectrum.csv", sp.str()}, {"report.txt", detail::report_text(rep)}};
}

inline Artifacts run_fit(Config& cfg) {
  const auto path = cfg.str("fit.input");
  if (path.empty()) throw SchemaError("config: fit.input is required");
  std::ifstream in(path);
  if (!in) throw SchemaError("fit: cannot open " + path);
  const auto data = read_scan_csv(in);
  const auto model = cfg.choice("fit.model", {"gaussian", "kuhr", "both", "damped_rabi"});
  std::vector<std::pair<std::string, std::string>> rep = {{"experiment", "fit"}, {"model", model}};
  Artifacts out;
  auto add = [&](const std::string& prefix, const FitResult& f) {
    detail::append_fit(rep, prefix, f);
    std::ostringstream os;
    write_residuals_csv(os, data, f);
    out.push_back({prefix + "residuals.csv", os.str()});
  };
  if (model == "gaussian" || model == "both") add("gaussian.", fit_gaussian_decay(data));
  if (model == "kuhr" || model == "both") add("kuhr.", fit_kuhr_decay(data));
  if (model == "damped_rabi") add("damped_rabi.", fit_damped_rabi(data));
  std::ostringstream os;
  write_scan_csv(os, data);
  out.insert(out.begin(), {"results.csv", os.str()});
  out.push_back({"report.txt", detail::report_text(rep)});
  return out;
}

// Runs one experiment; the resolved configuration is always the first
// artifact.
inline Artifacts run_experiment(const std::string& experiment, Config& cfg) {
  if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end()) {
    throw SchemaError("unknown experiment '" + experiment + "'");
  }
  if (cfg.is_user("run.experiment") && cfg.str("run.experiment") != experiment) {
    throw SchemaError("config: run.experiment = " + cfg.str("run.experiment") + " but subcommand is " + experiment);
  }
  cfg.resolve_default("run.experiment", experiment);
  Artifacts out;
  if (experiment == "rabi") out = run_rabi(cfg);
  else if (experiment == "ramsey") out = run_ramsey(cfg);
  else if (experiment == "blockade2") out = run_blockade2(cfg);
  else if (experiment == "threshold") out = run_threshold(cfg);
  else if (experiment == "certify") out = run_certify(cfg);
  else if (experiment == "spectrum") out = run_spectrum(cfg);
  else out = run_fit(cfg);
  std::ostringstream echo;
  cfg.write_resolved(echo);
  out.insert(out.begin(), {"config.resolved.ini", echo.str()});
  return out;
}

inline std::filesystem::path resolve_output_dir(const Config& cfg, const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (!cfg.str("run.output_dir").empty()) return cfg.str("run.output_dir");
  if (const char* env = std::getenv("ENSQ_OUTPUT_DIR"); env && *env) return env;
  return "ensq-out";
}

inline void write_artifacts(const std::filesystem::path& dir, const Artifacts& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << body;
  }
}

}  // namespace ensq
