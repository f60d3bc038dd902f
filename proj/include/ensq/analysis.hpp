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

// Curve fits and reductions of scan data.
//
// Nonlinear fits use damped least squares (Levenberg-Marquardt) with analytic
// Jacobians. Convergence: relative parameter step |δp|/|p| below 1e-8, or the
// damped step can no longer lower the cost; 200 iterations at most. The best
// iterate is always returned.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ensq/common.hpp"
#include "ensq/measurement.hpp"

namespace ensq {

struct ScanData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;  // empty: unweighted
  std::vector<double> trials;  // optional, carried through CSV

  std::size_t size() const noexcept { return x.size(); }

  void validate() const {
    if (x.size() != y.size()) throw ValidationError("scan: x and y lengths differ");
    if (!yerr.empty()) {
      if (yerr.size() != x.size()) throw ValidationError("scan: yerr length differs");
      for (double e : yerr)
        if (!(e > 0)) throw ValidationError("scan: yerr must be positive");
    }
  }
};

// CSV with header scan_value,mean,stderr,trials.
inline void write_scan_csv(std::ostream& os, const ScanData& d) {
  os << "scan_value,mean,stderr,trials\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << format_double(d.x[i]) << ',' << format_double(d.y[i]) << ','
       << format_double(d.yerr.empty() ? 0.0 : d.yerr[i]) << ','
       << format_double(d.trials.empty() ? 0.0 : d.trials[i]) << '\n';
  }
}

// Reads the CSV written by write_scan_csv. A header line is skipped; the
// stderr column is dropped when every entry is zero.
inline ScanData read_scan_csv(std::istream& is) {
  ScanData d;
  std::string line;
  std::size_t line_no = 0;
  bool all_zero = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cols.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ParseError("scan csv: not a number '" + cell + "'", line_no, 0);
      }
    }
    if (cols.size() < 2) throw ParseError("scan csv: need at least two columns", line_no, 0);
    d.x.push_back(cols[0]);
    d.y.push_back(cols[1]);
    d.yerr.push_back(cols.size() > 2 ? cols[2] : 0.0);
    d.trials.push_back(cols.size() > 3 ? cols[3] : 0.0);
    all_zero = all_zero && d.yerr.back() == 0.0;
  }
  if (all_zero) d.yerr.clear();
  return d;
}

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> stderrs;
  Eigen::MatrixXd covariance;
  double chi2_reduced = 0.0;
  bool converged = false;
  int iterations = 0;
  std::function<double(double)> predict;

  double value(std::string_view name) const { return values.at(slot(name)); }
  double stderr_of(std::string_view name) const { return stderrs.at(slot(name)); }

  std::size_t slot(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ValidationError("fit: no parameter " + std::string(name));
  }
};

// key=value report, one parameter per line with its standard error.
inline void write_fit_report(std::ostream& os, const FitResult& f) {
  os << "model=" << f.model << '\n';
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    os << f.names[i] << '=' << format_double(f.values[i]) << '\n'
       << f.names[i] << "_stderr=" << format_double(f.stderrs[i]) << '\n';
  }
  os << "chi2_reduced=" << format_double(f.chi2_reduced) << '\n'
     << "converged=" << (f.converged ? "true" : "false") << '\n'
     << "iterations=" << f.iterations << '\n';
}

inline void write_residuals_csv(std::ostream& os, const ScanData& d, const FitResult& f) {
  os << "scan_value,mean,model,residual\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double m = f.predict(d.x[i]);
    os << format_double(d.x[i]) << ',' << format_double(d.y[i]) << ',' << format_double(m) << ','
       << format_double(d.y[i] - m) << '\n';
  }
}

// -- damped least squares ----------------------------------------------------

// model(x, p, grad) returns f(x; p) and fills grad with ∂f/∂p.
using ModelFn = std::function<double(double, const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double relative_step = 1e-8;
};

inline FitResult levenberg_marquardt(const ScanData& data, const ModelFn& model, Eigen::VectorXd p,
                                     std::vector<std::string> names, const LeastSquaresOptions& opt = {}) {
  data.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto k = p.size();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!data.yerr.empty())
    for (Eigen::Index i = 0; i < n; ++i) w[i] = 1.0 / (data.yerr[i] * data.yerr[i]);

  Eigen::MatrixXd jac(n, k);
  Eigen::VectorXd res(n);
  auto evaluate = [&](const Eigen::VectorXd& q, bool with_jacobian) {
    double cost = 0.0;
    Eigen::VectorXd g(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = model(data.x[i], q, g);
      res[i] = data.y[i] - f;
      if (with_jacobian) jac.row(i) = g.transpose();
      cost += w[i] * res[i] * res[i];
    }
    return cost;
  };

  FitResult out;
  double cost = evaluate(p, true);
  if (!std::isfinite(cost)) throw NumericalError("fit: model is not finite at the initial guess");
  double lambda = 1e-3;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd a = jac.transpose() * w.asDiagonal() * jac;
    const Eigen::VectorXd g = jac.transpose() * (w.array() * res.array()).matrix();
    const double floor = 1e-12 * std::max(1e-300, a.diagonal().maxCoeff());
    bool accepted = false;
    bool small = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index j = 0; j < k; ++j) damped(j, j) += lambda * std::max(a(j, j), floor);
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      const Eigen::VectorXd trial = p + step;
      const Eigen::VectorXd saved_res = res;
      const double trial_cost = evaluate(trial, false);
      small = step.norm() <= opt.relative_step * (p.norm() + 1e-300);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        p = trial;
        cost = evaluate(p, true);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      res = saved_res;
      if (small) break;
      lambda *= 10.0;
    }
    if (small || !accepted || cost == 0.0) {
      out.converged = true;
      ++it;
      break;
    }
  }
  evaluate(p, true);
  out.iterations = it;
  out.names = std::move(names);
  out.values.assign(p.data(), p.data() + k);
  const double dof = static_cast<double>(std::max<Eigen::Index>(1, n - k));
  out.chi2_reduced = cost / dof;
  const Eigen::MatrixXd a = jac.transpose() * w.asDiagonal() * jac;
  Eigen::MatrixXd cov = a.completeOrthogonalDecomposition().pseudoInverse();
  if (data.yerr.empty()) cov *= out.chi2_reduced;
  out.covariance = cov;
  for (Eigen::Index j = 0; j < k; ++j) out.stderrs.push_back(std::sqrt(std::max(0.0, cov(j, j))));
  return out;
}

// -- Ramsey envelopes --------------------------------------------------------

inline double kuhr_constant() { return std::exp(2.0 / 3.0) - 1.0; }

// v_a(t) = v0 exp(-(t/T2)²)
inline double gaussian_decay(double t, double v0, double t2) { return v0 * std::exp(-(t / t2) * (t / t2)); }

// v_b(t) = v0 [1 + (e^{2/3} - 1)(t/T2)²]^{-3/2}
inline double kuhr_decay(double t, double v0, double t2) {
  return v0 * std::pow(1.0 + kuhr_constant() * (t / t2) * (t / t2), -1.5);
}

namespace detail {

inline void require_points(const ScanData& d, std::size_t n, const char* what) {
  d.validate();
  if (d.size() < n) throw ValidationError(std::string(what) + ": not enough points");
}

// v0 = max datum; T2 = first crossing of v0/e (linear interpolation), else
// extrapolated from the last point assuming a Gaussian.
inline Eigen::VectorXd decay_guess(const ScanData& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d.x[a] < d.x[b]; });
  const double v0 = *std::max_element(d.y.begin(), d.y.end());
  if (!(v0 > 0)) throw NumericalError("fit: decay data has no positive amplitude");
  const double level = v0 / std::exp(1.0);
  double t2 = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < order.size(); ++i) {
    const double y0 = d.y[order[i - 1]], y1 = d.y[order[i]];
    if (y0 >= level && y1 < level) {
      const double x0 = d.x[order[i - 1]], x1 = d.x[order[i]];
      t2 = x0 + (y0 - level) * (x1 - x0) / (y0 - y1);
      break;
    }
  }
  if (std::isnan(t2)) {
    const double xl = d.x[order.back()], yl = d.y[order.back()];
    t2 = (yl > 0 && yl < v0 && xl > 0) ? xl / std::sqrt(std::log(v0 / yl)) : std::max(xl, 1e-300);
  }
  Eigen::VectorXd p(2);
  p << v0, t2;
  return p;
}

}  // namespace detail

inline FitResult fit_gaussian_decay(const ScanData& data) {
  detail::require_points(data, 3, "fit_gaussian_decay");
  ModelFn m = [](double t, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const double u = t / p[1];
    const double e = std::exp(-u * u);
    g[0] = e;
    g[1] = p[0] * e * 2.0 * u * u / p[1];
    return p[0] * e;
  };
  auto f = levenberg_marquardt(data, m, detail::decay_guess(data), {"v0", "T2"});
  f.model = "gaussian_decay";
  const double v0 = f.values[0], t2 = f.values[1];
  f.predict = [v0, t2](double t) { return gaussian_decay(t, v0, t2); };
  return f;
}

inline FitResult fit_kuhr_decay(const ScanData& data) {
  detail::require_points(data, 3, "fit_kuhr_decay");
  ModelFn m = [](double t, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const double u = t / p[1];
    const double b = 1.0 + kuhr_constant() * u * u;
    const double v = std::pow(b, -1.5);
    g[0] = v;
    g[1] = p[0] * 1.5 * std::pow(b, -2.5) * kuhr_constant() * 2.0 * u * u / p[1];
    return p[0] * v;
  };
  auto f = levenberg_marquardt(data, m, detail::decay_guess(data), {"v0", "T2"});
  f.model = "kuhr_decay";
  const double v0 = f.values[0], t2 = f.values[1];
  f.predict = [v0, t2](double t) { return kuhr_decay(t, v0, t2); };
  return f;
}

// -- damped Rabi ---------------------------------------------------------------

// y = A e^{-γt} sin²(Ω t / 2) + c. Reported parameters: A, omega, gamma, offset
// and tau = 1/γ (infinite for γ <= 0).
inline double damped_rabi(double t, double a, double omega, double gamma, double c) {
  const double s = std::sin(0.5 * omega * t);
  return a * std::exp(-gamma * t) * s * s + c;
}

namespace detail {

// Largest discrete spectral peak of the mean-subtracted data over angular
// frequencies from half a period per span up to the Nyquist limit of the
// coarsest sampling step.
inline double spectral_peak(const ScanData& d, double& nyquist) {
  std::vector<double> xs = d.x;
  std::sort(xs.begin(), xs.end());
  const double span = xs.back() - xs.front();
  double max_step = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) max_step = std::max(max_step, xs[i] - xs[i - 1]);
  if (!(span > 0)) throw ValidationError("fit_damped_rabi: zero scan span");
  nyquist = kPi / max_step;
  const double lo = kPi / span;
  double mean = 0.0;
  for (double y : d.y) mean += y;
  mean /= static_cast<double>(d.size());
  constexpr int kGrid = 4000;
  double best = lo, best_power = -1.0;
  for (int j = 0; j <= kGrid; ++j) {
    const double w = lo + (nyquist - lo) * j / kGrid;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) acc += (d.y[i] - mean) * std::polar(1.0, -w * d.x[i]);
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best = w;
    }
  }
  return best;
}

}  // namespace detail

inline FitResult fit_damped_rabi(const ScanData& data) {
  detail::require_points(data, 6, "fit_damped_rabi");
  double nyquist = 0.0;
  const double w0 = detail::spectral_peak(data, nyquist);
  const auto [ymin, ymax] = std::minmax_element(data.y.begin(), data.y.end());
  ModelFn m = [](double t, const Eigen::VectorXd& q, Eigen::Ref<Eigen::VectorXd> g) {
    const double s = std::sin(0.5 * q[1] * t);
    const double c = std::cos(0.5 * q[1] * t);
    const double e = std::exp(-q[2] * t);
    g[0] = e * s * s;
    g[1] = q[0] * e * s * c * t;
    g[2] = -t * q[0] * e * s * s;
    g[3] = 1.0;
    return q[0] * e * s * s + q[3];
  };
  // Both signs of A are tried; the lower chi² wins.
  Eigen::VectorXd up(4), down(4);
  up << *ymax - *ymin, w0, 0.0, *ymin;
  down << *ymin - *ymax, w0, 0.0, *ymax;
  auto f = levenberg_marquardt(data, m, up, {"A", "omega", "gamma", "offset"});
  auto g = levenberg_marquardt(data, m, down, {"A", "omega", "gamma", "offset"});
  if (g.chi2_reduced < f.chi2_reduced) f = std::move(g);
  f.model = "damped_rabi";
  std::vector<double> xs = data.x;
  std::sort(xs.begin(), xs.end());
  const double span = xs.back() - xs.front();
  const double omega = std::abs(f.values[1]);
  if (omega >= nyquist * (1.0 - 1e-9) || omega * span < kTwoPi * (1.0 - 1e-9)) {
    throw NumericalError("fit_damped_rabi: scan does not resolve the oscillation (aliasing guard)");
  }
  const double gamma = f.values[2];
  f.names.push_back("tau");
  f.values.push_back(gamma > 0 ? 1.0 / gamma : std::numeric_limits<double>::infinity());
  f.stderrs.push_back(gamma > 0 ? f.stderrs[2] / (gamma * gamma) : std::numeric_limits<double>::infinity());
  const double a = f.values[0], w = f.values[1], c = f.values[3];
  f.predict = [a, w, gamma, c](double t) { return damped_rabi(t, a, w, gamma, c); };
  return f;
}

// Least-squares scale s with y ≈ s · template(x).
inline FitResult fit_scale(const ScanData& data, const std::function<double(double)>& shape) {
  detail::require_points(data, 1, "fit_scale");
  double num = 0.0, den = 0.0, chi = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data.yerr.empty() ? 1.0 : 1.0 / (data.yerr[i] * data.yerr[i]);
    const double f = shape(data.x[i]);
    num += w * f * data.y[i];
    den += w * f * f;
  }
  if (!(den > 0)) throw NumericalError("fit_scale: template vanishes on the scan");
  const double s = num / den;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data.yerr.empty() ? 1.0 : 1.0 / (data.yerr[i] * data.yerr[i]);
    const double r = data.y[i] - s * shape(data.x[i]);
    chi += w * r * r;
  }
  FitResult f;
  f.model = "scale";
  f.names = {"scale"};
  f.values = {s};
  f.chi2_reduced = chi / static_cast<double>(std::max<std::size_t>(1, data.size() - 1));
  const double var = (data.yerr.empty() ? f.chi2_reduced : 1.0) / den;
  f.stderrs = {std::sqrt(var)};
  f.covariance = Eigen::MatrixXd::Constant(1, 1, var);
  f.converged = true;
  f.predict = [s, shape](double x) { return s * shape(x); };
  return f;
}

// -- linear reductions ---------------------------------------------------------

namespace detail {

// Weighted straight line y = a + b x; parameters (offset, slope).
inline FitResult line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& w, bool scale_by_residuals) {
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0)) throw NumericalError("line fit: degenerate abscissae");
  const double b = (s * sxy - sx * sy) / det;
  const double a = (sxx * sy - sx * sxy) / det;
  double chi = 0;
  for (std::size_t i = 0; i < x.size(); ++i) chi += w[i] * (y[i] - a - b * x[i]) * (y[i] - a - b * x[i]);
  FitResult f;
  f.model = "line";
  f.names = {"offset", "slope"};
  f.values = {a, b};
  f.chi2_reduced = x.size() > 2 ? chi / static_cast<double>(x.size() - 2) : 0.0;
  const double scale = scale_by_residuals ? f.chi2_reduced : 1.0;
  f.covariance.resize(2, 2);
  f.covariance << sxx / det * scale, -sx / det * scale, -sx / det * scale, s / det * scale;
  f.stderrs = {std::sqrt(f.covariance(0, 0)), std::sqrt(f.covariance(1, 1))};
  f.converged = true;
  f.predict = [a, b](double t) { return a + b * t; };
  return f;
}

}  // namespace detail

// Slope dP/dθ of a weighted line through the points with θ <= window.
inline FitResult small_angle_slope(const ScanData& data, double window = kPi / 2) {
  data.validate();
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.x[i] > window * (1.0 + 1e-12)) continue;
    x.push_back(data.x[i]);
    y.push_back(data.y[i]);
    w.push_back(data.yerr.empty() ? 1.0 : 1.0 / (data.yerr[i] * data.yerr[i]));
  }
  if (x.size() < 3) throw ValidationError("small_angle_slope: fewer than 3 points in the window");
  auto f = detail::line_fit(x, y, w, data.yerr.empty());
  f.model = "small_angle_slope";
  return f;
}

// Exponent p of T2 = c N̄^p from a log-log line; parameters (log_prefactor,
// exponent).
inline FitResult power_law_exponent(const std::vector<double>& n, const std::vector<double>& t2,
                                    const std::vector<double>& t2_err = {}) {
  if (n.size() != t2.size() || (!t2_err.empty() && t2_err.size() != n.size())) {
    throw ValidationError("power_law_exponent: length mismatch");
  }
  if (n.size() < 3) throw ValidationError("power_law_exponent: need at least 3 points");
  std::vector<double> lx, ly, w;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0 && t2[i] > 0)) throw ValidationError("power_law_exponent: values must be positive");
    lx.push_back(std::log(n[i]));
    ly.push_back(std::log(t2[i]));
    const double rel = t2_err.empty() ? 1.0 : t2_err[i] / t2[i];
    if (!(rel > 0)) throw ValidationError("power_law_exponent: errors must be positive");
    w.push_back(1.0 / (rel * rel));
  }
  auto f = detail::line_fit(lx, ly, w, t2_err.empty());
  f.model = "power_law";
  f.names = {"log_prefactor", "exponent"};
  return f;
}

// F = Ω² [(n/n0)^12 / (R/R0)^6]^{-2}
inline double scaling_parameter_F(double omega, double n, double r, double n_ref, double r_ref) {
  if (!(omega > 0 && n > 0 && r > 0 && n_ref > 0 && r_ref > 0)) {
    throw ValidationError("scaling_parameter_F: inputs must be positive");
  }
  const double q = std::pow(n / n_ref, 12) / std::pow(r / r_ref, 6);
  return omega * omega / (q * q);
}

// -- leakage --------------------------------------------------------------------

enum class AtomStatistics { fixed, poisson };

struct LeakageCorrected {
  double probability = 0.0;
  double stderr_ = 0.0;
  double background = 0.0;
  bool clipped = false;
};

// Probability that an ensemble left entirely in g0 still shows >= 1 atom.
inline double leakage_background(const MeasurementModel& model, double atoms,
                                 AtomStatistics stats = AtomStatistics::fixed) {
  if (!(atoms >= 0)) throw ValidationError("leakage_background: negative atom number");
  const double q = model.g0_retention();
  return stats == AtomStatistics::fixed ? 1.0 - std::pow(1.0 - q, atoms) : 1.0 - std::exp(-atoms * q);
}

// Inverts P_meas = P + (1 - P) b for the detection probability P.
inline LeakageCorrected leakage_correct(double measured, double measured_err, const MeasurementModel& model,
                                        double atoms, AtomStatistics stats = AtomStatistics::fixed) {
  model.validate();
  LeakageCorrected out;
  out.background = leakage_background(model, atoms, stats);
  if (out.background >= 1.0) throw NumericalError("leakage_correct: background saturates detection");
  out.probability = (measured - out.background) / (1.0 - out.background);
  out.stderr_ = measured_err / (1.0 - out.background);
  if (out.probability < 0.0) {
    out.probability = 0.0;
    out.clipped = true;
  }
  return out;
}

inline LeakageCorrected leakage_correct(std::size_t detected, std::size_t trials, const MeasurementModel& model,
                                        double atoms, AtomStatistics stats = AtomStatistics::fixed) {
  if (trials == 0) throw ValidationError("leakage_correct: zero trials");
  const double p = static_cast<double>(detected) / static_cast<double>(trials);
  return leakage_correct(p, std::sqrt(p * (1 - p) / static_cast<double>(trials)), model, atoms, stats);
}

}  // namespace ensq
