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

// State propagation through pulse programs with stochastic (trajectory-level)
// noise, and Monte Carlo averaging over ensemble realizations.
//
// Noise channels act during gaps on atoms in g1 (phase relative to g0):
//   laser     global Gaussian phase, variance 2π Δν_FWHM t (random walk)
//   collision per-atom static frequency, Gaussian with standard deviation
//             collision_rate_per_pair × partners; Gaussian decay in t
//   trap      per-atom static frequency ∝ thermal energy (Gamma(3) in a
//             harmonic trap); generates [1 + c t²]^{-3/2} decay
//   doppler   hyperfine-wavevector Doppler phase k_hf v t
// Rydberg atoms evolve freely with their Doppler and pair shifts. An optional
// Rydberg lifetime is handled with first-order quantum jumps to loss.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <variant>

#include "ensq/basis.hpp"
#include "ensq/ensemble.hpp"
#include "ensq/hamiltonian.hpp"
#include "ensq/measurement.hpp"
#include "ensq/program.hpp"

namespace ensq {

// -- propagation -----------------------------------------------------------

namespace detail {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace detail

// Connected components of the coupling graph of `h`. When `support` is given,
// components on which the vector vanishes identically are dropped.
inline std::vector<std::vector<std::size_t>> coupled_components(const SparseHamiltonian& h,
                                                                const Eigen::VectorXcd* support = nullptr) {
  const std::size_t n = h.basis->dimension();
  detail::UnionFind uf(n);
  for (const auto& c : h.couplings) uf.unite(c.row, c.col);
  std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (slot[r] == std::numeric_limits<std::size_t>::max()) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  if (support) {
    std::erase_if(groups, [&](const std::vector<std::size_t>& g) {
      return std::all_of(g.begin(), g.end(),
                         [&](std::size_t i) { return (*support)[static_cast<Eigen::Index>(i)] == cplx(0.0); });
    });
  }
  return groups;
}

// Precomputed eigendecomposition of H restricted to the components that carry
// the initial state; at(t) returns exp(-iHt)|ψ0>.
class Evolution {
 public:
  Evolution(const SparseHamiltonian& h, const StateVector& initial) : initial_(initial) {
    if (h.basis->dimension() != initial.basis().dimension()) {
      throw ValidationError("propagate: Hamiltonian and state bases differ");
    }
    const auto groups = coupled_components(h, &initial.amplitudes());
    std::vector<int> local(h.basis->dimension(), -1);
    std::vector<std::vector<const Coupling*>> by_group(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t j = 0; j < groups[g].size(); ++j) local[groups[g][j]] = static_cast<int>(g);
    for (const auto& c : h.couplings) {
      if (local[c.row] >= 0) by_group[local[c.row]].push_back(&c);
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t j = 0; j < groups[g].size(); ++j) local[groups[g][j]] = static_cast<int>(j);

    blocks_.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      Block b;
      b.indices = groups[g];
      const auto m = static_cast<Eigen::Index>(b.indices.size());
      Eigen::VectorXcd c0(m);
      for (Eigen::Index j = 0; j < m; ++j) c0[j] = initial[b.indices[j]];
      if (m == 1) {
        b.values = Eigen::VectorXd::Constant(1, h.diagonal[static_cast<Eigen::Index>(b.indices[0])]);
        b.vectors = Eigen::MatrixXcd::Identity(1, 1);
        b.coeffs = c0;
      } else {
        Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(m, m);
        for (Eigen::Index j = 0; j < m; ++j) block(j, j) = h.diagonal[static_cast<Eigen::Index>(b.indices[j])];
        for (const Coupling* c : by_group[g]) {
          const int r = local[c->row];
          const int k = local[c->col];
          block(r, k) += c->value;
          block(k, r) += std::conj(c->value);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
        if (solver.info() != Eigen::Success) throw NumericalError("propagate: eigensolver failed");
        b.values = solver.eigenvalues();
        b.vectors = solver.eigenvectors();
        b.coeffs = b.vectors.adjoint() * c0;
      }
      blocks_.push_back(std::move(b));
    }
  }

  StateVector at(double t) const {
    StateVector out(initial_.basis_ptr());
    for (const auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.indices.size());
      Eigen::VectorXcd phased(m);
      for (Eigen::Index j = 0; j < m; ++j) phased[j] = b.coeffs[j] * std::polar(1.0, -b.values[j] * t);
      const Eigen::VectorXcd c = b.vectors * phased;
      for (Eigen::Index j = 0; j < m; ++j) out[b.indices[j]] = c[j];
    }
    return out;
  }

 private:
  struct Block {
    std::vector<std::size_t> indices;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    Eigen::VectorXcd coeffs;
  };
  StateVector initial_;
  std::vector<Block> blocks_;
};

inline StateVector propagate(const StateVector& state, const SparseHamiltonian& h, double t) {
  if (t < 0) throw ValidationError("propagate: negative time");
  if (t == 0) return state;
  return Evolution(h, state).at(t);
}

// exp(-iHt)|ψ> through a full dense eigendecomposition.
inline StateVector propagate(const StateVector& state, const HermitianOperator& h, double t) {
  if (t < 0) throw ValidationError("propagate: negative time");
  if (static_cast<std::size_t>(h.dimension()) != state.basis().dimension()) {
    throw ValidationError("propagate: Hamiltonian and state bases differ");
  }
  if (t == 0) return state;
  const auto es = eigensystem(h);
  Eigen::VectorXcd c = es.vectors.adjoint() * state.amplitudes();
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] *= std::polar(1.0, -es.values[j] * t);
  return StateVector(state.basis_ptr(), es.vectors * c);
}

// -- noise -----------------------------------------------------------------

enum class CollisionDensity {
  mean_field,  // partners = N̄ of the loading distribution
  realized,    // partners = N - 1 of the realization
};

struct NoiseModel {
  double laser_linewidth_hz = 100.0;    // FWHM of the reference beatnote
  double collision_rate_per_pair = 0.0;  // rad/s of frequency spread per partner
  CollisionDensity collision_density = CollisionDensity::mean_field;
  bool doppler = true;
  double trap_dephasing_t2 = 0.0;       // s; 0 disables the trap channel
  double rydberg_lifetime = 0.0;        // s; 0 disables decay
  double anti_blockade_sigma = 0.0;     // rad/s; extra pair shift spread for R < r_char
  double anti_blockade_r_char_um = 5.0;

  static NoiseModel none() {
    NoiseModel n;
    n.laser_linewidth_hz = 0.0;
    n.doppler = false;
    return n;
  }

  void validate() const {
    for (double v : {laser_linewidth_hz, collision_rate_per_pair, trap_dephasing_t2, rydberg_lifetime,
                     anti_blockade_sigma}) {
      if (!(v >= 0.0)) throw ValidationError("noise: parameters must be non-negative");
    }
  }
};

// Per-partner collision rate that puts the Ramsey envelope at 1/e at t2 for
// the given number of partners. With a laser linewidth Δν the combined
// envelope exp(-π Δν t - (σ t)²/2) is matched; needs π Δν t2 < 1.
inline double collision_rate_for_t2(double t2, double partners, double laser_linewidth_hz = 0.0) {
  if (!(t2 > 0 && partners > 0)) throw ValidationError("collision_rate_for_t2: positive inputs required");
  const double laser = kPi * laser_linewidth_hz * t2;
  if (!(laser < 1.0)) throw ValidationError("collision_rate_for_t2: laser dephasing alone exceeds 1/e at t2");
  return std::sqrt(2.0 * (1.0 - laser)) / (t2 * partners);
}

inline double trap_channel_rate(double t2) { return std::sqrt(std::exp(2.0 / 3.0) - 1.0) / t2; }

// Static per-trajectory noise realizations.
struct TrajectoryNoise {
  std::vector<double> gap_frequency;  // rad/s on g1 during gaps
  Eigen::MatrixXd pair_shifts;        // register shifts plus anti-blockade spread
  bool overrides_pairs = false;

  static TrajectoryNoise draw(const NoiseModel& noise, const Register& reg, Rng& rng) {
    TrajectoryNoise tn;
    const int n = reg.size();
    tn.gap_frequency.assign(static_cast<std::size_t>(n), 0.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t s = 0; s < reg.sites.size(); ++s) {
      const auto r = reg.sites[s];
      const double partners = noise.collision_density == CollisionDensity::mean_field
                                  ? reg.mean_atoms[s]
                                  : std::max(0, r.count - 1);
      const double sigma = noise.collision_rate_per_pair * partners;
      for (int k = r.first; k < r.first + r.count; ++k) {
        const double g = gauss(rng);
        tn.gap_frequency[k] += sigma * g;
        if (noise.trap_dephasing_t2 > 0) {
          tn.gap_frequency[k] += trap_channel_rate(noise.trap_dephasing_t2) * reg.atoms.thermal_energy[k];
        }
        if (noise.doppler) tn.gap_frequency[k] += reg.atoms.hyperfine_doppler[k];
      }
    }
    if (noise.anti_blockade_sigma > 0 && n > 1) {
      tn.pair_shifts = reg.atoms.pair_shifts;
      tn.overrides_pairs = true;
      for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          const double r = (reg.atoms.positions_um[j] - reg.atoms.positions_um[k]).norm();
          if (r < noise.anti_blockade_r_char_um) {
            const double v = tn.pair_shifts(j, k) + noise.anti_blockade_sigma * gauss(rng);
            tn.pair_shifts(j, k) = tn.pair_shifts(k, j) = v;
          }
        }
      }
    }
    return tn;
  }
};

namespace detail {

inline void rydberg_decay(StateVector& state, double duration, double lifetime,
                          std::vector<bool>& lost, Rng& rng) {
  if (lifetime <= 0 || duration <= 0) return;
  const auto& basis = state.basis();
  const int n = basis.atoms();
  const double gamma = 1.0 / lifetime;
  std::vector<double> pr(static_cast<std::size_t>(n), 0.0);
  double mean_r = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double w = std::norm(state[i]);
    if (w == 0.0) continue;
    for (int k = 0; k < n; ++k) {
      if (!lost[k] && basis.level(i, k) == AtomLevel::ryd) {
        pr[k] += w;
        mean_r += w;
      }
    }
  }
  const double jump = gamma * duration * mean_r;
  if (uniform01(rng) < jump) {
    double u = uniform01(rng) * mean_r;
    int atom = n - 1;
    for (int k = 0; k < n; ++k) {
      u -= pr[k];
      if (u < 0) {
        atom = k;
        break;
      }
    }
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      if (basis.level(i, atom) != AtomLevel::ryd) state[i] = 0.0;
    }
    lost[atom] = true;
  } else {
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      int nr = 0;
      for (int k = 0; k < n; ++k) nr += (!lost[k] && basis.level(i, k) == AtomLevel::ryd) ? 1 : 0;
      if (nr) state[i] *= std::exp(-0.5 * gamma * duration * nr);
    }
  }
  state.normalize();
}

}  // namespace detail

// Free evolution for a gap of length t (no drive). g1 atoms pick up the noise
// phases listed at the top of this file; Rydberg atoms evolve with their
// Doppler and pair shifts.
inline void apply_gap(StateVector& state, const Gap& gap, const NoiseModel& noise, const Register& reg,
                      const TrajectoryNoise& tn, std::vector<bool>& lost, Rng& rng) {
  const double t = gap.duration.seconds();
  if (t < 0) throw ValidationError("apply_gap: negative duration");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double laser = noise.laser_linewidth_hz > 0
                           ? std::sqrt(kTwoPi * noise.laser_linewidth_hz * t) * gauss(rng)
                           : 0.0;
  if (t == 0) return;
  const auto& basis = state.basis();
  const int n = basis.atoms();
  std::vector<double> g1_phase(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g1_phase[k] = (tn.gap_frequency[k] + gap.offset.rad_per_s()) * t + laser;
  const auto& shifts = tn.overrides_pairs ? tn.pair_shifts : reg.atoms.pair_shifts;
  std::vector<double> ryd_detuning;
  if (noise.doppler) ryd_detuning = reg.atoms.detunings;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    if (state[i] == cplx(0.0)) continue;
    double phase = 0.0;
    for (int k = 0; k < n; ++k) {
      if (basis.level(i, k) == AtomLevel::g1) phase += g1_phase[k];
    }
    phase -= rydberg_energy(basis, i, shifts, ryd_detuning, &lost) * t;
    state[i] *= std::polar(1.0, phase);
  }
  detail::rydberg_decay(state, t, noise.rydberg_lifetime, lost, rng);
}

// -- programs --------------------------------------------------------------

enum class AreaReference {
  realized,  // collective ᾱ_N / rms single-atom coupling of the realization
  nominal,   // √N̄ Ω0 / Ω1 of the loading configuration
};

struct RunOptions {
  int e_max = 2;
  AreaReference area_reference = AreaReference::realized;
  MeasurementModel measurement;
  std::size_t dimension_cap = kDefaultDimensionCap;
  // Per-site probability that the ground-Rydberg excitation works at all in
  // a trajectory; a failed site ignores its zero_ryd pulses.
  double preparation_fidelity = 1.0;
};

struct ResolvedPulse {
  double area = 0.0;      // rad
  double duration = 0.0;  // s
  double frequency = 0.0;  // reference frequency used to convert
};

struct TrajectoryRecord {
  std::vector<int> retained;
  std::vector<bool> detected;
  bool postselected = false;
  bool measured = false;
  std::vector<Populations> populations;        // per site, before measurement
  std::vector<double> detection_probability;  // per site, before measurement
  double norm = 1.0;
  std::vector<ResolvedPulse> pulses;
};

inline BasisPtr cached_basis(int n_atoms, BasisMode mode, int e_max,
                             std::size_t cap = kDefaultDimensionCap) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, BasisPtr> cache;
  const auto key = std::make_tuple(n_atoms, static_cast<int>(mode), e_max);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto b = build_basis(n_atoms, mode, e_max, cap);
  cache.emplace(key, b);
  return b;
}

inline int site_index(Site site, const Register& reg) {
  switch (site) {
    case Site::single:
      if (reg.sites.size() != 1) throw ValidationError("run_program: 'single' site used with two sites bound");
      return 0;
    case Site::control:
      if (reg.sites.size() < 2) throw ValidationError("run_program: unbound site (control)");
      return 0;
    case Site::target:
      if (reg.sites.size() < 2) throw ValidationError("run_program: unbound site (target)");
      return 1;
  }
  return 0;
}

inline double reference_frequency(const Pulse& p, const Register& reg, int site, AreaReference ref) {
  const auto r = reg.sites[site];
  if (r.count == 0) return 0.0;
  if (ref == AreaReference::nominal) {
    return p.transition == Transition::zero_ryd ? reg.nominal_collective[site] : reg.nominal_single[site];
  }
  if (p.transition == Transition::zero_ryd) {
    return collective_coupling(std::span(reg.atoms.alphas).subspan(r.first, r.count));
  }
  return collective_coupling(std::span(reg.atoms.alphas_one).subspan(r.first, r.count)) /
         std::sqrt(static_cast<double>(r.count));
}

inline CollectiveWeights site_weights(const Register& reg, int site) {
  const auto r = reg.sites[site];
  std::vector<double> w(reg.atoms.alphas.begin() + r.first, reg.atoms.alphas.begin() + r.first + r.count);
  auto cw = CollectiveWeights::from(std::move(w));
  if (r.count > 0 && cw.alpha_bar == 0.0) cw = CollectiveWeights::uniform(r.count);
  return cw;
}

inline StateVector ground_state(const Register& reg, const RunOptions& options) {
  const int n = reg.size();
  auto basis = cached_basis(n, BasisMode::three_level, std::min(options.e_max, n), options.dimension_cap);
  return collective_state(basis, CollectiveKind::zero_bar, {});
}

namespace detail {

inline void record_site_state(TrajectoryRecord& rec, const StateVector& state, const Register& reg,
                              const RunOptions& options, const std::vector<bool>& lost) {
  rec.populations.clear();
  rec.detection_probability.clear();
  for (std::size_t s = 0; s < reg.sites.size(); ++s) {
    const auto r = reg.sites[s];
    if (r.count == 0) {
      rec.populations.push_back({});
      rec.detection_probability.push_back(0.0);
      continue;
    }
    rec.populations.push_back(populations(state, r.first, r.count, site_weights(reg, static_cast<int>(s))));
    rec.detection_probability.push_back(detection_probability(state, options.measurement, r, &lost));
  }
  rec.norm = state.norm();
}

}  // namespace detail

// Runs the program on the register starting from |0̄...0̄> (or `initial`).
// Populations and expected detection probabilities are recorded just before
// the first measurement (or at the end when there is none).
inline TrajectoryRecord run_program(const PulseProgram& program, const Register& reg, const NoiseModel& noise,
                                    const RunOptions& options, Rng& rng, const StateVector* initial = nullptr,
                                    StateVector* final_state = nullptr) {
  program.validate();
  noise.validate();
  if (program.required_sites() > static_cast<int>(reg.sites.size())) {
    throw ValidationError("run_program: unbound site");
  }
  TrajectoryRecord rec;
  if (reg.size() == 0) {
    rec.retained.assign(reg.sites.size(), 0);
    rec.detected.assign(reg.sites.size(), false);
    rec.populations.assign(reg.sites.size(), {});
    rec.populations.front().p0bar = 1.0;
    rec.detection_probability.assign(reg.sites.size(), 0.0);
    rec.measured = std::any_of(program.steps.begin(), program.steps.end(),
                               [](const Step& s) { return std::holds_alternative<Measure>(s); });
    return rec;
  }
  StateVector state = initial ? *initial : ground_state(reg, options);
  if (state.basis().atoms() != reg.size()) throw ValidationError("run_program: initial state does not match register");
  std::vector<bool> lost(static_cast<std::size_t>(reg.size()), false);
  const TrajectoryNoise tn = TrajectoryNoise::draw(noise, reg, rng);
  if (!(options.preparation_fidelity >= 0.0 && options.preparation_fidelity <= 1.0)) {
    throw ValidationError("run_program: preparation_fidelity must lie in [0,1]");
  }
  // One independent draw per site: each ensemble's excitation works or not.
  std::vector<bool> prepared(reg.sites.size(), true);
  if (options.preparation_fidelity < 1.0) {
    for (std::size_t s = 0; s < prepared.size(); ++s) prepared[s] = uniform01(rng) < options.preparation_fidelity;
  }
  bool recorded = false;

  for (const auto& step : program.steps) {
    if (const auto* p = std::get_if<Pulse>(&step)) {
      const int site = site_index(p->site, reg);
      const auto range = reg.sites[site];
      ResolvedPulse rp;
      if (p->area) {
        rp.area = p->area->radians();
        rp.frequency = reference_frequency(*p, reg, site, options.area_reference);
        rp.duration = rp.frequency > 0 ? rp.area / rp.frequency : 0.0;
      } else {
        rp.duration = p->duration->seconds();
        rp.frequency = reference_frequency(*p, reg, site, options.area_reference);
        rp.area = rp.frequency * rp.duration;
      }
      rec.pulses.push_back(rp);
      if (range.count == 0 || rp.duration == 0.0) continue;
      if (!prepared[site] && p->transition == Transition::zero_ryd) continue;
      DriveSpec spec;
      spec.transition = p->transition;
      spec.phase = p->phase.radians();
      spec.detuning = p->detuning.rad_per_s();
      spec.driven = range;
      spec.doppler = noise.doppler;
      spec.lost = &lost;
      if (tn.overrides_pairs) spec.pair_shifts = &tn.pair_shifts;
      const auto h = drive_terms(state.basis_ptr(), reg.atoms, spec);
      state = propagate(state, h, rp.duration);
      detail::rydberg_decay(state, rp.duration, noise.rydberg_lifetime, lost, rng);
    } else if (const auto* g = std::get_if<Gap>(&step)) {
      apply_gap(state, *g, noise, reg, tn, lost, rng);
    } else {
      if (!recorded) {
        detail::record_site_state(rec, state, reg, options, lost);
        recorded = true;
      }
      const auto out = blowaway_measure(state, options.measurement, reg.sites, rng, &lost);
      rec.retained = out.retained;
      rec.detected = out.detected;
      rec.postselected = out.postselected;
      rec.measured = true;
      StateVector collapsed(state.basis_ptr());
      collapsed[out.basis_index] = 1.0;
      state = std::move(collapsed);
    }
  }
  if (!recorded) detail::record_site_state(rec, state, reg, options, lost);
  if (final_state) *final_state = state;
  return rec;
}

// -- Monte Carlo -----------------------------------------------------------

struct Estimate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

struct MonteCarloResult {
  std::vector<std::string> names;
  std::vector<Estimate> values;
  std::size_t trials = 0;

  const Estimate& operator[](std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    throw ValidationError("monte_carlo: unknown observable " + std::string(name));
  }
};

namespace detail {

// Pairwise summation keeps the reduction independent of scheduling.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

}  // namespace detail

inline Estimate estimate(std::span<const double> samples) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (double x : samples)
    if (!std::isnan(x)) v.push_back(x);
  Estimate e;
  e.count = v.size();
  if (v.empty()) return e;
  e.mean = detail::pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) {
    e.stderr_ = 0.0;
    return e;
  }
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - e.mean) * (v[i] - e.mean);
  const double var = detail::pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  e.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
  return e;
}

// Runs fn(trial) -> observables for every trial, in parallel when threads >
// 1. NaN entries are excluded from that observable's estimate. Results are
// independent of the thread count when fn derives its randomness from the
// trial index.
template <class TrialFn>
MonteCarloResult monte_carlo_trials(std::vector<std::string> names, std::size_t trials, int threads,
                                    TrialFn&& fn) {
  if (trials == 0) throw ValidationError("monte_carlo: zero trials requested");
  const std::size_t k = names.size();
  std::vector<double> table(trials * k, std::numeric_limits<double>::quiet_NaN());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        const std::vector<double> obs = fn(t);
        std::copy_n(obs.begin(), std::min(obs.size(), k), table.begin() + static_cast<std::ptrdiff_t>(t * k));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  MonteCarloResult res;
  res.names = std::move(names);
  res.trials = trials;
  std::vector<double> column(trials);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = table[t * k + j];
    res.values.push_back(estimate(column));
  }
  return res;
}

struct MonteCarloConfig {
  std::vector<TrapParams> sites;  // one or two loading configurations
  BeamModel beam;
  RydbergModel rydberg;
  NoiseModel noise;
  RunOptions options;
  bool reject_empty = true;  // redraw realizations with an empty site
  double cross_site_shift = 0.0;  // > 0: replaces every inter-site pair shift
  std::uint64_t seed = 1;
  int threads = 1;
};

inline void set_cross_site_shift(Register& reg, double shift) {
  for (std::size_t a = 0; a < reg.sites.size(); ++a)
    for (std::size_t b = a + 1; b < reg.sites.size(); ++b)
      for (int j = reg.sites[a].first; j < reg.sites[a].first + reg.sites[a].count; ++j)
        for (int k = reg.sites[b].first; k < reg.sites[b].first + reg.sites[b].count; ++k)
          reg.atoms.pair_shifts(j, k) = reg.atoms.pair_shifts(k, j) = shift;
}

inline Register draw_register(const MonteCarloConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<EnsembleSample> samples;
    bool empty = false;
    for (const auto& trap : cfg.sites) {
      samples.push_back(sample_ensemble(trap, cfg.beam, cfg.rydberg, rng));
      empty = empty || samples.back().empty();
    }
    if (empty && cfg.reject_empty) continue;
    // The far Poisson tail of two summed sites can exceed the basis guard;
    // such draws are redrawn like empty ones.
    int total = 0;
    for (const auto& s : samples) total += s.size();
    if (total > kMaxAtoms) continue;
    if (samples.size() == 1) return make_register(samples.front());
    Register reg = make_register(samples, cfg.rydberg);
    if (cfg.cross_site_shift > 0) set_cross_site_shift(reg, cfg.cross_site_shift);
    return reg;
  }
  throw NumericalError("monte_carlo: could not draw a non-empty realization");
}

inline std::vector<std::string> standard_observables(std::size_t n_sites) {
  std::vector<std::string> names;
  const std::vector<std::string> labels = n_sites == 1 ? std::vector<std::string>{"s"}
                                                       : std::vector<std::string>{"c", "t"};
  for (const auto& l : labels) {
    for (const char* o : {"p0bar", "p1bar", "prbar", "pperp", "detect", "detect_expected", "retained", "atoms"})
      names.push_back(l + "." + o);
  }
  if (n_sites == 2) names.push_back("t.detect_post");
  names.push_back("norm");
  return names;
}

inline std::vector<double> standard_row(const TrajectoryRecord& rec, const Register& reg) {
  std::vector<double> row;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t s = 0; s < reg.sites.size(); ++s) {
    const auto& p = rec.populations[s];
    row.insert(row.end(), {p.p0bar, p.p1bar, p.prbar, p.pperp});
    row.push_back(rec.measured ? (rec.detected[s] ? 1.0 : 0.0) : nan);
    row.push_back(rec.detection_probability[s]);
    row.push_back(rec.measured ? rec.retained[s] : nan);
    row.push_back(reg.sites[s].count);
  }
  if (reg.sites.size() == 2) {
    row.push_back(rec.measured && rec.postselected ? (rec.detected[1] ? 1.0 : 0.0) : nan);
  }
  row.push_back(rec.norm);
  return row;
}

using ProgramFactory = std::function<PulseProgram(const Register&)>;

// Fresh realization and noise draws per trial; trial t uses
// trial_rng(seed, t) for sampling, noise and measurement.
inline MonteCarloResult monte_carlo(const ProgramFactory& factory, const MonteCarloConfig& cfg,
                                    std::size_t trials) {
  if (cfg.sites.empty() || cfg.sites.size() > 2) throw ValidationError("monte_carlo: one or two sites required");
  return monte_carlo_trials(standard_observables(cfg.sites.size()), trials, cfg.threads, [&](std::size_t t) {
    Rng rng = trial_rng(cfg.seed, t);
    const Register reg = draw_register(cfg, rng);
    const auto rec = run_program(factory(reg), reg, cfg.noise, cfg.options, rng);
    return standard_row(rec, reg);
  });
}

}  // namespace ensq
