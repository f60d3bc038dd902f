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

// Random realizations of trapped ensembles: atom positions, thermal
// velocities, per-atom light couplings and pairwise Rydberg shifts.
//
// Units: positions in µm, velocities in m/s, couplings, detunings and pair
// shifts as angular frequencies in rad/s.

#include <Eigen/Dense>

#include <iostream>
#include <span>
#include <vector>

#include "ensq/common.hpp"

namespace ensq {

using Vec3 = Eigen::Vector3d;

enum class Loading { poisson, fixed };

struct TrapParams {
  double mean_atoms = 7.6;
  double sigma_perp_um = 0.7;
  double sigma_z_um = 7.0;
  double temperature_uK = 150.0;
  Vec3 center_um = Vec3::Zero();
  Loading loading = Loading::poisson;
  int fixed_atoms = 0;  // used when loading == fixed

  void validate() const {
    if (!(mean_atoms > 0 && sigma_perp_um > 0 && sigma_z_um > 0 && temperature_uK > 0)) {
      throw ValidationError("trap: mean_atoms, sigmas and temperature must be positive");
    }
    if (loading == Loading::fixed && fixed_atoms < 0) {
      throw ValidationError("trap: fixed_atoms must be non-negative");
    }
  }
};

enum class Angular { isotropic, z_enhanced };

struct RydbergModel {
  int n_principal = 97;
  int n_ref = 97;
  double r_ref_um = 8.7;
  double v_ref = kTwoPi * 500e6;  // shift at (n_ref, r_ref), free parameter
  double power_n = 12.0;
  double power_r = 6.0;
  Angular angular = Angular::z_enhanced;
  double anisotropy = 2.0;  // a in f(θ) = (1 + a cos²θ) / (1 + a/3)
  double r_min_um = 1.0;    // shorter separations are clamped
  double r_char_um = 5.0;   // short-range scale for the anti-blockade channel

  void validate() const {
    if (!(r_ref_um > 0 && v_ref > 0)) throw ValidationError("rydberg: r_ref and v_ref must be positive");
    if (!(r_min_um > 0)) throw ValidationError("rydberg: r_min must be positive");
    if (angular == Angular::z_enhanced && anisotropy <= -1.0) {
      throw ValidationError("rydberg: anisotropy must exceed -1");
    }
  }
};

enum class BeamProfile { uniform, gaussian };

// Effective two-photon wavevector magnitude for counter-propagating 780 and
// 480 nm beams, and the wavevector of the hyperfine clock splitting.
inline constexpr double kDefaultRydbergWavevector = kTwoPi * (1.0 / 480e-9 - 1.0 / 780e-9);
inline constexpr double kDefaultHyperfineWavevector =
    kTwoPi * constants::kRb87ClockHz / constants::kSpeedOfLight;

struct BeamModel {
  BeamProfile profile = BeamProfile::gaussian;
  double w_perp_um = 10.0;
  double w_z_um = 100.0;
  // Peak single-atom Rabi frequencies of the g0<->ryd and g1<->ryd couplings.
  // Defaults reproduce π times of 0.24 µs (collective, N̄ = 7.6) and 0.68 µs.
  double omega_zero = kPi / (0.24e-6 * 2.756809750418044);
  double omega_one = kPi / 0.68e-6;
  Vec3 k_axis = Vec3::UnitX();
  double k_rydberg = kDefaultRydbergWavevector;     // 1/m
  double k_hyperfine = kDefaultHyperfineWavevector;  // 1/m

  void validate() const {
    if (profile == BeamProfile::gaussian && !(w_perp_um > 0 && w_z_um > 0)) {
      throw ValidationError("beam: waists must be positive");
    }
    if (!(omega_zero >= 0 && omega_one >= 0)) throw ValidationError("beam: Rabi frequencies must be non-negative");
    if (k_axis.norm() == 0.0) throw ValidationError("beam: k_axis must be non-zero");
  }

  double coupling_factor(const Vec3& offset_um) const {
    if (profile == BeamProfile::uniform) return 1.0;
    const double rp2 = offset_um.x() * offset_um.x() + offset_um.y() * offset_um.y();
    return std::exp(-rp2 / (w_perp_um * w_perp_um) -
                    offset_um.z() * offset_um.z() / (w_z_um * w_z_um));
  }
};

struct EnsembleSample {
  std::vector<Vec3> positions_um;
  std::vector<Vec3> velocities;
  std::vector<double> alphas;      // g0<->ryd couplings
  std::vector<double> alphas_one;  // g1<->ryd couplings
  Eigen::MatrixXd pair_shifts;     // V_jk, symmetric, zero diagonal
  std::vector<double> detunings;   // Doppler shifts of the Rydberg transition
  std::vector<double> hyperfine_doppler;  // Doppler shifts of the g0<->g1 phase reference
  std::vector<double> thermal_energy;     // E/kT in the harmonic trap
  int clamped_pairs = 0;

  // Calibration references for pulses whose area is given against nominal
  // rather than realized couplings.
  double mean_atoms = 0.0;
  double nominal_collective = 0.0;  // √N̄ Ω0
  double nominal_single = 0.0;      // Ω1

  int size() const noexcept { return static_cast<int>(positions_um.size()); }
  bool empty() const noexcept { return positions_um.empty(); }
};

struct PairShift {
  double value = 0.0;
  bool clamped = false;
};

inline double angular_factor(const Vec3& d, const RydbergModel& ryd) {
  if (ryd.angular == Angular::isotropic) return 1.0;
  const double r = d.norm();
  const double c2 = r > 0 ? (d.z() * d.z()) / (r * r) : 1.0;
  return (1.0 + ryd.anisotropy * c2) / (1.0 + ryd.anisotropy / 3.0);
}

// V = V_ref (n/n_ref)^pn (R/R_ref)^-pr f(θ). Separations below r_min are
// clamped to r_min (the short-range molecular regime is not modeled).
inline PairShift pair_shift(const Vec3& rj_um, const Vec3& rk_um, const RydbergModel& ryd) {
  const Vec3 d = rk_um - rj_um;
  double r = d.norm();
  PairShift out;
  if (r < ryd.r_min_um) {
    r = ryd.r_min_um;
    out.clamped = true;
  }
  const double n_factor = std::pow(static_cast<double>(ryd.n_principal) / ryd.n_ref, ryd.power_n);
  const double r_factor = std::pow(r / ryd.r_ref_um, ryd.power_r);
  out.value = ryd.v_ref * n_factor / r_factor * angular_factor(d, ryd);
  return out;
}

inline void fill_pair_shifts(EnsembleSample& s, const RydbergModel& ryd) {
  const int n = s.size();
  s.pair_shifts = Eigen::MatrixXd::Zero(n, n);
  s.clamped_pairs = 0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const auto v = pair_shift(s.positions_um[j], s.positions_um[k], ryd);
      s.pair_shifts(j, k) = s.pair_shifts(k, j) = v.value;
      s.clamped_pairs += v.clamped ? 1 : 0;
    }
  }
}

inline int draw_atom_number(const TrapParams& trap, Rng& rng) {
  if (trap.loading == Loading::fixed) return trap.fixed_atoms;
  return std::poisson_distribution<int>(trap.mean_atoms)(rng);
}

inline EnsembleSample sample_ensemble(const TrapParams& trap, const BeamModel& beam,
                                      const RydbergModel& ryd, Rng& rng) {
  trap.validate();
  beam.validate();
  ryd.validate();
  const int n = draw_atom_number(trap, rng);
  EnsembleSample s;
  s.mean_atoms = trap.loading == Loading::fixed ? trap.fixed_atoms : trap.mean_atoms;
  s.nominal_collective = std::sqrt(s.mean_atoms) * beam.omega_zero;
  s.nominal_single = beam.omega_one;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma_v = std::sqrt(constants::kBoltzmann * trap.temperature_uK * 1e-6 /
                                   constants::kRb87Mass);
  const Vec3 sigma(trap.sigma_perp_um, trap.sigma_perp_um, trap.sigma_z_um);
  const Vec3 axis = beam.k_axis.normalized();
  for (int k = 0; k < n; ++k) {
    Vec3 u(gauss(rng), gauss(rng), gauss(rng));
    Vec3 w(gauss(rng), gauss(rng), gauss(rng));
    const Vec3 offset = u.cwiseProduct(sigma);
    const Vec3 v = w * sigma_v;
    s.positions_um.push_back(trap.center_um + offset);
    s.velocities.push_back(v);
    const double f = beam.coupling_factor(offset);
    s.alphas.push_back(beam.omega_zero * f);
    s.alphas_one.push_back(beam.omega_one * f);
    s.detunings.push_back(beam.k_rydberg * v.dot(axis));
    s.hyperfine_doppler.push_back(beam.k_hyperfine * v.dot(axis));
    s.thermal_energy.push_back(0.5 * (u.squaredNorm() + w.squaredNorm()));
  }
  fill_pair_shifts(s, ryd);
  return s;
}

// Ensemble mean blockade shift with the harmonic-mean-of-squares convention
// 1/B² = <1/V_jk²> over all listed pairs. Returns 0 (with a warning) if a
// pair has zero shift.
inline double mean_blockade_shift(std::span<const double> shifts) {
  if (shifts.empty()) throw ValidationError("mean_blockade_shift: no pairs");
  double acc = 0.0;
  for (double v : shifts) {
    if (v == 0.0) {
      std::clog << "warning: mean_blockade_shift: pair with zero shift, B = 0\n";
      return 0.0;
    }
    acc += 1.0 / (v * v);
  }
  return 1.0 / std::sqrt(acc / static_cast<double>(shifts.size()));
}

inline double mean_blockade_shift(const EnsembleSample& s) {
  const int n = s.size();
  if (n < 2) throw ValidationError("mean_blockade_shift: need at least two atoms");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) v.push_back(s.pair_shifts(j, k));
  return mean_blockade_shift(v);
}

inline double collective_coupling(std::span<const double> alphas) {
  double s = 0.0;
  for (double a : alphas) s += a * a;
  return std::sqrt(s);
}

struct SiteRange {
  int first = 0;
  int count = 0;
};

// Several ensembles placed in one register. Atoms are concatenated in site
// order; pair shifts are computed across sites from absolute positions.
struct Register {
  EnsembleSample atoms;
  std::vector<SiteRange> sites;
  std::vector<double> nominal_collective;
  std::vector<double> nominal_single;
  std::vector<double> mean_atoms;

  int size() const noexcept { return atoms.size(); }
};

template <class T>
inline void append(std::vector<T>& dst, const std::vector<T>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

inline Register make_register(std::span<const EnsembleSample> sites, const RydbergModel& ryd) {
  Register reg;
  int offset = 0;
  for (const auto& s : sites) {
    reg.sites.push_back({offset, s.size()});
    offset += s.size();
    append(reg.atoms.positions_um, s.positions_um);
    append(reg.atoms.velocities, s.velocities);
    append(reg.atoms.alphas, s.alphas);
    append(reg.atoms.alphas_one, s.alphas_one);
    append(reg.atoms.detunings, s.detunings);
    append(reg.atoms.hyperfine_doppler, s.hyperfine_doppler);
    append(reg.atoms.thermal_energy, s.thermal_energy);
    reg.nominal_collective.push_back(s.nominal_collective);
    reg.nominal_single.push_back(s.nominal_single);
    reg.mean_atoms.push_back(s.mean_atoms);
  }
  const int n = offset;
  reg.atoms.pair_shifts = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t site = 0; site < sites.size(); ++site) {
    const auto r = reg.sites[site];
    reg.atoms.pair_shifts.block(r.first, r.first, r.count, r.count) = sites[site].pair_shifts;
    reg.atoms.clamped_pairs += sites[site].clamped_pairs;
  }
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (std::size_t b = a + 1; b < sites.size(); ++b) {
      const auto ra = reg.sites[a];
      const auto rb = reg.sites[b];
      for (int j = ra.first; j < ra.first + ra.count; ++j) {
        for (int k = rb.first; k < rb.first + rb.count; ++k) {
          const auto v = pair_shift(reg.atoms.positions_um[j], reg.atoms.positions_um[k], ryd);
          reg.atoms.pair_shifts(j, k) = reg.atoms.pair_shifts(k, j) = v.value;
          reg.atoms.clamped_pairs += v.clamped ? 1 : 0;
        }
      }
    }
  }
  return reg;
}

inline Register make_register(const EnsembleSample& single) {
  Register reg;
  reg.atoms = single;
  reg.sites.push_back({0, single.size()});
  reg.nominal_collective.push_back(single.nominal_collective);
  reg.nominal_single.push_back(single.nominal_single);
  reg.mean_atoms.push_back(single.mean_atoms);
  return reg;
}

// Mean blockade shift between the atoms of two sites of a register.
inline double mean_blockade_shift(const Register& reg, int site_a, int site_b) {
  const auto ra = reg.sites.at(site_a);
  const auto rb = reg.sites.at(site_b);
  std::vector<double> v;
  for (int j = ra.first; j < ra.first + ra.count; ++j)
    for (int k = rb.first; k < rb.first + rb.count; ++k) v.push_back(reg.atoms.pair_shifts(j, k));
  return mean_blockade_shift(v);
}

// CSV dump, one row per atom: x,y,z,vx,vy,vz,alpha,delta
inline void write_sample_csv(std::ostream& os, const EnsembleSample& s) {
  os << "x_um,y_um,z_um,vx,vy,vz,alpha,delta\n";
  for (int k = 0; k < s.size(); ++k) {
    const auto& p = s.positions_um[k];
    const auto& v = s.velocities[k];
    os << p.x() << ',' << p.y() << ',' << p.z() << ',' << v.x() << ',' << v.y() << ','
       << v.z() << ',' << s.alphas[k] << ',' << s.detunings[k] << '\n';
  }
}

}  // namespace ensq
