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

// Hand-built samples and registers with exactly known couplings.

#include "ensq/dynamics.hpp"

namespace ensq::testing {

// Atoms at the origin with the given couplings, no Doppler shifts and a
// uniform pair shift v.
inline EnsembleSample sample_with(std::vector<double> alphas, double v = 0.0, double alpha_one = -1.0) {
  EnsembleSample s;
  const int n = static_cast<int>(alphas.size());
  const auto un = static_cast<std::size_t>(n);
  s.alphas_one = alpha_one < 0 ? alphas : std::vector<double>(un, alpha_one);
  s.alphas = std::move(alphas);
  s.detunings.assign(un, 0.0);
  s.hyperfine_doppler.assign(un, 0.0);
  s.thermal_energy.assign(un, 0.0);
  s.positions_um.assign(un, Vec3::Zero());
  s.velocities.assign(un, Vec3::Zero());
  s.pair_shifts = Eigen::MatrixXd::Constant(n, n, v);
  s.pair_shifts.diagonal().setZero();
  s.mean_atoms = n;
  s.nominal_collective = collective_coupling(s.alphas);
  s.nominal_single = s.alphas_one.empty() ? 0.0 : s.alphas_one.front();
  return s;
}

inline EnsembleSample uniform_sample(int n, double alpha = 1.0e6, double v = 0.0, double alpha_one = 2.0e6) {
  return sample_with(std::vector<double>(static_cast<std::size_t>(n), alpha), v, alpha_one);
}

inline Register uniform_register(int n, double alpha = 1.0e6, double v = 0.0, double alpha_one = 2.0e6) {
  return make_register(uniform_sample(n, alpha, v, alpha_one));
}

// Two sites with every cross-site pair shift equal to `cross` and every
// intra-site shift at 10⁶ α (perfect blockade within a site).
inline Register two_site_register(int nc, int nt, double cross, double alpha = 1.0e6, double alpha_one = 2.0e6) {
  const double intra = 1.0e6 * alpha;
  const std::vector<EnsembleSample> sites{uniform_sample(nc, alpha, intra, alpha_one),
                                          uniform_sample(nt, alpha, intra, alpha_one)};
  RydbergModel ryd;
  ryd.angular = Angular::isotropic;
  Register reg = make_register(sites, ryd);
  set_cross_site_shift(reg, cross);
  return reg;
}

inline RunOptions ideal_options(int e_max = 1) {
  RunOptions o;
  o.e_max = e_max;
  o.measurement.leak_0_to_1 = 0.0;
  o.measurement.blowaway_leak = 0.0;
  return o;
}

}  // namespace ensq::testing
