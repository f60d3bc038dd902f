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

// Blow-away readout: g0 atoms are pushed out of the trap, the remaining atoms
// are counted. A site "detects |1̄>" when at least one atom is retained.

#include <span>
#include <vector>

#include "ensq/basis.hpp"
#include "ensq/ensemble.hpp"

namespace ensq {

enum class RydbergFate { loss, g1 };

struct MeasurementModel {
  double leak_0_to_1 = 0.015;    // g0 atom survives the push-out
  double blowaway_leak = 0.002;  // additional per-atom survival of g0 atoms
  double retain_1 = 1.0;
  RydbergFate rydberg_maps_to = RydbergFate::loss;

  void validate() const {
    for (double p : {leak_0_to_1, blowaway_leak, retain_1}) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("measurement: probabilities must lie in [0,1]");
    }
  }

  // Combined survival probability of an atom left in g0.
  double g0_retention() const { return 1.0 - (1.0 - leak_0_to_1) * (1.0 - blowaway_leak); }

  double retention(AtomLevel l) const {
    switch (l) {
      case AtomLevel::g0: return g0_retention();
      case AtomLevel::g1: return retain_1;
      case AtomLevel::ryd: return rydberg_maps_to == RydbergFate::g1 ? retain_1 : 0.0;
    }
    return 0.0;
  }
};

struct MeasurementOutcome {
  std::size_t basis_index = 0;
  std::vector<int> retained;   // per site
  std::vector<bool> detected;  // retained >= 1
  bool postselected = false;   // control site (site 0) retained >= 1
};

// Samples a product-state outcome from |ψ|², then each atom's survival.
inline MeasurementOutcome blowaway_measure(const StateVector& state, const MeasurementModel& model,
                                           std::span<const SiteRange> sites, Rng& rng,
                                           const std::vector<bool>* lost = nullptr) {
  model.validate();
  const auto& basis = state.basis();
  const auto& amps = state.amplitudes();
  const double total = amps.squaredNorm();
  double u = uniform01(rng) * total;
  std::size_t pick = basis.dimension() - 1;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    u -= std::norm(amps[static_cast<Eigen::Index>(i)]);
    if (u < 0.0) {
      pick = i;
      break;
    }
  }
  MeasurementOutcome out;
  out.basis_index = pick;
  for (const auto& site : sites) {
    int kept = 0;
    for (int k = site.first; k < site.first + site.count; ++k) {
      if (lost && (*lost)[k]) {
        uniform01(rng);  // keep the stream aligned
        continue;
      }
      if (uniform01(rng) < model.retention(basis.level(pick, k))) ++kept;
    }
    out.retained.push_back(kept);
    out.detected.push_back(kept > 0);
  }
  out.postselected = !out.detected.empty() && out.detected.front();
  return out;
}

// Expected probability that a site retains at least one atom.
inline double detection_probability(const StateVector& state, const MeasurementModel& model,
                                    SiteRange site, const std::vector<bool>* lost = nullptr) {
  const auto& basis = state.basis();
  double p = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double w = std::norm(state[i]);
    if (w == 0.0) continue;
    double none = 1.0;
    for (int k = site.first; k < site.first + site.count; ++k) {
      if (lost && (*lost)[k]) continue;
      none *= 1.0 - model.retention(basis.level(i, k));
    }
    p += w * (1.0 - none);
  }
  return p;
}

}  // namespace ensq
