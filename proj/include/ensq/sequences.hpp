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

// Named pulse programs over ensemble qubits. Steps are listed in time order;
// none of the constructors appends a measurement (use with_measurement).
//
//   rotation  R1(π) R0(θ,φ) R1(π)              |0̄>,|1̄> qubit rotation
//   ramsey    R0(π/2) R1(π) G(t) R1(π) R0(π/2,φ) R1(π)
//   cz        R1c(π) R1t(2π) R1c(π)
//   ua        R0t(θ) R1t(π)
//   ub        R0c(π) R0t(θ) R1t(π) R1c(π)
//
// With `spacing` > 0 a free-evolution gap of that length separates
// consecutive pulses.

#include "ensq/program.hpp"

namespace ensq {

namespace detail {

inline void push_pulse(PulseProgram& p, Pulse pulse, const Duration& spacing) {
  if (spacing.seconds() > 0 && !p.steps.empty() && std::holds_alternative<Pulse>(p.steps.back())) {
    p.steps.push_back(Gap{spacing, {}});
  }
  p.steps.push_back(std::move(pulse));
}

}  // namespace detail

inline PulseProgram with_measurement(PulseProgram p) {
  p.steps.push_back(Measure{});
  return p;
}

inline PulseProgram rotation_program(Angle theta, Angle phi = {}, Site site = Site::single,
                                     Duration spacing = {}) {
  PulseProgram p;
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::zero_ryd, theta, phi), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  return p;
}

// `offset` advances the g1 phase deterministically during the gap, turning a
// gap-time scan into a time-domain fringe.
inline PulseProgram ramsey_program(Duration gap, Angle analysis_phase = {}, Frequency offset = {},
                                   Site site = Site::single, Duration spacing = {}) {
  if (gap.seconds() < 0) throw ValidationError("ramsey_program: negative gap");
  PulseProgram p;
  detail::push_pulse(p, make_pulse(site, Transition::zero_ryd, Angle::pi(0.5)), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  p.steps.push_back(Gap{gap, offset});
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::zero_ryd, Angle::pi(0.5), analysis_phase), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  return p;
}

inline PulseProgram cz_program(Duration spacing = {}) {
  PulseProgram p;
  detail::push_pulse(p, make_pulse(Site::control, Transition::one_ryd, Angle::pi(1)), spacing);
  detail::push_pulse(p, make_pulse(Site::target, Transition::one_ryd, Angle::pi(2)), spacing);
  detail::push_pulse(p, make_pulse(Site::control, Transition::one_ryd, Angle::pi(1)), spacing);
  return p;
}

// Target alone; `site` may be Site::single for a one-site register.
inline PulseProgram ua_program(Angle theta, Site site = Site::target, Duration spacing = {}) {
  PulseProgram p;
  detail::push_pulse(p, make_pulse(site, Transition::zero_ryd, theta), spacing);
  detail::push_pulse(p, make_pulse(site, Transition::one_ryd, Angle::pi(1)), spacing);
  return p;
}

inline PulseProgram ub_program(Angle theta, Duration spacing = {}) {
  PulseProgram p;
  detail::push_pulse(p, make_pulse(Site::control, Transition::zero_ryd, Angle::pi(1)), spacing);
  detail::push_pulse(p, make_pulse(Site::target, Transition::zero_ryd, theta), spacing);
  detail::push_pulse(p, make_pulse(Site::target, Transition::one_ryd, Angle::pi(1)), spacing);
  detail::push_pulse(p, make_pulse(Site::control, Transition::one_ryd, Angle::pi(1)), spacing);
  return p;
}

}  // namespace ensq
