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

// Pulse programs: ordered drive pulses, free-evolution gaps and measurements.
// Quantities keep the unit they were written in so that programs print back
// exactly as parsed.

#include <optional>
#include <variant>
#include <vector>

#include "ensq/common.hpp"
#include "ensq/hamiltonian.hpp"

namespace ensq {

enum class Site { single, control, target };

enum class TimeUnit { s, ms, us, ns };

inline constexpr double time_scale(TimeUnit u) {
  switch (u) {
    case TimeUnit::s: return 1.0;
    case TimeUnit::ms: return 1e-3;
    case TimeUnit::us: return 1e-6;
    case TimeUnit::ns: return 1e-9;
  }
  return 1.0;
}

struct Duration {
  double value = 0.0;
  TimeUnit unit = TimeUnit::s;

  double seconds() const { return value * time_scale(unit); }
  static Duration from_seconds(double s) { return {s, TimeUnit::s}; }
  bool operator==(const Duration&) const = default;
};

enum class FrequencyUnit { rad_per_s, Hz, kHz, MHz };

struct Frequency {
  double value = 0.0;
  FrequencyUnit unit = FrequencyUnit::rad_per_s;

  double rad_per_s() const {
    switch (unit) {
      case FrequencyUnit::rad_per_s: return value;
      case FrequencyUnit::Hz: return kTwoPi * value;
      case FrequencyUnit::kHz: return kTwoPi * 1e3 * value;
      case FrequencyUnit::MHz: return kTwoPi * 1e6 * value;
    }
    return value;
  }
  bool operator==(const Frequency&) const = default;
};

// Angle stored as a multiple of π.
struct Angle {
  double pi_units = 0.0;

  double radians() const { return pi_units * kPi; }
  static Angle pi(double multiple) { return {multiple}; }
  static Angle rad(double r) { return {r / kPi}; }
  bool operator==(const Angle&) const = default;
};

// Exactly one of area and duration is set in a program. The area of a pulse
// is referenced to the nominal frequency of the addressed transition: the
// collective coupling for zero_ryd, the single-atom coupling for one_ryd.
struct Pulse {
  Site site = Site::single;
  Transition transition = Transition::zero_ryd;
  std::optional<Angle> area;
  std::optional<Duration> duration;
  Angle phase;
  Frequency detuning;

  bool operator==(const Pulse&) const = default;
};

struct Gap {
  Duration duration;
  Frequency offset;  // deterministic g1 phase advance during the gap

  bool operator==(const Gap&) const = default;
};

struct Measure {
  bool operator==(const Measure&) const = default;
};

using Step = std::variant<Pulse, Gap, Measure>;

struct PulseProgram {
  std::vector<Step> steps;

  bool operator==(const PulseProgram&) const = default;

  // 2 when any pulse addresses the control or target site, else 1.
  int required_sites() const {
    for (const auto& s : steps) {
      if (const auto* p = std::get_if<Pulse>(&s); p && p->site != Site::single) return 2;
    }
    return 1;
  }

  void validate() const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (const auto* p = std::get_if<Pulse>(&steps[i])) {
        if (p->area.has_value() == p->duration.has_value()) {
          throw ValidationError("program: pulse " + std::to_string(i) +
                                " needs exactly one of area and duration");
        }
        if (p->duration && p->duration->seconds() < 0) {
          throw ValidationError("program: negative pulse duration");
        }
      } else if (const auto* g = std::get_if<Gap>(&steps[i])) {
        if (g->duration.seconds() < 0) throw ValidationError("program: negative gap");
      }
    }
  }
};

inline Pulse make_pulse(Site site, Transition transition, Angle area, Angle phase = {}) {
  Pulse p;
  p.site = site;
  p.transition = transition;
  p.area = area;
  p.phase = phase;
  return p;
}

}  // namespace ensq
