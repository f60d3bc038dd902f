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

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace ensq {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace constants {
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kAtomicMass = 1.66053906660e-27;  // kg
inline constexpr double kRb87Mass = 86.909180527 * kAtomicMass;
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kRb87ClockHz = 6.834682610904e9;
}  // namespace constants

// Error hierarchy. Every error thrown by the library derives from Error so
// front ends can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: wrong sizes, mismatched bases, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested basis would exceed the configured dimension cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Collective weights that are all zero.
class DegenerateWeightError : public Error {
 public:
  using Error::Error;
};

// Fits that cannot proceed, ill-posed reductions, aliasing.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// SplitMix64 finalizer. Used to derive independent per-trial streams from a
// run seed so results do not depend on which thread ran which trial.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial,
                     std::uint64_t stream = 0) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2DULL));
  const std::uint64_t b = splitmix64(a ^ splitmix64(trial));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace ensq
