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

// Truncated many-atom product bases and the collective ensemble states.
//
// Ordering (relied on by CSV state dumps): states are grouped by ascending
// excitation number n (number of atoms not in g0). Within a block the
// excited-atom index sets appear in lexicographic order; for each set the
// level pattern is enumerated lexicographically with g1 < ryd, the lowest
// excited atom being the most significant position.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ensq/common.hpp"

namespace ensq {

enum class AtomLevel : std::uint8_t { g0 = 0, g1 = 1, ryd = 2 };

enum class BasisMode {
  three_level,     // g0, g1, ryd per atom
  ground_rydberg,  // g0, ryd per atom
};

using ProductState = std::vector<AtomLevel>;

inline int excitation_count(std::span<const AtomLevel> levels) {
  return static_cast<int>(std::count_if(levels.begin(), levels.end(),
                                        [](AtomLevel l) { return l != AtomLevel::g0; }));
}

inline constexpr int kMaxAtoms = 24;
inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 21;

class TruncatedBasis {
 public:
  TruncatedBasis(int n_atoms, BasisMode mode, int e_max,
                 std::size_t dimension_cap = kDefaultDimensionCap)
      : n_atoms_(n_atoms), mode_(mode), e_max_(e_max) {
    if (n_atoms < 1 || n_atoms > kMaxAtoms) {
      throw ValidationError("basis: atom count must be in [1, " +
                            std::to_string(kMaxAtoms) + "], got " +
                            std::to_string(n_atoms));
    }
    if (e_max < 0 || e_max > n_atoms) {
      throw ValidationError("basis: e_max must be in [0, N]");
    }
    const std::size_t dim = expected_dimension(n_atoms, mode, e_max);
    if (dim > dimension_cap) {
      throw SizeError("basis: dimension " + std::to_string(dim) +
                      " exceeds cap " + std::to_string(dimension_cap));
    }
    pow3_.resize(n_atoms);
    std::uint64_t p = 1;
    for (int a = 0; a < n_atoms; ++a, p *= 3) pow3_[a] = p;
    enumerate(dim);
  }

  // Σ_n C(N,n) (three_level: ·2^n).
  static std::size_t expected_dimension(int n_atoms, BasisMode mode, int e_max) {
    long double total = 0;
    long double binom = 1;
    for (int n = 0; n <= e_max; ++n) {
      if (n > 0) binom = binom * (n_atoms - n + 1) / n;
      total += binom * (mode == BasisMode::three_level ? std::ldexp(1.0L, n) : 1.0L);
    }
    if (total > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max() / 2;
    }
    return static_cast<std::size_t>(std::llround(total));
  }

  int atoms() const noexcept { return n_atoms_; }
  BasisMode mode() const noexcept { return mode_; }
  int max_excitations() const noexcept { return e_max_; }
  std::size_t dimension() const noexcept { return states_.size(); }

  std::span<const AtomLevel> state(std::size_t i) const {
    return {levels_.data() + i * n_atoms_, static_cast<std::size_t>(n_atoms_)};
  }
  AtomLevel level(std::size_t i, int atom) const { return levels_[i * n_atoms_ + atom]; }
  int excitations(std::size_t i) const noexcept { return excitations_[i]; }
  std::uint64_t code(std::size_t i) const noexcept { return states_[i]; }
  std::uint64_t digit_weight(int atom) const noexcept { return pow3_[atom]; }

  // Index range [begin, end) of the block with n excitations.
  std::pair<std::size_t, std::size_t> block(int n) const {
    if (n < 0 || n > e_max_) return {dimension(), dimension()};
    return {block_start_[n], block_start_[n + 1]};
  }

  std::optional<std::size_t> find_code(std::uint64_t c) const {
    auto it = index_.find(c);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> index(std::span<const AtomLevel> levels) const {
    if (static_cast<int>(levels.size()) != n_atoms_) return std::nullopt;
    return find_code(encode(levels));
  }

  std::uint64_t encode(std::span<const AtomLevel> levels) const {
    std::uint64_t c = 0;
    for (int a = 0; a < n_atoms_; ++a) c += pow3_[a] * static_cast<std::uint64_t>(levels[a]);
    return c;
  }

  // Index of the state obtained from state i by setting one atom's level, if
  // that state lies inside the truncation.
  std::optional<std::size_t> with_level(std::size_t i, int atom, AtomLevel to) const {
    const auto from = level(i, atom);
    const std::uint64_t c = code(i) - pow3_[atom] * static_cast<std::uint64_t>(from) +
                            pow3_[atom] * static_cast<std::uint64_t>(to);
    return find_code(c);
  }

 private:
  void enumerate(std::size_t dim) {
    states_.reserve(dim);
    levels_.reserve(dim * n_atoms_);
    excitations_.reserve(dim);
    index_.reserve(dim * 2);
    block_start_.assign(e_max_ + 2, 0);
    std::vector<int> combo;
    ProductState levels(n_atoms_, AtomLevel::g0);
    for (int n = 0; n <= e_max_; ++n) {
      block_start_[n] = states_.size();
      combo.resize(n);
      std::iota(combo.begin(), combo.end(), 0);
      while (true) {
        const int patterns = mode_ == BasisMode::three_level ? (1 << n) : 1;
        for (int p = 0; p < patterns; ++p) {
          std::fill(levels.begin(), levels.end(), AtomLevel::g0);
          for (int j = 0; j < n; ++j) {
            const bool ryd = mode_ == BasisMode::ground_rydberg || ((p >> (n - 1 - j)) & 1);
            levels[combo[j]] = ryd ? AtomLevel::ryd : AtomLevel::g1;
          }
          push(levels, n);
        }
        if (!next_combination(combo)) break;
      }
    }
    block_start_[e_max_ + 1] = states_.size();
  }

  bool next_combination(std::vector<int>& combo) const {
    const int k = static_cast<int>(combo.size());
    int i = k - 1;
    while (i >= 0 && combo[i] == n_atoms_ - k + i) --i;
    if (i < 0) return false;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
    return true;
  }

  void push(const ProductState& levels, int n) {
    const std::uint64_t c = encode(levels);
    index_.emplace(c, states_.size());
    states_.push_back(c);
    levels_.insert(levels_.end(), levels.begin(), levels.end());
    excitations_.push_back(n);
  }

  int n_atoms_;
  BasisMode mode_;
  int e_max_;
  std::vector<std::uint64_t> pow3_;
  std::vector<std::uint64_t> states_;
  std::vector<AtomLevel> levels_;
  std::vector<int> excitations_;
  std::vector<std::size_t> block_start_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const TruncatedBasis>;

inline BasisPtr build_basis(int n_atoms, BasisMode mode, int e_max,
                            std::size_t dimension_cap = kDefaultDimensionCap) {
  return std::make_shared<const TruncatedBasis>(n_atoms, mode, e_max, dimension_cap);
}

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(BasisPtr basis)
      : basis_(std::move(basis)), amps_(Eigen::VectorXcd::Zero(basis_->dimension())) {}
  StateVector(BasisPtr basis, Eigen::VectorXcd amps) : basis_(std::move(basis)), amps_(std::move(amps)) {
    if (static_cast<std::size_t>(amps_.size()) != basis_->dimension()) {
      throw ValidationError("state: amplitude count does not match basis dimension");
    }
  }

  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const TruncatedBasis& basis() const noexcept { return *basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  cplx& operator[](std::size_t i) { return amps_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amps_.norm(); }
  void normalize() {
    const double n = norm();
    if (n == 0.0) throw NumericalError("state: cannot normalize the zero vector");
    amps_ /= n;
  }

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amps_;
};

// ⟨a|b⟩
inline cplx inner(const StateVector& a, const StateVector& b) {
  if (a.basis_ptr() != b.basis_ptr() && a.basis().dimension() != b.basis().dimension()) {
    throw ValidationError("inner: states live on different bases");
  }
  return a.amplitudes().dot(b.amplitudes());
}

struct CollectiveWeights {
  std::vector<double> alphas;
  double alpha_bar = 0.0;

  static CollectiveWeights from(std::vector<double> alphas) {
    double s = 0.0;
    for (double a : alphas) {
      if (!(a >= 0.0)) throw ValidationError("weights: couplings must be non-negative");
      s += a * a;
    }
    return {std::move(alphas), std::sqrt(s)};
  }
  static CollectiveWeights uniform(int n, double alpha = 1.0) {
    return from(std::vector<double>(static_cast<std::size_t>(n), alpha));
  }
};

enum class CollectiveKind { zero_bar, one_bar, r_bar, thermal_one };

// Collective ensemble states over the atoms of `basis`. one_bar and r_bar carry
// amplitudes α_k/ᾱ_N on the corresponding single-excitation states;
// thermal_one is Σ e^{iφ_k}|1_k⟩/√N. one_bar and thermal_one need g1, hence a
// three_level basis.
inline StateVector collective_state(const BasisPtr& basis, CollectiveKind kind,
                                    const CollectiveWeights& weights,
                                    std::span<const double> phases = {}) {
  const int n = basis->atoms();
  StateVector out(basis);
  ProductState levels(n, AtomLevel::g0);
  if (kind == CollectiveKind::zero_bar) {
    out[*basis->index(levels)] = 1.0;
    return out;
  }
  const AtomLevel excited = kind == CollectiveKind::r_bar ? AtomLevel::ryd : AtomLevel::g1;
  if (excited == AtomLevel::g1 && basis->mode() != BasisMode::three_level) {
    throw ValidationError("collective_state: |1> states need a three_level basis");
  }
  if (basis->max_excitations() < 1) {
    throw ValidationError("collective_state: basis truncated below one excitation");
  }
  if (kind == CollectiveKind::thermal_one) {
    if (static_cast<int>(phases.size()) != n) {
      throw ValidationError("collective_state: thermal state needs one phase per atom");
    }
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
      levels[k] = excited;
      out[*basis->index(levels)] = std::polar(amp, phases[k]);
      levels[k] = AtomLevel::g0;
    }
    return out;
  }
  if (static_cast<int>(weights.alphas.size()) != n) {
    throw ValidationError("collective_state: weight count does not match atom count");
  }
  if (weights.alpha_bar <= 0.0) {
    throw DegenerateWeightError("collective_state: all collective weights are zero");
  }
  for (int k = 0; k < n; ++k) {
    levels[k] = excited;
    out[*basis->index(levels)] = weights.alphas[k] / weights.alpha_bar;
    levels[k] = AtomLevel::g0;
  }
  return out;
}

inline std::vector<double> uniform_random_phases(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& p : out) p = u(rng);
  return out;
}

struct Populations {
  double p0bar = 0.0;
  double p1bar = 0.0;
  double prbar = 0.0;
  double pperp = 0.0;   // single-excitation weight orthogonal to |1̄>, |r̄>
  double pmulti = 0.0;  // two or more excitations inside the site
};

// Site-resolved collective populations: the atoms [first, first+count) are
// projected onto |0̄>, |1̄>, |r̄> (defined with `weights`), summing over the
// configurations of every other atom.
inline Populations populations(const StateVector& state, int first, int count,
                               const CollectiveWeights& weights) {
  const auto& basis = state.basis();
  if (first < 0 || count < 0 || first + count > basis.atoms()) {
    throw ValidationError("populations: atom range outside basis");
  }
  if (static_cast<int>(weights.alphas.size()) != count) {
    throw ValidationError("populations: weight count does not match site size");
  }
  if (count > 0 && weights.alpha_bar <= 0.0) {
    throw DegenerateWeightError("populations: all collective weights are zero");
  }
  struct Accum {
    cplx zero{0.0};
    cplx one{0.0};
    cplx ryd{0.0};
  };
  std::unordered_map<std::uint64_t, Accum> by_rest;
  double single_g1 = 0.0;
  double single_r = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const cplx a = state[i];
    const double w = std::norm(a);
    total += w;
    if (a == cplx(0.0)) continue;
    std::uint64_t site_code = 0;
    int site_exc = 0;
    int excited_atom = -1;
    for (int k = 0; k < count; ++k) {
      const auto l = basis.level(i, first + k);
      if (l != AtomLevel::g0) {
        ++site_exc;
        excited_atom = k;
        site_code += basis.digit_weight(first + k) * static_cast<std::uint64_t>(l);
      }
    }
    if (site_exc > 1) continue;
    const std::uint64_t rest = basis.code(i) - site_code;
    auto& acc = by_rest[rest];
    if (site_exc == 0) {
      acc.zero += a;
    } else {
      const double wk = weights.alphas[excited_atom] / weights.alpha_bar;
      if (basis.level(i, first + excited_atom) == AtomLevel::g1) {
        acc.one += wk * a;
        single_g1 += w;
      } else {
        acc.ryd += wk * a;
        single_r += w;
      }
    }
  }
  Populations p;
  for (const auto& [rest, acc] : by_rest) {
    p.p0bar += std::norm(acc.zero);
    p.p1bar += std::norm(acc.one);
    p.prbar += std::norm(acc.ryd);
  }
  p.pperp = std::max(0.0, single_g1 - p.p1bar) + std::max(0.0, single_r - p.prbar);
  p.pmulti = std::max(0.0, total - p.p0bar - p.p1bar - p.prbar - p.pperp);
  return p;
}

inline Populations populations(const StateVector& state, const CollectiveWeights& weights) {
  return populations(state, 0, state.basis().atoms(), weights);
}

inline Populations populations(const StateVector& state) {
  return populations(state, CollectiveWeights::uniform(state.basis().atoms()));
}

}  // namespace ensq
