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

#include <gtest/gtest.h>

#include <set>

#include "ensq/basis.hpp"

namespace ensq {
namespace {

// Brute-force count of product states over 3^N (or 2^N) with at most e_max
// excited atoms.
std::size_t count_by_enumeration(int n, BasisMode mode, int e_max) {
  const int levels = mode == BasisMode::three_level ? 3 : 2;
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(levels);
  std::size_t count = 0;
  for (std::size_t code = 0; code < total; ++code) {
    int exc = 0;
    for (std::size_t c = code; c > 0; c /= static_cast<std::size_t>(levels)) exc += (c % levels) != 0;
    if (exc <= e_max) ++count;
  }
  return count;
}

TEST(Basis, DimensionsOfNamedCases) {
  EXPECT_EQ(build_basis(5, BasisMode::ground_rydberg, 2)->dimension(), 16u);
  EXPECT_EQ(build_basis(5, BasisMode::three_level, 2)->dimension(), 51u);
  EXPECT_EQ(build_basis(1, BasisMode::ground_rydberg, 1)->dimension(), 2u);
}

TEST(Basis, DimensionMatchesEnumerationUpToTwelveAtoms) {
  for (int n = 1; n <= 12; ++n) {
    for (auto mode : {BasisMode::ground_rydberg, BasisMode::three_level}) {
      for (int e = 0; e <= n; ++e) {
        const std::size_t expected = count_by_enumeration(n, mode, e);
        EXPECT_EQ(TruncatedBasis::expected_dimension(n, mode, e), expected) << n << ' ' << e;
        if (n <= 8) EXPECT_EQ(build_basis(n, mode, e)->dimension(), expected) << n << ' ' << e;
      }
    }
  }
}

TEST(Basis, IndexIsABijection) {
  for (int n = 1; n <= 6; ++n) {
    const auto b = build_basis(n, BasisMode::three_level, std::min(n, 3));
    std::set<std::uint64_t> codes;
    for (std::size_t i = 0; i < b->dimension(); ++i) {
      ASSERT_EQ(b->index(b->state(i)), i);
      codes.insert(b->code(i));
      EXPECT_LE(b->excitations(i), b->max_excitations());
      EXPECT_EQ(excitation_count(b->state(i)), b->excitations(i));
    }
    EXPECT_EQ(codes.size(), b->dimension());
  }
}

TEST(Basis, BlocksAreOrderedByExcitationNumber) {
  const auto b = build_basis(4, BasisMode::three_level, 3);
  for (int n = 0; n <= 3; ++n) {
    const auto [lo, hi] = b->block(n);
    for (std::size_t i = lo; i < hi; ++i) EXPECT_EQ(b->excitations(i), n);
  }
  EXPECT_EQ(b->block(3).second, b->dimension());
}

TEST(Basis, StatesOutsideTruncationAreAbsent) {
  const auto b = build_basis(3, BasisMode::ground_rydberg, 1);
  const ProductState two{AtomLevel::ryd, AtomLevel::ryd, AtomLevel::g0};
  EXPECT_FALSE(b->index(two).has_value());
  const ProductState g1{AtomLevel::g1, AtomLevel::g0, AtomLevel::g0};
  EXPECT_FALSE(b->index(g1).has_value());
}

TEST(Basis, RejectsBadArguments) {
  EXPECT_THROW(build_basis(0, BasisMode::three_level, 0), ValidationError);
  EXPECT_THROW(build_basis(3, BasisMode::three_level, 4), ValidationError);
  EXPECT_THROW(build_basis(20, BasisMode::three_level, 20, 1000), SizeError);
}

TEST(CollectiveState, UniformSymmetricAmplitudes) {
  const auto b = build_basis(3, BasisMode::three_level, 1);
  const auto s = collective_state(b, CollectiveKind::one_bar, CollectiveWeights::uniform(3));
  for (int k = 0; k < 3; ++k) {
    ProductState l(3, AtomLevel::g0);
    l[k] = AtomLevel::g1;
    EXPECT_NEAR(std::abs(s[*b->index(l)] - 1.0 / std::sqrt(3.0)), 0.0, 1e-15);
  }
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(CollectiveState, WeightedAmplitudes) {
  const auto b = build_basis(2, BasisMode::ground_rydberg, 1);
  const auto s = collective_state(b, CollectiveKind::r_bar, CollectiveWeights::from({3.0, 4.0}));
  EXPECT_NEAR(s[*b->index(ProductState{AtomLevel::ryd, AtomLevel::g0})].real(), 0.6, 1e-15);
  EXPECT_NEAR(s[*b->index(ProductState{AtomLevel::g0, AtomLevel::ryd})].real(), 0.8, 1e-15);
}

TEST(CollectiveState, UnitNormForRandomWeights) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int n = 1; n <= 8; ++n) {
    const auto b = build_basis(n, BasisMode::three_level, std::min(n, 2));
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& x : a) x = u(rng);
    const auto w = CollectiveWeights::from(a);
    double sq = 0;
    for (double x : a) sq += x * x;
    EXPECT_NEAR(w.alpha_bar * w.alpha_bar, sq, 1e-12 * sq);
    for (auto kind : {CollectiveKind::zero_bar, CollectiveKind::one_bar, CollectiveKind::r_bar}) {
      EXPECT_NEAR(collective_state(b, kind, w).norm(), 1.0, 1e-12);
    }
    EXPECT_NEAR(collective_state(b, CollectiveKind::thermal_one, w, uniform_random_phases(n, rng)).norm(), 1.0,
                1e-12);
  }
}

TEST(CollectiveState, DegenerateAndMismatchedWeights) {
  const auto b = build_basis(2, BasisMode::three_level, 1);
  EXPECT_THROW(collective_state(b, CollectiveKind::one_bar, CollectiveWeights::from({0.0, 0.0})),
               DegenerateWeightError);
  EXPECT_THROW(collective_state(b, CollectiveKind::one_bar, CollectiveWeights::uniform(3)), ValidationError);
  EXPECT_THROW(CollectiveWeights::from({-1.0}), ValidationError);
  const auto gr = build_basis(2, BasisMode::ground_rydberg, 1);
  EXPECT_THROW(collective_state(gr, CollectiveKind::one_bar, CollectiveWeights::uniform(2)), ValidationError);
}

// Property: E|<1̄|1_th>|² = 1/N; per draw the overlap is |Σ e^{iφ_k}|²/N².
TEST(CollectiveState, ThermalOverlapAveragesToOneOverN) {
  for (int n = 2; n <= 8; ++n) {
    const auto b = build_basis(n, BasisMode::three_level, 1);
    const auto one = collective_state(b, CollectiveKind::one_bar, CollectiveWeights::uniform(n));
    Rng rng = trial_rng(11, static_cast<std::uint64_t>(n));
    const int m = 10000;
    double sum = 0, sq = 0;
    for (int i = 0; i < m; ++i) {
      const auto th = collective_state(b, CollectiveKind::thermal_one, {}, uniform_random_phases(n, rng));
      const double p = std::norm(inner(one, th));
      sum += p;
      sq += p * p;
    }
    const double mean = sum / m;
    const double se = std::sqrt((sq / m - mean * mean) / (m - 1));
    EXPECT_NEAR(mean, 1.0 / n, 3.0 * se) << "N=" << n;
  }
}

TEST(Populations, GroundState) {
  const auto b = build_basis(4, BasisMode::three_level, 2);
  const auto p = populations(collective_state(b, CollectiveKind::zero_bar, {}));
  EXPECT_DOUBLE_EQ(p.p0bar, 1.0);
  EXPECT_DOUBLE_EQ(p.p1bar + p.prbar + p.pperp + p.pmulti, 0.0);
}

TEST(Populations, EqualSuperposition) {
  const auto b = build_basis(3, BasisMode::three_level, 2);
  const auto w = CollectiveWeights::uniform(3);
  StateVector s(b, (collective_state(b, CollectiveKind::zero_bar, w).amplitudes() +
                    collective_state(b, CollectiveKind::one_bar, w).amplitudes()) /
                       std::sqrt(2.0));
  const auto p = populations(s);
  EXPECT_NEAR(p.p0bar, 0.5, 1e-14);
  EXPECT_NEAR(p.p1bar, 0.5, 1e-14);
  EXPECT_NEAR(p.prbar, 0.0, 1e-14);
  EXPECT_NEAR(p.pperp, 0.0, 1e-14);
}

// Oracle: |10> = ((|10>+|01>) + (|10>-|01>))/2 splits evenly.
TEST(Populations, SingleAtomExcitationSplitsIntoSymmetricAndOrthogonal) {
  const auto b = build_basis(2, BasisMode::three_level, 1);
  StateVector s(b);
  s[*b->index(ProductState{AtomLevel::g1, AtomLevel::g0})] = 1.0;
  const auto p = populations(s);
  EXPECT_NEAR(p.p1bar, 0.5, 1e-15);
  EXPECT_NEAR(p.pperp, 0.5, 1e-15);
}

TEST(Populations, SiteResolvedSumsOverOtherAtoms) {
  const auto b = build_basis(4, BasisMode::three_level, 2);
  // (|0̄>_a + |1̄>_a)/√2 ⊗ |1̄>_b over two two-atom sites
  StateVector s(b);
  const double h = 0.5;
  for (int kb = 2; kb < 4; ++kb) {
    ProductState l(4, AtomLevel::g0);
    l[kb] = AtomLevel::g1;
    s[*b->index(l)] += h * std::sqrt(2.0);
    for (int ka = 0; ka < 2; ++ka) {
      ProductState m = l;
      m[ka] = AtomLevel::g1;
      s[*b->index(m)] += h;
    }
  }
  s.normalize();
  const auto pa = populations(s, 0, 2, CollectiveWeights::uniform(2));
  const auto pb = populations(s, 2, 2, CollectiveWeights::uniform(2));
  EXPECT_NEAR(pa.p0bar, 0.5, 1e-12);
  EXPECT_NEAR(pa.p1bar, 0.5, 1e-12);
  EXPECT_NEAR(pb.p1bar, 1.0, 1e-12);
}

}  // namespace
}  // namespace ensq
