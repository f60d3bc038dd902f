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

#include "ensq/entanglement.hpp"

namespace ensq {
namespace {

TEST(BlockSizes, RemainderGoesLast) {
  EXPECT_EQ(block_sizes(5, 3), (std::vector<int>{3, 2}));
  EXPECT_EQ(block_sizes(6, 3), (std::vector<int>{3, 3}));
  EXPECT_EQ(block_sizes(4, 1), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_THROW(block_sizes(3, 4), ValidationError);
  EXPECT_THROW(block_sizes(3, 0), ValidationError);
}

// Oracle: expand the product of blocks over 3^N configurations, one qutrit
// per atom with level 2 holding the block's orthogonal remainder, then
// project onto |0̄> and the symmetric W state.
OverlapPair brute_force(const KPartiteState& s) {
  const int n = s.atoms;
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) dim *= 3;
  cplx zero = 0.0, w = 0.0;
  std::vector<int> lv(static_cast<std::size_t>(n));
  for (std::size_t code = 0; code < dim; ++code) {
    std::size_t c = code;
    for (int i = 0; i < n; ++i, c /= 3) lv[i] = static_cast<int>(c % 3);
    cplx amp = 1.0;
    int first = 0;
    for (std::size_t b = 0; b < s.sizes.size() && amp != 0.0; ++b) {
      const int k = s.sizes[b];
      int ones = 0, twos = 0, two_at = -1;
      for (int j = first; j < first + k; ++j) {
        ones += lv[j] == 1;
        if (lv[j] == 2) {
          ++twos;
          two_at = j;
        }
      }
      if (ones == 0 && twos == 0) {
        amp *= s.blocks[b].a;
      } else if (ones == 1 && twos == 0) {
        amp *= s.blocks[b].b / std::sqrt(static_cast<double>(k));
      } else if (ones == 0 && twos == 1 && two_at == first) {
        amp *= s.blocks[b].c;
      } else {
        amp = 0.0;
      }
      first += k;
    }
    int total_ones = 0, total_twos = 0;
    for (int l : lv) {
      total_ones += l == 1;
      total_twos += l == 2;
    }
    if (total_twos) continue;
    if (total_ones == 0) zero += amp;
    if (total_ones == 1) w += amp / std::sqrt(static_cast<double>(n));
  }
  return {std::norm(zero), std::norm(w)};
}

// Property: factorized overlaps equal the full-space expansion.
TEST(BlockOverlaps, MatchFullSpaceExpansion) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    const int k = 1 + (trial / 6) % n;
    const auto s = trial % 2 ? random_general_kpartite_state(n, k, rng) : random_kpartite_state(n, k, rng);
    const auto f = block_overlaps(s);
    const auto o = brute_force(s);
    ASSERT_NEAR(f.p0, o.p0, 1e-10) << n << ' ' << k;
    ASSERT_NEAR(f.p1, o.p1, 1e-10) << n << ' ' << k;
  }
}

TEST(BlockOverlaps, LimitingCases) {
  Rng rng(2);
  auto s = random_kpartite_state(5, 2, rng);
  for (auto& b : s.blocks) {
    b.a = 1.0;
    b.b = 0.0;
  }
  const auto vac = block_overlaps(s);
  EXPECT_DOUBLE_EQ(vac.p0, 1.0);
  EXPECT_DOUBLE_EQ(vac.p1, 0.0);
  const auto one = random_kpartite_state(4, 4, rng);
  const auto o = block_overlaps(one);
  EXPECT_NEAR(o.p0, std::norm(one.blocks[0].a), 1e-15);
  EXPECT_NEAR(o.p1, std::norm(one.blocks[0].b), 1e-15);
}

TEST(AnalyticThreshold, Values) {
  EXPECT_DOUBLE_EQ(blockaded_threshold(6, 6, 0.0), 1.0);
  EXPECT_NEAR(blockaded_threshold(9, 7, 0.44), 7.0 / 9.0 * 0.56, 1e-15);
  EXPECT_THROW(blockaded_threshold(4, 2, 1.5), ValidationError);
}

ThresholdOptions opts(std::size_t samples, ThresholdSampler sampler = ThresholdSampler::general) {
  ThresholdOptions o;
  o.samples = samples;
  o.bins = 20;
  o.sampler = sampler;
  return o;
}

TEST(NumericalThreshold, SingleBlockReachesW) {
  const auto c = numerical_threshold(4, 4, opts(20000));
  ASSERT_FALSE(c.empty(0));
  EXPECT_GT(c.max_p1[0], 0.95);
  for (std::size_t b = 0; b < c.bins(); ++b) {
    if (c.empty(b)) continue;
    EXPECT_LE(c.max_p1[b], 1.0);
    EXPECT_LE(c.max_p1[b], 1.0 - c.edges[b] + 1e-12);
  }
}

// Property: the k=3 family is contained in the k=4 family.
TEST(NumericalThreshold, SmallerBlocksStayBelow) {
  const auto c3 = numerical_threshold(4, 3, opts(20000));
  const auto c4 = numerical_threshold(4, 4, opts(20000));
  for (std::size_t b = 0; b < c3.bins(); ++b) {
    if (c3.empty(b) || c4.empty(b)) continue;
    EXPECT_LE(c3.max_p1[b], c4.max_p1[b] + 0.01) << b;
  }
}

TEST(NumericalThreshold, BlockadedSamplerFollowsAnalyticLine) {
  for (int n = 3; n <= 6; ++n) {
    const auto c = numerical_threshold(n, 2, opts(20000, ThresholdSampler::blockaded));
    for (std::size_t b = 0; b < c.bins(); ++b) {
      ASSERT_FALSE(c.empty(b));
      const double line = blockaded_threshold(n, 2, c.center(b));
      EXPECT_NEAR(c.max_p1[b], line, 0.02) << n << ' ' << b;
      EXPECT_GE(c.max_p1[b], line - 0.02);
    }
  }
}

TEST(NumericalThreshold, EmptyBinsAreFlaggedAndRunsAreReproducible) {
  auto o = opts(10);
  o.refine_steps = 0;
  const auto c = numerical_threshold(5, 2, o);
  std::size_t empties = 0;
  for (std::size_t b = 0; b < c.bins(); ++b) {
    if (c.empty(b)) {
      ++empties;
      EXPECT_TRUE(std::isnan(c.max_p1[b]));
    }
  }
  EXPECT_GT(empties, 0u);
  auto a = opts(9000);
  auto t = a;
  t.threads = 3;
  const auto x = numerical_threshold(6, 3, a), y = numerical_threshold(6, 3, t);
  for (std::size_t b = 0; b < x.bins(); ++b) {
    if (x.empty(b)) continue;
    EXPECT_EQ(x.max_p1[b], y.max_p1[b]);
  }
}

TEST(Certify, QuotedPoint) {
  const auto r = certify_fraction(0.44, 0.02, 0.46, 0.03);
  EXPECT_NEAR(r.fraction, 0.82, 0.005);
  EXPECT_NEAR(r.stderr_, 0.06, 0.01);
  EXPECT_NEAR(certify_bootstrap_stderr(0.44, 0.02, 0.46, 0.03, 200000, 1), r.stderr_, 0.005);
}

TEST(Certify, LimitsAndFlags) {
  EXPECT_DOUBLE_EQ(certify_fraction(0, 0, 1.0 / 7, 0).fraction, 1.0 / 7);
  EXPECT_DOUBLE_EQ(certify_fraction(0, 0, 1, 0).fraction, 1.0);
  EXPECT_THROW(certify_fraction(1.0, 0.01, 0.0, 0.01), NumericalError);
  const auto r = certify_fraction(0.44, 0.02, 0.46, 0.03, 9);
  ASSERT_EQ(r.analytic_met.size(), 9u);
  EXPECT_TRUE(r.analytic_met[6]);   // k = 7
  EXPECT_FALSE(r.analytic_met[7]);  // k = 8
}

// Property: scaling both uncertainties moves only the error.
TEST(Certify, PointIgnoresUncertaintyScale) {
  const auto a = certify_fraction(0.3, 0.01, 0.5, 0.02);
  const auto b = certify_fraction(0.3, 0.05, 0.5, 0.10);
  EXPECT_EQ(a.fraction, b.fraction);
  EXPECT_NEAR(b.stderr_, 5 * a.stderr_, 1e-14);
}

}  // namespace
}  // namespace ensq
