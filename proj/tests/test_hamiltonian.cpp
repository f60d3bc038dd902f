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

#include "ensq/dynamics.hpp"
#include "ensq/hamiltonian.hpp"
#include "helpers.hpp"

namespace ensq {
namespace {

using testing::sample_with;

std::vector<double> random_alphas(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.5);
  std::vector<double> a(static_cast<std::size_t>(n));
  for (auto& x : a) x = u(rng);
  return a;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Operator `op` on atom `atom` of an n-atom 3^n space; atom a is the digit
// of weight 3^a, matching TruncatedBasis::encode.
Eigen::MatrixXcd embed(const Eigen::Matrix3cd& op, int atom, int n) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int a = n - 1; a >= 0; --a) out = kron(out, a == atom ? Eigen::MatrixXcd(op) : Eigen::MatrixXcd::Identity(3, 3));
  return out;
}

TEST(Blockaded, SingleAtomRabiMatrix) {
  const std::vector<double> a{2.0}, d{0.0};
  const auto h = blockaded_hamiltonian(a, d, CouplingConvention::rabi);
  Eigen::Matrix2cd expected;
  expected << 0, 1.0, 1.0, 0;
  EXPECT_EQ(h.entries, Eigen::MatrixXcd(expected));
}

TEST(Blockaded, TwoAtomSpectrum) {
  const std::vector<double> a{1, 1}, d{0, 0};
  const auto m = eigensystem(blockaded_hamiltonian(a, d)).values;
  EXPECT_NEAR(m[0], -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m[1], 0.0, 1e-12);
  EXPECT_NEAR(m[2], std::sqrt(2.0), 1e-12);
  const auto r = eigensystem(blockaded_hamiltonian(a, d, CouplingConvention::rabi)).values;
  EXPECT_NEAR(r[2] - r[0], std::sqrt(2.0), 1e-12);
}

TEST(Blockaded, ThreeFourFive) {
  const std::vector<double> a{3, 4}, d{0, 0};
  const auto v = eigensystem(blockaded_hamiltonian(a, d)).values;
  EXPECT_NEAR(v[0], -5.0, 1e-12);
  EXPECT_NEAR(v[2], 5.0, 1e-12);
}

// Property: for any positive couplings the two non-zero eigenvalues at δ=0
// are exactly ±ᾱ_N (matrix-element convention).
TEST(Blockaded, SplittingEqualsCollectiveCoupling) {
  Rng rng(2);
  for (int n = 1; n <= 10; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto a = random_alphas(n, rng);
      const std::vector<double> d(a.size(), 0.0);
      const auto v = eigensystem(blockaded_hamiltonian(a, d)).values;
      const double bar = collective_coupling(a);
      EXPECT_NEAR(v[0], -bar, 1e-12 * bar);
      EXPECT_NEAR(v[n], bar, 1e-12 * bar);
      for (int j = 1; j < n; ++j) EXPECT_NEAR(v[j], 0.0, 1e-12 * bar);
    }
  }
}

TEST(Blockaded, UniformSplittingIsRootN) {
  for (int n = 1; n <= 10; ++n) {
    const std::vector<double> a(static_cast<std::size_t>(n), 0.7), d(static_cast<std::size_t>(n), 0.0);
    const auto v = eigensystem(blockaded_hamiltonian(a, d, CouplingConvention::rabi)).values;
    EXPECT_NEAR(v[n] - v[0], std::sqrt(n) * 0.7, 1e-12);
  }
}

TEST(Eigensystem, ReconstructionAndOrthonormality) {
  Rng rng(8);
  std::normal_distribution<double> g(0, 1);
  for (int n : {1, 3, 10, 40}) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    const Eigen::MatrixXcd h = m + m.adjoint();
    const auto es = eigensystem(h);
    const Eigen::MatrixXcd back = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
    EXPECT_LE((h - back).norm(), 1e-9 * h.norm());
    EXPECT_LE((es.vectors.adjoint() * es.vectors - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  }
  Eigen::MatrixXcd bad(2, 2);
  bad << 0, 1, 0, 0;
  EXPECT_THROW(eigensystem(bad), ValidationError);
}

// Oracle: the untruncated 3^N tensor-product Hamiltonian, restricted to the
// basis states, must match the sparse construction entry by entry.
TEST(Drive, MatchesTensorProductConstruction) {
  Rng rng(13);
  std::normal_distribution<double> g(0, 1);
  for (int n = 1; n <= 4; ++n) {
    for (auto tr : {Transition::zero_ryd, Transition::one_ryd}) {
      auto s = sample_with(random_alphas(n, rng));
      s.alphas_one = random_alphas(n, rng);
      for (int k = 0; k < n; ++k) s.detunings[k] = g(rng);
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) s.pair_shifts(j, k) = s.pair_shifts(k, j) = 3.0 * g(rng);
      const double phi = 0.37, delta = 0.21;
      const auto basis = build_basis(n, BasisMode::three_level, n);
      const auto h = drive_hamiltonian(basis, s, tr, phi, delta);

      const int lg = tr == Transition::zero_ryd ? 0 : 1;
      const auto& alpha = tr == Transition::zero_ryd ? s.alphas : s.alphas_one;
      Eigen::Matrix3cd raise = Eigen::Matrix3cd::Zero(), proj_r = Eigen::Matrix3cd::Zero();
      raise(2, lg) = 1.0;
      proj_r(2, 2) = 1.0;
      const auto dim = static_cast<Eigen::Index>(std::pow(3, n));
      Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
      for (int m = 0; m < n; ++m) {
        const Eigen::MatrixXcd up = embed(raise, m, n) * (0.5 * alpha[m] * std::polar(1.0, phi));
        full += up + up.adjoint();
        full += (s.detunings[m] + delta) * embed(proj_r, m, n);
      }
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) full += s.pair_shifts(j, k) * embed(proj_r, j, n) * embed(proj_r, k, n);

      for (std::size_t i = 0; i < basis->dimension(); ++i)
        for (std::size_t j = 0; j < basis->dimension(); ++j) {
          const cplx want = full(static_cast<Eigen::Index>(basis->code(i)), static_cast<Eigen::Index>(basis->code(j)));
          ASSERT_NEAR(std::abs(h.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - want), 0.0,
                      1e-12);
        }
    }
  }
}

TEST(Drive, PhaseShiftByPiFlipsCouplings) {
  const auto s = sample_with({0.4, 0.9, 1.3});
  const auto basis = build_basis(3, BasisMode::three_level, 2);
  const auto a = drive_hamiltonian(basis, s, Transition::zero_ryd, 0.3, 0.0).entries;
  const auto b = drive_hamiltonian(basis, s, Transition::zero_ryd, 0.3 + kPi, 0.0).entries;
  const Eigen::MatrixXcd off_a = a - Eigen::MatrixXcd(a.diagonal().asDiagonal());
  const Eigen::MatrixXcd off_b = b - Eigen::MatrixXcd(b.diagonal().asDiagonal());
  EXPECT_LE((off_a + off_b).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(a.diagonal(), b.diagonal());
}

// Oracle: non-interacting two-level atoms have eigenvalues Σ ±α_m/2.
TEST(BlockTridiagonal, NonInteractingSpectrumIsSumOfSingleAtoms) {
  const std::vector<double> a{0.5, 1.1, 1.7};
  const auto s = sample_with(a);
  const auto h = block_tridiagonal(s, build_basis(3, BasisMode::ground_rydberg, 3));
  std::vector<double> expected;
  for (int mask = 0; mask < 8; ++mask) {
    double e = 0;
    for (int m = 0; m < 3; ++m) e += (mask >> m & 1 ? 0.5 : -0.5) * a[m];
    expected.push_back(e);
  }
  std::sort(expected.begin(), expected.end());
  const auto v = eigensystem(h).values;
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(v[i], expected[i], 1e-12);
}

TEST(BlockTridiagonal, IsBlockTridiagonalInExcitationNumber) {
  const auto s = sample_with({1, 2, 3, 4}, 5.0);
  const auto basis = build_basis(4, BasisMode::ground_rydberg, 3);
  const auto h = block_tridiagonal(s, basis);
  EXPECT_LE(h.hermiticity_defect(), 1e-12);
  for (std::size_t i = 0; i < basis->dimension(); ++i)
    for (std::size_t j = 0; j < basis->dimension(); ++j)
      if (std::abs(basis->excitations(i) - basis->excitations(j)) > 1) {
        EXPECT_EQ(h.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), cplx(0.0));
      }
}

// Property: large pair shifts reproduce the perfectly blockaded dynamics.
TEST(BlockTridiagonal, StrongInteractionReproducesBlockadedDynamics) {
  Rng rng(31);
  for (int n = 2; n <= 6; ++n) {
    const auto a = random_alphas(n, rng);
    const double bar = collective_coupling(a);
    const auto s = sample_with(a, 1e6 * bar);
    const auto basis = build_basis(n, BasisMode::ground_rydberg, 2);
    const auto full = block_tridiagonal(s, basis);
    const std::vector<double> d(a.size(), 0.0);
    const auto blk = blockaded_hamiltonian(a, d, CouplingConvention::rabi);
    const auto b1 = blk.basis;
    const auto psi = collective_state(basis, CollectiveKind::zero_bar, {});
    const auto phi = collective_state(b1, CollectiveKind::zero_bar, {});
    for (int step = 1; step <= 20; ++step) {
      const double t = kTwoPi / bar * step / 20.0;
      const double p_full = std::norm(propagate(psi, full, t)[0]);
      const double p_blk = std::norm(propagate(phi, blk, t)[0]);
      EXPECT_NEAR(p_full, p_blk, 1e-3) << "N=" << n << " t=" << t;
    }
  }
}

TEST(Dressed, HomogeneousSampleIsAnEigenstate) {
  const auto p = dressed_projection(sample_with({1, 1, 1, 1, 1}));
  EXPECT_NEAR(p.p_minus, 1.0, 1e-12);
  EXPECT_NEAR(p.p_perp, 0.0, 1e-12);
}

TEST(Dressed, SingleAtomReducesToTwoLevel) {
  const auto p = dressed_projection(sample_with({0.8}));
  EXPECT_NEAR(p.p_minus, 1.0, 1e-12);
  EXPECT_NEAR(p.p_plus, 1.0, 1e-12);
}

// Oracle: a far-detuned atom decouples, leaving the (N-1)-atom dressed state;
// its overlap with the N-atom |-> is (2N-1+2√(N(N-1)))/(4N).
TEST(Dressed, FarDetunedAtomDecouples) {
  for (int n = 2; n <= 6; ++n) {
    auto s = sample_with(std::vector<double>(static_cast<std::size_t>(n), 1.0));
    s.detunings[0] = 1e5;
    const auto p = dressed_projection(s);
    const double expected = (2.0 * n - 1 + 2 * std::sqrt(n * (n - 1.0))) / (4.0 * n);
    EXPECT_NEAR(p.p_minus, expected, 1e-4) << n;
  }
}

TEST(Dressed, RejectsEmptySample) { EXPECT_THROW(dressed_projection(EnsembleSample{}), ValidationError); }

}  // namespace
}  // namespace ensq
