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

// Collective light-atom Hamiltonians.
//
// Rabi convention: a drive of strength α on one atom has off-diagonal matrix
// element α/2, so a pulse of duration π/α transfers the atom completely and a
// collective pulse of duration π/ᾱ_N maps |0̄> onto |r̄>. The literal (N+1)
// dimensional blockaded matrix with bare α_m entries is available through
// CouplingConvention::matrix_element.

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "ensq/basis.hpp"
#include "ensq/ensemble.hpp"

namespace ensq {

struct HermitianOperator {
  BasisPtr basis;
  Eigen::MatrixXcd entries;

  Eigen::Index dimension() const noexcept { return entries.rows(); }

  double hermiticity_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
};

struct Eigensystem {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
};

inline Eigensystem eigensystem(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw ValidationError("eigensystem: matrix is not square");
  if (h.rows() == 0) return {};
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("eigensystem: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensystem: solver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Eigensystem eigensystem(const HermitianOperator& h) { return eigensystem(h.entries); }

// ⟨row|H|col⟩ = value for row != col; the conjugate entry is implied.
struct Coupling {
  std::size_t row;
  std::size_t col;
  cplx value;
};

struct SparseHamiltonian {
  BasisPtr basis;
  Eigen::VectorXd diagonal;
  std::vector<Coupling> couplings;

  HermitianOperator to_dense() const {
    const auto n = static_cast<Eigen::Index>(basis->dimension());
    HermitianOperator h{basis, Eigen::MatrixXcd::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) h.entries(i, i) = diagonal[i];
    for (const auto& c : couplings) {
      const auto r = static_cast<Eigen::Index>(c.row);
      const auto k = static_cast<Eigen::Index>(c.col);
      h.entries(r, k) += c.value;
      h.entries(k, r) += std::conj(c.value);
    }
    return h;
  }
};

// Interaction energy of Rydberg pairs plus single-atom Rydberg detunings.
inline double rydberg_energy(const TruncatedBasis& basis, std::size_t i,
                             const Eigen::MatrixXd& pair_shifts,
                             std::span<const double> ryd_detuning,
                             const std::vector<bool>* lost = nullptr) {
  double e = 0.0;
  const int n = basis.atoms();
  int ryd_atoms[kMaxAtoms];
  int count = 0;
  for (int k = 0; k < n; ++k) {
    if (basis.level(i, k) != AtomLevel::ryd) continue;
    if (lost && (*lost)[k]) continue;
    e += ryd_detuning.empty() ? 0.0 : ryd_detuning[k];
    ryd_atoms[count++] = k;
  }
  for (int a = 0; a < count; ++a)
    for (int b = a + 1; b < count; ++b) e += pair_shifts(ryd_atoms[a], ryd_atoms[b]);
  return e;
}

// Block-tridiagonal H_int = A + Δ over a ground/Rydberg basis: diagonal
// blocks carry Σ δ_k of the excited atoms plus V_jk of excited pairs; states
// differing by one atom's excitation couple with α_m/2.
inline HermitianOperator block_tridiagonal(const EnsembleSample& sample, const BasisPtr& basis) {
  if (basis->mode() != BasisMode::ground_rydberg) {
    throw ValidationError("block_tridiagonal: basis must be ground_rydberg");
  }
  if (basis->atoms() != sample.size()) {
    throw ValidationError("block_tridiagonal: basis and sample atom counts differ");
  }
  SparseHamiltonian h{basis, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->dimension())), {}};
  for (std::size_t i = 0; i < basis->dimension(); ++i) {
    h.diagonal[static_cast<Eigen::Index>(i)] =
        rydberg_energy(*basis, i, sample.pair_shifts, sample.detunings);
    for (int m = 0; m < basis->atoms(); ++m) {
      if (basis->level(i, m) != AtomLevel::g0) continue;
      if (auto j = basis->with_level(i, m, AtomLevel::ryd)) {
        h.couplings.push_back({*j, i, cplx(0.5 * sample.alphas[m])});
      }
    }
  }
  return h.to_dense();
}

enum class CouplingConvention {
  matrix_element,  // first row/column holds α_m; dressed eigenvalues ±ᾱ_N
  rabi,            // first row/column holds α_m/2; P_0̄ oscillates at ᾱ_N
};

// (N+1)-dimensional Hamiltonian of a perfectly blockaded ensemble over
// {|0̄>, |1_1>, ..., |1_N>}: couplings in the first row and column,
// diagonal (0, δ_1, ..., δ_N).
inline HermitianOperator blockaded_hamiltonian(
    std::span<const double> alphas, std::span<const double> deltas,
    CouplingConvention convention = CouplingConvention::matrix_element) {
  if (alphas.size() != deltas.size()) {
    throw ValidationError("blockaded_hamiltonian: alphas and deltas differ in length");
  }
  const int n = static_cast<int>(alphas.size());
  const double scale = convention == CouplingConvention::rabi ? 0.5 : 1.0;
  HermitianOperator h{build_basis(n, BasisMode::ground_rydberg, 1),
                      Eigen::MatrixXcd::Zero(n + 1, n + 1)};
  for (int m = 0; m < n; ++m) {
    h.entries(0, m + 1) = h.entries(m + 1, 0) = scale * alphas[m];
    h.entries(m + 1, m + 1) = deltas[m];
  }
  return h;
}

enum class Transition { zero_ryd, one_ryd };

struct DriveSpec {
  Transition transition = Transition::zero_ryd;
  double phase = 0.0;
  double detuning = 0.0;  // added to every Rydberg atom of the driven range
  SiteRange driven{0, -1};        // count < 0: all atoms
  bool doppler = true;            // include sample Doppler shifts on ryd atoms
  const std::vector<bool>* lost = nullptr;            // lost atoms are inert
  const Eigen::MatrixXd* pair_shifts = nullptr;       // overrides sample shifts
};

// Sparse drive Hamiltonian on a three-level basis. The addressed transition
// couples g0<->ryd (or g1<->ryd) on each driven atom with (α_m/2)e^{iφ}.
inline SparseHamiltonian drive_terms(const BasisPtr& basis, const EnsembleSample& sample,
                                     const DriveSpec& spec) {
  if (basis->mode() != BasisMode::three_level) {
    throw ValidationError("drive_hamiltonian: basis must be three_level");
  }
  if (basis->atoms() != sample.size()) {
    throw ValidationError("drive_hamiltonian: basis and sample atom counts differ");
  }
  const int n = basis->atoms();
  const int first = spec.driven.count < 0 ? 0 : spec.driven.first;
  const int last = spec.driven.count < 0 ? n : spec.driven.first + spec.driven.count;
  std::vector<double> ryd_detuning(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    if (spec.doppler) ryd_detuning[k] += sample.detunings[k];
    if (k >= first && k < last) ryd_detuning[k] += spec.detuning;
  }
  const auto& shifts = spec.pair_shifts ? *spec.pair_shifts : sample.pair_shifts;
  const auto& alpha = spec.transition == Transition::zero_ryd ? sample.alphas : sample.alphas_one;
  const AtomLevel ground = spec.transition == Transition::zero_ryd ? AtomLevel::g0 : AtomLevel::g1;
  const cplx phase = std::polar(1.0, spec.phase);

  SparseHamiltonian h{basis, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->dimension())), {}};
  for (std::size_t i = 0; i < basis->dimension(); ++i) {
    h.diagonal[static_cast<Eigen::Index>(i)] = rydberg_energy(*basis, i, shifts, ryd_detuning, spec.lost);
    for (int m = first; m < last; ++m) {
      if (basis->level(i, m) != ground) continue;
      if (spec.lost && (*spec.lost)[m]) continue;
      if (alpha[m] == 0.0) continue;
      if (auto j = basis->with_level(i, m, AtomLevel::ryd)) {
        h.couplings.push_back({*j, i, 0.5 * alpha[m] * phase});
      }
    }
  }
  return h;
}

inline HermitianOperator drive_hamiltonian(const BasisPtr& basis, const EnsembleSample& sample,
                                           Transition transition, double phase, double detuning) {
  DriveSpec spec;
  spec.transition = transition;
  spec.phase = phase;
  spec.detuning = detuning;
  return drive_terms(basis, sample, spec).to_dense();
}

struct DressedProjection {
  double p_minus = 0.0;  // |<-|-⁽⁰⁾>|² for the best-matching eigenvector
  double p_plus = 0.0;   // same for |+⁽⁰⁾>
  double p_perp = 0.0;   // weight of |-⁽⁰⁾> on the remaining eigenvectors
  bool ambiguous = false;
  std::vector<double> candidates;  // tied overlaps, reported when ambiguous
};

// Projection of the homogeneous dressed state |-⁽⁰⁾> = (|0̄> - |1̄>)/√2 onto
// the eigenvectors of the inhomogeneous blockaded Hamiltonian built from the
// sample's couplings and Doppler detunings (Rabi convention).
inline DressedProjection dressed_projection(const EnsembleSample& sample, double tie_tolerance = 1e-9) {
  const int n = sample.size();
  if (n < 1) throw ValidationError("dressed_projection: empty sample");
  const auto h = blockaded_hamiltonian(sample.alphas, sample.detunings, CouplingConvention::rabi);
  const auto es = eigensystem(h);
  Eigen::VectorXcd minus0 = Eigen::VectorXcd::Constant(n + 1, -1.0 / std::sqrt(2.0 * n));
  minus0[0] = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd plus0 = -minus0;
  plus0[0] = minus0[0];

  const Eigen::VectorXd ov_minus = (es.vectors.adjoint() * minus0).cwiseAbs2();
  const Eigen::VectorXd ov_plus = (es.vectors.adjoint() * plus0).cwiseAbs2();
  Eigen::Index im = 0;
  Eigen::Index ip = 0;
  ov_minus.maxCoeff(&im);
  ov_plus.maxCoeff(&ip);

  DressedProjection out;
  out.p_minus = ov_minus[im];
  out.p_plus = ov_plus[ip];
  for (Eigen::Index j = 0; j < ov_minus.size(); ++j) {
    if (j != im && std::abs(ov_minus[j] - ov_minus[im]) <= tie_tolerance) {
      out.ambiguous = true;
      out.candidates.push_back(ov_minus[j]);
    }
  }
  if (out.ambiguous) out.candidates.push_back(ov_minus[im]);
  if (ip == im) {
    // The |+> partner coincides with |->: only one eigenvector is excluded.
    out.ambiguous = true;
  }
  double perp = 0.0;
  for (Eigen::Index j = 0; j < ov_minus.size(); ++j) {
    if (j != im && j != ip) perp += ov_minus[j];
  }
  out.p_perp = perp;
  return out;
}

}  // namespace ensq
