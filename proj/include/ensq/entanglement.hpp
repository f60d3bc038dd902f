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

// Bounds on (P̄0, P̄1) for states with at most k-partite entanglement, and
// certification of the entangled fraction from a measured pair.
//
// A k-partite state is a product of m = ⌈N/k⌉ blocks of sizes k, ..., k,
// N-(m-1)k. Only the components of each block on |0̄> and on the block's
// symmetric single excitation |1̄> enter the overlaps, so a block is
// described by amplitudes (a, b, c): a on |0̄>, b on |1̄>, and c on all other
// kets (multiple excitations included), |a|²+|b|²+|c|² = 1.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "ensq/common.hpp"

namespace ensq {

struct BlockAmplitudes {
  cplx a;
  cplx b;
  cplx c;  // weight outside span{|0̄>, |1̄>}
};

struct KPartiteState {
  int atoms = 0;
  std::vector<int> sizes;
  std::vector<BlockAmplitudes> blocks;
};

inline std::vector<int> block_sizes(int n, int k) {
  if (!(k >= 1 && k <= n)) throw ValidationError("block_sizes: need 1 <= k <= N");
  const int m = (n + k - 1) / k;
  std::vector<int> sizes(static_cast<std::size_t>(m), k);
  sizes.back() = n - (m - 1) * k;
  return sizes;
}

// Each block is a|0̄> + b|1̄> with cos θ uniform on [-1, 1], a = sin(θ/2),
// b = cos(θ/2) e^{iφ}, φ uniform.
inline KPartiteState random_kpartite_state(int n, int k, Rng& rng) {
  KPartiteState s;
  s.atoms = n;
  s.sizes = block_sizes(n, k);
  for (std::size_t i = 0; i < s.sizes.size(); ++i) {
    const double cos_theta = 2.0 * uniform01(rng) - 1.0;
    const double theta = std::acos(cos_theta);
    const double phi = kTwoPi * uniform01(rng);
    s.blocks.push_back({std::sin(0.5 * theta), std::polar(std::cos(0.5 * theta), phi), 0.0});
  }
  return s;
}

// Haar-random unit vector (a, b, c) per block.
inline KPartiteState random_general_kpartite_state(int n, int k, Rng& rng) {
  KPartiteState s;
  s.atoms = n;
  s.sizes = block_sizes(n, k);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < s.sizes.size(); ++i) {
    BlockAmplitudes b{{g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}};
    const double norm = std::sqrt(std::norm(b.a) + std::norm(b.b) + std::norm(b.c));
    b.a /= norm;
    b.b /= norm;
    b.c /= norm;
    s.blocks.push_back(b);
  }
  return s;
}

struct OverlapPair {
  double p0 = 0.0;
  double p1 = 0.0;
};

// ⟨0̄|ψ⟩ = Π a_i,  ⟨1̄|ψ⟩ = Σ_i √(k_i/N) b_i Π_{j≠i} a_j.
inline OverlapPair block_overlaps(const KPartiteState& s) {
  if (s.sizes.size() != s.blocks.size()) throw ValidationError("block_overlaps: malformed descriptor");
  const std::size_t m = s.blocks.size();
  // prefix/suffix products avoid dividing by vanishing a_i
  std::vector<cplx> prefix(m + 1, 1.0), suffix(m + 1, 1.0);
  for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] * s.blocks[i].a;
  for (std::size_t i = m; i-- > 0;) suffix[i] = suffix[i + 1] * s.blocks[i].a;
  cplx one = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    one += std::sqrt(static_cast<double>(s.sizes[i]) / s.atoms) * s.blocks[i].b * prefix[i] * suffix[i + 1];
  }
  return {std::norm(prefix[m]), std::norm(one)};
}

inline double blockaded_threshold(int n, int k, double p0) {
  if (!(k >= 1 && k <= n)) throw ValidationError("blockaded_threshold: need 1 <= k <= N");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ValidationError("blockaded_threshold: P0 outside [0,1]");
  return static_cast<double>(k) / n * (1.0 - p0);
}

struct ThresholdCurve {
  int atoms = 0;
  int k = 0;
  std::vector<double> edges;   // bins + 1 edges over P̄0 in [0, 1]
  std::vector<double> max_p1;  // NaN in empty bins
  std::vector<std::size_t> counts;
  std::size_t samples = 0;

  std::size_t bins() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  bool empty(std::size_t i) const { return counts[i] == 0; }
  std::size_t bin_of(double p0) const {
    const auto b = static_cast<std::size_t>(std::floor(std::clamp(p0, 0.0, 1.0) * bins()));
    return std::min(b, bins() - 1);
  }
};

enum class ThresholdSampler {
  general,    // every block carries (a, b, c); no blockade assumption
  blockaded,  // (a|0̄^(k)> + b|1̄^(k)>) ⊗ |0̄^(N-k)>
};

struct ThresholdOptions {
  std::size_t samples = 100000;
  std::size_t bins = 50;
  ThresholdSampler sampler = ThresholdSampler::general;
  int refine_steps = 200;  // hill-climb moves per bin after sampling
  std::uint64_t seed = 1;
  int threads = 1;
};

namespace detail {

inline KPartiteState blockaded_descriptor(int n, int k, Rng& rng) {
  KPartiteState s;
  s.atoms = n;
  s.sizes = {k};
  const double cos_theta = 2.0 * uniform01(rng) - 1.0;
  const double theta = std::acos(cos_theta);
  s.blocks.push_back({std::sin(0.5 * theta), std::polar(std::cos(0.5 * theta), kTwoPi * uniform01(rng)), 0.0});
  if (n > k) {
    s.sizes.push_back(n - k);
    s.blocks.push_back({1.0, 0.0, 0.0});
  }
  return s;
}

inline KPartiteState perturb(const KPartiteState& s, double step, ThresholdSampler sampler, Rng& rng) {
  std::normal_distribution<double> g(0.0, step);
  KPartiteState out = s;
  const std::size_t free_blocks = sampler == ThresholdSampler::blockaded ? 1 : out.blocks.size();
  for (std::size_t i = 0; i < free_blocks; ++i) {
    auto& b = out.blocks[i];
    b.a += cplx(g(rng), g(rng));
    b.b += cplx(g(rng), g(rng));
    if (sampler == ThresholdSampler::general) b.c += cplx(g(rng), g(rng));
    const double norm = std::sqrt(std::norm(b.a) + std::norm(b.b) + std::norm(b.c));
    b.a /= norm;
    b.b /= norm;
    b.c /= norm;
  }
  return out;
}

}  // namespace detail

// Upper envelope of P̄1 per P̄0 bin over random k-partite descriptors,
// followed by a per-bin hill climb from the best descriptor found.
inline ThresholdCurve numerical_threshold(int n, int k, const ThresholdOptions& opt = {}) {
  if (!(k >= 1 && k <= n)) throw ValidationError("numerical_threshold: need 1 <= k <= N");
  if (opt.bins == 0) throw ValidationError("numerical_threshold: zero bins");
  ThresholdCurve curve;
  curve.atoms = n;
  curve.k = k;
  curve.samples = opt.samples;
  for (std::size_t i = 0; i <= opt.bins; ++i) curve.edges.push_back(static_cast<double>(i) / opt.bins);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  struct Partial {
    std::vector<double> best;
    std::vector<std::size_t> counts;
    std::vector<KPartiteState> arg;
  };
  const int n_threads = std::max(1, opt.threads);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (opt.samples + kChunk - 1) / kChunk;
  std::vector<Partial> partials(chunks);
  auto run_chunk = [&](std::size_t c) {
    Partial& p = partials[c];
    p.best.assign(opt.bins, -1.0);
    p.counts.assign(opt.bins, 0);
    p.arg.resize(opt.bins);
    Rng rng = trial_rng(opt.seed, c);
    const std::size_t end = std::min(opt.samples, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      // The general family alternates Haar draws with c = 0 draws; the latter
      // reach the high-P̄0 bins that Haar draws over many blocks rarely hit.
      const auto s = opt.sampler == ThresholdSampler::blockaded ? detail::blockaded_descriptor(n, k, rng)
                     : t % 2                                    ? random_kpartite_state(n, k, rng)
                                                                : random_general_kpartite_state(n, k, rng);
      const auto o = block_overlaps(s);
      const std::size_t b = curve.bin_of(o.p0);
      ++p.counts[b];
      if (o.p1 > p.best[b]) {
        p.best[b] = o.p1;
        p.arg[b] = s;
      }
    }
  };
  if (n_threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chunks;) run_chunk(c);
      });
  }
  // Chunk-ordered reduction; ties keep the earliest chunk.
  std::vector<double> best(opt.bins, -1.0);
  std::vector<KPartiteState> arg(opt.bins);
  curve.counts.assign(opt.bins, 0);
  for (const auto& p : partials) {
    for (std::size_t b = 0; b < opt.bins; ++b) {
      curve.counts[b] += p.counts[b];
      if (p.best[b] > best[b]) {
        best[b] = p.best[b];
        arg[b] = p.arg[b];
      }
    }
  }
  for (std::size_t b = 0; b < opt.bins; ++b) {
    if (curve.counts[b] == 0 || opt.refine_steps <= 0) continue;
    Rng rng = trial_rng(opt.seed, b, 1);
    double step = 0.1;
    for (int it = 0; it < opt.refine_steps; ++it) {
      const auto s = detail::perturb(arg[b], step, opt.sampler, rng);
      const auto o = block_overlaps(s);
      if (curve.bin_of(o.p0) == b && o.p1 > best[b]) {
        best[b] = o.p1;
        arg[b] = s;
      } else {
        step = std::max(step * 0.97, 1e-4);
      }
    }
  }
  curve.max_p1.resize(opt.bins);
  for (std::size_t b = 0; b < opt.bins; ++b) curve.max_p1[b] = curve.counts[b] ? std::min(best[b], 1.0) : nan;
  return curve;
}

struct CertificationResult {
  double fraction = 0.0;
  double stderr_ = 0.0;
  std::vector<bool> analytic_met;   // index k-1: P̄1 above the blockaded k-bound
  std::vector<bool> numerical_met;  // per supplied curve, in order
};

// k/N <= P̄1/(1 - P̄0), error by first-order propagation. With atoms > 0 the
// point is compared against every analytic k-bound, k = 1..atoms.
inline CertificationResult certify_fraction(double p0, double s0, double p1, double s1, int atoms = 0,
                                            const std::vector<ThresholdCurve>& curves = {}) {
  if (!(p0 < 1.0)) throw NumericalError("certify_fraction: undefined fraction for P0 >= 1");
  if (!(s0 >= 0 && s1 >= 0)) throw ValidationError("certify_fraction: negative uncertainty");
  CertificationResult r;
  const double q = 1.0 - p0;
  r.fraction = std::clamp(p1 / q, 0.0, 1.0);
  r.stderr_ = std::hypot(s1 / q, p1 * s0 / (q * q));
  for (int k = 1; k <= atoms; ++k) r.analytic_met.push_back(p1 > blockaded_threshold(atoms, k, std::clamp(p0, 0.0, 1.0)));
  for (const auto& c : curves) {
    const double bound = c.max_p1[c.bin_of(p0)];
    r.numerical_met.push_back(!std::isnan(bound) && p1 > bound);
  }
  return r;
}

// Spread of P̄1/(1 - P̄0) under Gaussian resampling of the inputs; draws with
// P̄0 >= 1 are discarded.
inline double certify_bootstrap_stderr(double p0, double s0, double p1, double s1, std::size_t draws,
                                       std::uint64_t seed) {
  Rng rng = trial_rng(seed, 0, 2);
  std::normal_distribution<double> g(0.0, 1.0);
  double sum = 0.0, sq = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double a = p0 + s0 * g(rng);
    const double b = p1 + s1 * g(rng);
    if (a >= 1.0) continue;
    const double f = b / (1.0 - a);
    sum += f;
    sq += f * f;
    ++used;
  }
  if (used < 2) throw NumericalError("certify_bootstrap_stderr: too few usable draws");
  const double mean = sum / used;
  return std::sqrt(std::max(0.0, (sq - used * mean * mean) / (used - 1)));
}

}  // namespace ensq
