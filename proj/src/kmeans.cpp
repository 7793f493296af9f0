#include "betamix/kmeans.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "betamix/kernels.hpp"
#include "betamix/rng.hpp"

namespace betamix {

namespace {

double dist2(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// Row-major copy of the matrix; k-means walks rows, the matrix stores columns.
std::vector<double> to_rows(const MethylationMatrix& m) {
  const std::size_t C = m.n_sites(), N = m.n_patients(), R = m.n_samples();
  std::vector<double> rows(C * N * R);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t n = 0; n < N; ++n) {
      const auto col = m.column(n, r);
      const std::size_t j = r * N + n;
      for (std::size_t c = 0; c < C; ++c) rows[c * N * R + j] = col[c];
    }
  return rows;
}

}  // namespace

InitAssignment kmeans_init(const MethylationMatrix& matrix, int K, std::uint64_t seed,
                           int n_threads) {
  const std::size_t C = matrix.n_sites();
  const std::size_t D = matrix.n_columns();
  if (K < 1) throw std::invalid_argument("kmeans_init: K must be >= 1");
  if (C < static_cast<std::size_t>(K))
    throw std::invalid_argument("kmeans_init: fewer sites than clusters");

  const std::vector<double> rows = to_rows(matrix);
  const int nt = kernels::resolve_threads(n_threads);
  RngStream rng(seed, 0x6b6d6561u /* stream tag */);

  // Greedy k-means++ seeding: D^2-sample a few candidates per step and keep
  // the one that minimizes the resulting potential.
  const int n_candidates = 2 + static_cast<int>(std::log(static_cast<double>(K)));
  std::vector<double> centroids(static_cast<std::size_t>(K) * D);
  std::vector<double> d2(C, std::numeric_limits<double>::infinity());
  std::vector<double> cand_d2(C);
  const std::size_t first = rng.next_below(C);
  std::copy_n(rows.data() + first * D, D, centroids.data());
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t c = 0; c < C; ++c) d2[c] = dist2(rows.data() + c * D, centroids.data(), D);

  for (int k = 1; k < K; ++k) {
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) total += d2[c];  // serial: reduction order is fixed

    std::size_t best_pick = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    std::vector<double> best_d2(C);
    for (int cand = 0; cand < n_candidates; ++cand) {
      std::size_t pick;
      if (total > 0.0) {
        const double target = rng.next_unit() * total;
        double acc = 0.0;
        pick = C - 1;
        for (std::size_t c = 0; c < C; ++c) {
          acc += d2[c];
          if (acc >= target) { pick = c; break; }
        }
      } else {
        pick = rng.next_below(C);  // all points coincide
      }
      const double* cen = rows.data() + pick * D;
      double potential = 0.0;
      const std::size_t nchunks = (C + kernels::kChunk - 1) / kernels::kChunk;
      std::vector<double> partial(nchunks, 0.0);
#pragma omp parallel for schedule(static) num_threads(nt)
      for (std::size_t ch = 0; ch < nchunks; ++ch) {
        const std::size_t begin = ch * kernels::kChunk;
        const std::size_t end = std::min(begin + kernels::kChunk, C);
        double acc = 0.0;
        for (std::size_t c = begin; c < end; ++c) {
          cand_d2[c] = std::min(d2[c], dist2(rows.data() + c * D, cen, D));
          acc += cand_d2[c];
        }
        partial[ch] = acc;
      }
      for (double p : partial) potential += p;
      if (potential < best_potential) {
        best_potential = potential;
        best_pick = pick;
        best_d2.swap(cand_d2);
      }
    }
    std::copy_n(rows.data() + best_pick * D, D,
                centroids.data() + static_cast<std::size_t>(k) * D);
    d2.swap(best_d2);
  }

  std::vector<int> labels(C, 0);
  std::vector<std::size_t> counts(K, 0);
  std::vector<double> nearest(C, 0.0);
  const std::size_t nchunks = (C + kernels::kChunk - 1) / kernels::kChunk;
  // Per-chunk partial sums and counts, combined in chunk order.
  std::vector<double> psum(nchunks * K * D);
  std::vector<std::size_t> pcount(nchunks * K);

  int reseed_budget = 10;
  for (int iter = 0; iter < 50; ++iter) {
    std::fill(psum.begin(), psum.end(), 0.0);
    std::fill(pcount.begin(), pcount.end(), 0);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::size_t ch = 0; ch < nchunks; ++ch) {
      const std::size_t begin = ch * kernels::kChunk;
      const std::size_t end = std::min(begin + kernels::kChunk, C);
      double* sum = psum.data() + ch * K * D;
      std::size_t* cnt = pcount.data() + ch * K;
      for (std::size_t c = begin; c < end; ++c) {
        const double* row = rows.data() + c * D;
        int best = 0;
        double bestd = dist2(row, centroids.data(), D);
        for (int k = 1; k < K; ++k) {
          const double d = dist2(row, centroids.data() + static_cast<std::size_t>(k) * D, D);
          if (d < bestd) { bestd = d; best = k; }
        }
        labels[c] = best;
        nearest[c] = bestd;
        ++cnt[best];
        double* target = sum + static_cast<std::size_t>(best) * D;
        for (std::size_t i = 0; i < D; ++i) target[i] += row[i];
      }
    }
    std::fill(counts.begin(), counts.end(), 0);
    std::vector<double> sums(static_cast<std::size_t>(K) * D, 0.0);
    for (std::size_t ch = 0; ch < nchunks; ++ch) {
      for (int k = 0; k < K; ++k) counts[k] += pcount[ch * K + k];
      const double* p = psum.data() + ch * K * D;
      for (std::size_t i = 0; i < static_cast<std::size_t>(K) * D; ++i) sums[i] += p[i];
    }

    bool reseeded = false;
    for (int k = 0; k < K; ++k) {
      if (counts[k] != 0) continue;
      if (reseed_budget-- <= 0)
        throw std::runtime_error("kmeans_init: could not populate every cluster");
      std::size_t far = 0;
      for (std::size_t c = 1; c < C; ++c)
        if (nearest[c] > nearest[far]) far = c;
      std::copy_n(rows.data() + far * D, D, centroids.data() + static_cast<std::size_t>(k) * D);
      reseeded = true;
    }
    if (reseeded) continue;  // re-run assignment against the repaired centroid

    double movement = 0.0;
    for (int k = 0; k < K; ++k) {
      double* cen = centroids.data() + static_cast<std::size_t>(k) * D;
      double move2 = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        const double updated = sums[static_cast<std::size_t>(k) * D + i] / counts[k];
        const double diff = updated - cen[i];
        move2 += diff * diff;
        cen[i] = updated;
      }
      movement = std::max(movement, std::sqrt(move2));
    }
    if (movement < 1e-6) break;
  }

  // Labels reflect the second-to-last centroids; one final assignment pass
  // keeps labels consistent with the returned partition.
  std::fill(counts.begin(), counts.end(), 0);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t c = 0; c < C; ++c) {
    const double* row = rows.data() + c * D;
    int best = 0;
    double bestd = dist2(row, centroids.data(), D);
    for (int k = 1; k < K; ++k) {
      const double d = dist2(row, centroids.data() + static_cast<std::size_t>(k) * D, D);
      if (d < bestd) { bestd = d; best = k; }
    }
    labels[c] = best;
  }
  for (std::size_t c = 0; c < C; ++c) ++counts[labels[c]];
  for (int k = 0; k < K; ++k)
    if (counts[k] == 0) throw std::runtime_error("kmeans_init: empty cluster after final pass");

  return {std::move(labels), std::move(counts)};
}

std::pair<std::vector<double>, ShapeParams> initial_params(const MethylationMatrix& matrix,
                                                           const InitAssignment& assignment,
                                                           const ModelSpec& spec) {
  const std::size_t C = matrix.n_sites();
  const int N = static_cast<int>(matrix.n_patients());
  const int R = static_cast<int>(matrix.n_samples());
  const int K = static_cast<int>(assignment.counts.size());
  if (assignment.labels.size() != C)
    throw std::invalid_argument("initial_params: assignment does not match matrix");

  std::vector<double> tau(K);
  for (int k = 0; k < K; ++k)
    tau[k] = static_cast<double>(assignment.counts[k]) / static_cast<double>(C);

  ShapeParams shapes(spec.variant, K, N, R);
  const int B = shapes.blocks_per_cluster();

  // Pooled sums per (cluster, block).
  std::vector<double> sum(static_cast<std::size_t>(K) * B, 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(K) * B, 0.0);
  std::vector<double> count(static_cast<std::size_t>(K) * B, 0.0);
  for (int r = 0; r < R; ++r) {
    for (int n = 0; n < N; ++n) {
      const int b = shapes.block_of(n, r);
      const auto col = matrix.column(n, r);
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t idx = static_cast<std::size_t>(assignment.labels[c]) * B + b;
        sum[idx] += col[c];
        sumsq[idx] += col[c] * col[c];
        count[idx] += 1.0;
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    for (int b = 0; b < B; ++b) {
      const std::size_t idx = static_cast<std::size_t>(k) * B + b;
      const double m = sum[idx] / count[idx];
      double var = sumsq[idx] / count[idx] - m * m;
      var = std::max(var, 1e-8);
      ShapePair s{1.01, 1.01};
      if (var < m * (1.0 - m)) {
        s = mom_estimate(m, var);
        if (s.alpha <= 0.51) s.alpha = 1.01;
        if (s.delta <= 0.51) s.delta = 1.01;
      }
      shapes.block(k, b) = s;
    }
  }
  return {std::move(tau), std::move(shapes)};
}

}  // namespace betamix
