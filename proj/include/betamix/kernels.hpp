#pragma once

#include <span>
#include <vector>

#include "betamix/model.hpp"

// Data-parallel inner loops of the EM engine. Every kernel comes in two
// flavours: a plain serial reference (`*_serial`) and an OpenMP version.
// The parallel versions reduce over fixed-size row chunks combined in chunk
// order, so their results are bit-identical for any thread count; the serial
// reference accumulates in natural row order and is kept for testing and as
// the baseline of the kernel benchmark.
namespace betamix::kernels {

inline constexpr std::size_t kChunk = 4096;

int resolve_threads(int n_threads);

// Pooled per-row log features for one model variant. Block b of row c holds
//   f[c, 2b]   = sum of log(x)   over the columns tied to block b
//   f[c, 2b+1] = sum of log(1-x) over the same columns
// so a cluster's log density is an inner product against (alpha-1, delta-1).
struct FeatureMatrix {
  std::size_t C = 0;
  int n_blocks = 1;   // per-cluster parameter blocks: 1 (K..), N (KN.), R (K.R)
  int pool_size = 1;  // data columns pooled into each block
  std::vector<double> f;  // C x 2*n_blocks, row-major

  std::span<const double> row(std::size_t c) const {
    return {f.data() + c * 2 * n_blocks, static_cast<std::size_t>(2 * n_blocks)};
  }
};

FeatureMatrix build_features_serial(const MethylationMatrix& m, ModelVariant variant);
FeatureMatrix build_features(const MethylationMatrix& m, ModelVariant variant, int n_threads);

// Per-cluster inner-product form of (tau, shapes):
//   log tau_k * prod Beta(...) = constant[k] + dot(feature row, coef[k]).
struct ClusterCoefficients {
  int K = 0;
  int n_blocks = 1;
  std::vector<double> coef;      // K x 2*n_blocks
  std::vector<double> constant;  // K

  std::span<const double> cluster(int k) const {
    return {coef.data() + static_cast<std::size_t>(k) * 2 * n_blocks,
            static_cast<std::size_t>(2 * n_blocks)};
  }
};

ClusterCoefficients digest_parameters(std::span<const double> tau, const ShapeParams& shapes);

// E-step + observed-data log-likelihood in one pass. Writes the posterior
// row (log-sum-exp with max shift) into `resp` (C x K row-major) unless it
// is empty, and returns the log-likelihood.
double posterior_pass_serial(const FeatureMatrix& fm, const ClusterCoefficients& cc,
                             std::span<double> resp);
double posterior_pass(const FeatureMatrix& fm, const ClusterCoefficients& cc,
                      std::span<double> resp, int n_threads);

// Weighted per-block sufficient sums:
//   s1[k,b] = sum_c resp[c,k] * f[c,2b],  s2 likewise for log(1-x),
//   weight[k] = sum_c resp[c,k].
struct StatsAccumulation {
  int K = 0;
  int n_blocks = 1;
  std::vector<double> s1, s2;   // K x n_blocks
  std::vector<double> weight;   // K
};

StatsAccumulation stats_pass_serial(const FeatureMatrix& fm, std::span<const double> resp, int K);
StatsAccumulation stats_pass(const FeatureMatrix& fm, std::span<const double> resp, int K,
                             int n_threads);

// Column means of the responsibility matrix (the tau update).
std::vector<double> column_means_serial(std::span<const double> resp, std::size_t C, int K);
std::vector<double> column_means(std::span<const double> resp, std::size_t C, int K,
                                 int n_threads);

}  // namespace betamix::kernels
