#include "betamix/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace betamix::kernels {

namespace {

struct FeatureShape {
  int n_blocks;
  int pool_size;
};

FeatureShape feature_shape(const MethylationMatrix& m, ModelVariant variant) {
  const int N = static_cast<int>(m.n_patients());
  const int R = static_cast<int>(m.n_samples());
  switch (variant) {
    case ModelVariant::KDotDot: return {1, N * R};
    case ModelVariant::KNDot: return {N, R};
    case ModelVariant::KDotR: return {R, N};
  }
  return {1, N * R};
}

// Fills rows [begin, end) of the feature matrix.
void fill_feature_rows(const MethylationMatrix& m, ModelVariant variant, FeatureMatrix& fm,
                       std::size_t begin, std::size_t end) {
  const std::size_t N = m.n_patients();
  const std::size_t R = m.n_samples();
  const int B = fm.n_blocks;
  for (std::size_t c = begin; c < end; ++c) {
    double* row = fm.f.data() + c * 2 * B;
    for (int i = 0; i < 2 * B; ++i) row[i] = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t n = 0; n < N; ++n) {
        int b = 0;
        if (variant == ModelVariant::KNDot) b = static_cast<int>(n);
        else if (variant == ModelVariant::KDotR) b = static_cast<int>(r);
        const double x = m.value(c, n, r);
        row[2 * b] += std::log(x);
        row[2 * b + 1] += std::log1p(-x);
      }
    }
  }
}

// log-sum-exp over the K cluster weights of one row; optionally normalizes
// the exponentials into resp_row.
double row_posterior(std::span<const double> feat, const ClusterCoefficients& cc,
                     double* resp_row, double* scratch) {
  const int K = cc.K;
  const int w = 2 * cc.n_blocks;
  double lmax = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double* coef = cc.coef.data() + static_cast<std::size_t>(k) * w;
    double l = cc.constant[k];
    for (int i = 0; i < w; ++i) l += coef[i] * feat[i];
    scratch[k] = l;
    if (l > lmax) lmax = l;
  }
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    scratch[k] = std::exp(scratch[k] - lmax);
    sum += scratch[k];
  }
  if (!(sum > 0.0))
    throw std::logic_error("posterior pass: all components underflowed after max shift");
  if (resp_row) {
    const double inv = 1.0 / sum;
    for (int k = 0; k < K; ++k) resp_row[k] = scratch[k] * inv;
  }
  return lmax + std::log(sum);
}

std::size_t chunk_count(std::size_t C) { return (C + kChunk - 1) / kChunk; }

}  // namespace

int resolve_threads(int n_threads) {
  return n_threads > 0 ? n_threads : omp_get_max_threads();
}

FeatureMatrix build_features_serial(const MethylationMatrix& m, ModelVariant variant) {
  const auto [B, pool] = feature_shape(m, variant);
  FeatureMatrix fm{m.n_sites(), B, pool, {}};
  fm.f.resize(m.n_sites() * 2 * B);
  fill_feature_rows(m, variant, fm, 0, m.n_sites());
  return fm;
}

FeatureMatrix build_features(const MethylationMatrix& m, ModelVariant variant, int n_threads) {
  const auto [B, pool] = feature_shape(m, variant);
  FeatureMatrix fm{m.n_sites(), B, pool, {}};
  fm.f.resize(m.n_sites() * 2 * B);
  const std::size_t C = m.n_sites();
  const std::size_t nchunks = chunk_count(C);
  const int nt = resolve_threads(n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    const std::size_t begin = ch * kChunk;
    const std::size_t end = std::min(begin + kChunk, C);
    fill_feature_rows(m, variant, fm, begin, end);
  }
  return fm;
}

ClusterCoefficients digest_parameters(std::span<const double> tau, const ShapeParams& shapes) {
  const int K = shapes.K();
  const int B = shapes.blocks_per_cluster();
  if (static_cast<int>(tau.size()) != K)
    throw std::invalid_argument("digest_parameters: tau size does not match K");
  ClusterCoefficients cc{K, B, {}, {}};
  cc.coef.resize(static_cast<std::size_t>(K) * 2 * B);
  cc.constant.resize(K);
  for (int k = 0; k < K; ++k) {
    double log_norm = 0.0;
    for (int b = 0; b < B; ++b) {
      const ShapePair& s = shapes.block(k, b);
      cc.coef[(static_cast<std::size_t>(k) * B + b) * 2] = s.alpha - 1.0;
      cc.coef[(static_cast<std::size_t>(k) * B + b) * 2 + 1] = s.delta - 1.0;
      log_norm += log_beta_fn(s.alpha, s.delta);
    }
    cc.constant[k] = std::log(tau[k]) - shapes.pool_size() * log_norm;
  }
  return cc;
}

double posterior_pass_serial(const FeatureMatrix& fm, const ClusterCoefficients& cc,
                             std::span<double> resp) {
  const std::size_t C = fm.C;
  const int K = cc.K;
  if (!resp.empty() && resp.size() != C * static_cast<std::size_t>(K))
    throw std::invalid_argument("posterior_pass: responsibility buffer has wrong size");
  std::vector<double> scratch(K);
  double loglik = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    double* out = resp.empty() ? nullptr : resp.data() + c * K;
    loglik += row_posterior(fm.row(c), cc, out, scratch.data());
  }
  return loglik;
}

double posterior_pass(const FeatureMatrix& fm, const ClusterCoefficients& cc,
                      std::span<double> resp, int n_threads) {
  const std::size_t C = fm.C;
  const int K = cc.K;
  if (!resp.empty() && resp.size() != C * static_cast<std::size_t>(K))
    throw std::invalid_argument("posterior_pass: responsibility buffer has wrong size");
  const std::size_t nchunks = chunk_count(C);
  std::vector<double> partial(nchunks, 0.0);
  const int nt = resolve_threads(n_threads);
#pragma omp parallel num_threads(nt)
  {
    std::vector<double> scratch(K);
#pragma omp for schedule(static)
    for (std::size_t ch = 0; ch < nchunks; ++ch) {
      const std::size_t begin = ch * kChunk;
      const std::size_t end = std::min(begin + kChunk, C);
      double acc = 0.0;
      for (std::size_t c = begin; c < end; ++c) {
        double* out = resp.empty() ? nullptr : resp.data() + c * K;
        acc += row_posterior(fm.row(c), cc, out, scratch.data());
      }
      partial[ch] = acc;
    }
  }
  double loglik = 0.0;
  for (double p : partial) loglik += p;  // fixed chunk order
  return loglik;
}

StatsAccumulation stats_pass_serial(const FeatureMatrix& fm, std::span<const double> resp,
                                    int K) {
  const std::size_t C = fm.C;
  const int B = fm.n_blocks;
  StatsAccumulation st{K, B, {}, {}, {}};
  st.s1.assign(static_cast<std::size_t>(K) * B, 0.0);
  st.s2.assign(static_cast<std::size_t>(K) * B, 0.0);
  st.weight.assign(K, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    const double* f = fm.f.data() + c * 2 * B;
    const double* z = resp.data() + c * K;
    for (int k = 0; k < K; ++k) {
      st.weight[k] += z[k];
      for (int b = 0; b < B; ++b) {
        st.s1[static_cast<std::size_t>(k) * B + b] += z[k] * f[2 * b];
        st.s2[static_cast<std::size_t>(k) * B + b] += z[k] * f[2 * b + 1];
      }
    }
  }
  return st;
}

StatsAccumulation stats_pass(const FeatureMatrix& fm, std::span<const double> resp, int K,
                             int n_threads) {
  const std::size_t C = fm.C;
  const int B = fm.n_blocks;
  const std::size_t nchunks = chunk_count(C);
  // Per-chunk partials: [weight(K) | s1(K*B) | s2(K*B)].
  const std::size_t slots = static_cast<std::size_t>(K) * (1 + 2 * B);
  std::vector<double> partial(nchunks * slots, 0.0);
  const int nt = resolve_threads(n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    const std::size_t begin = ch * kChunk;
    const std::size_t end = std::min(begin + kChunk, C);
    double* p = partial.data() + ch * slots;
    for (std::size_t c = begin; c < end; ++c) {
      const double* f = fm.f.data() + c * 2 * B;
      const double* z = resp.data() + c * K;
      for (int k = 0; k < K; ++k) {
        p[k] += z[k];
        double* s1 = p + K + static_cast<std::size_t>(k) * B;
        double* s2 = p + K + static_cast<std::size_t>(K) * B + static_cast<std::size_t>(k) * B;
        for (int b = 0; b < B; ++b) {
          s1[b] += z[k] * f[2 * b];
          s2[b] += z[k] * f[2 * b + 1];
        }
      }
    }
  }
  StatsAccumulation st{K, B, {}, {}, {}};
  st.s1.assign(static_cast<std::size_t>(K) * B, 0.0);
  st.s2.assign(static_cast<std::size_t>(K) * B, 0.0);
  st.weight.assign(K, 0.0);
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    const double* p = partial.data() + ch * slots;
    for (int k = 0; k < K; ++k) st.weight[k] += p[k];
    for (std::size_t i = 0; i < static_cast<std::size_t>(K) * B; ++i) {
      st.s1[i] += p[K + i];
      st.s2[i] += p[K + static_cast<std::size_t>(K) * B + i];
    }
  }
  return st;
}

std::vector<double> column_means_serial(std::span<const double> resp, std::size_t C, int K) {
  std::vector<double> mean(K, 0.0);
  for (std::size_t c = 0; c < C; ++c)
    for (int k = 0; k < K; ++k) mean[k] += resp[c * K + k];
  for (int k = 0; k < K; ++k) mean[k] /= static_cast<double>(C);
  return mean;
}

std::vector<double> column_means(std::span<const double> resp, std::size_t C, int K,
                                 int n_threads) {
  const std::size_t nchunks = chunk_count(C);
  std::vector<double> partial(nchunks * K, 0.0);
  const int nt = resolve_threads(n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    const std::size_t begin = ch * kChunk;
    const std::size_t end = std::min(begin + kChunk, C);
    double* p = partial.data() + ch * K;
    for (std::size_t c = begin; c < end; ++c)
      for (int k = 0; k < K; ++k) p[k] += resp[c * K + k];
  }
  std::vector<double> mean(K, 0.0);
  for (std::size_t ch = 0; ch < nchunks; ++ch)
    for (int k = 0; k < K; ++k) mean[k] += partial[ch * K + k];
  for (int k = 0; k < K; ++k) mean[k] /= static_cast<double>(C);
  return mean;
}

}  // namespace betamix::kernels
