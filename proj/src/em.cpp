#include "betamix/em.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "betamix/kmeans.hpp"

namespace betamix {

ShapePair closed_form_shape(const SufficientStats& stats) {
  if (!(stats.y1 < 0.0) || !(stats.y2 < 0.0))
    throw DegenerateStatsError("closed_form_shape: y1 and y2 must be negative");
  const double u = std::exp(stats.y1);
  const double v = std::exp(stats.y2);
  // Algebraically D/(e^{-y1} e^{-y2}) for D = (e^{-y2}-1)(e^{-y1}-1) - 1;
  // this form cannot overflow for very negative y.
  const double denom = 1.0 - u - v;
  if (!(denom > 0.0))
    throw DegenerateStatsError("closed_form_shape: degenerate statistics (D <= 0)");
  const ShapePair s{0.5 + 0.5 * u / denom, 0.5 + 0.5 * v / denom};
  if (!(s.alpha > 0.5) || !(s.delta > 0.5) || !std::isfinite(s.alpha) || !std::isfinite(s.delta))
    throw DegenerateStatsError("closed_form_shape: update left the valid shape region");
  return s;
}

ShapePair newton_shape(const SufficientStats& stats, ShapePair initial) {
  double a = initial.alpha, d = initial.delta;
  for (int iter = 0; iter < 200; ++iter) {
    const double psi_s = digamma_exact(a + d);
    const double f1 = digamma_exact(a) - psi_s - stats.y1;
    const double f2 = digamma_exact(d) - psi_s - stats.y2;
    if (std::abs(f1) < 1e-12 && std::abs(f2) < 1e-12) break;
    const double t_s = trigamma_exact(a + d);
    const double j11 = trigamma_exact(a) - t_s;
    const double j22 = trigamma_exact(d) - t_s;
    const double det = j11 * j22 - t_s * t_s;
    if (det == 0.0) throw DegenerateStatsError("newton_shape: singular Jacobian");
    double da = (-f1 * j22 - f2 * t_s) / det;
    double dd = (-f2 * j11 - f1 * t_s) / det;
    // Damp steps that would leave the positive quadrant.
    while (a + da <= 1e-8 || d + dd <= 1e-8) {
      da *= 0.5;
      dd *= 0.5;
    }
    a += da;
    d += dd;
  }
  return {a, d};
}

std::pair<double, double> score_residuals(const SufficientStats& stats, const ShapePair& shape) {
  const double den = shape.alpha + shape.delta - 0.5;
  return {stats.y1 - std::log((shape.alpha - 0.5) / den),
          stats.y2 - std::log((shape.delta - 0.5) / den)};
}

std::vector<double> e_step(const MethylationMatrix& matrix, std::span<const double> tau,
                           const ShapeParams& shapes, int n_threads) {
  const auto fm = kernels::build_features(matrix, shapes.variant(), n_threads);
  const auto cc = kernels::digest_parameters(tau, shapes);
  std::vector<double> resp(matrix.n_sites() * tau.size());
  kernels::posterior_pass(fm, cc, resp, n_threads);
  return resp;
}

std::vector<double> m_step_tau(std::span<const double> responsibilities, std::size_t C, int K,
                               int n_threads) {
  if (responsibilities.size() != C * static_cast<std::size_t>(K))
    throw std::invalid_argument("m_step_tau: responsibility size mismatch");
  return kernels::column_means(responsibilities, C, K, n_threads);
}

namespace {

std::vector<SufficientStats> stats_from_sums(const kernels::StatsAccumulation& acc,
                                             int pool_size) {
  std::vector<SufficientStats> out(static_cast<std::size_t>(acc.K) * acc.n_blocks);
  for (int k = 0; k < acc.K; ++k) {
    const double w = acc.weight[k];
    for (int b = 0; b < acc.n_blocks; ++b) {
      const std::size_t i = static_cast<std::size_t>(k) * acc.n_blocks + b;
      out[i].weight = w * pool_size;
      out[i].y1 = acc.s1[i] / out[i].weight;
      out[i].y2 = acc.s2[i] / out[i].weight;
    }
  }
  return out;
}

}  // namespace

std::vector<SufficientStats> accumulate_stats(const MethylationMatrix& matrix,
                                              std::span<const double> responsibilities,
                                              const ModelSpec& spec, int n_threads) {
  const auto fm = kernels::build_features(matrix, spec.variant, n_threads);
  if (responsibilities.size() != matrix.n_sites() * static_cast<std::size_t>(spec.K))
    throw std::invalid_argument("accumulate_stats: responsibility size mismatch");
  const auto acc = kernels::stats_pass(fm, responsibilities, spec.K, n_threads);
  for (int k = 0; k < spec.K; ++k)
    if (acc.weight[k] * fm.pool_size < 1e-10)
      throw DegenerateStatsError("accumulate_stats: cluster " + std::to_string(k + 1) +
                                 " is empty");
  return stats_from_sums(acc, fm.pool_size);
}

double loglik(const MethylationMatrix& matrix, std::span<const double> tau,
              const ShapeParams& shapes, int n_threads) {
  const auto fm = kernels::build_features(matrix, shapes.variant(), n_threads);
  const auto cc = kernels::digest_parameters(tau, shapes);
  return kernels::posterior_pass(fm, cc, {}, n_threads);
}

namespace {

// Reorder clusters so fitted means of the first parameter block ascend;
// EM label switching would otherwise break reproducibility.
void canonicalize(FittedModel& model) {
  const int K = model.spec.K;
  const int B = model.shapes.blocks_per_cluster();
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int blk = 0; blk < B; ++blk) {
      const double ma = model.shapes.block(a, blk).mean();
      const double mb = model.shapes.block(b, blk).mean();
      if (ma != mb) return ma < mb;
    }
    return a < b;
  });

  std::vector<double> tau(K);
  ShapeParams shapes(model.shapes.variant(), K, model.shapes.N(), model.shapes.R());
  for (int k = 0; k < K; ++k) {
    tau[k] = model.tau[order[k]];
    for (int b = 0; b < B; ++b) shapes.block(k, b) = model.shapes.block(order[k], b);
  }
  model.tau = std::move(tau);
  model.shapes = std::move(shapes);

  if (!model.responsibilities.empty()) {
    std::vector<double> row(K);
    for (std::size_t c = 0; c < model.C; ++c) {
      double* z = model.responsibilities.data() + c * K;
      for (int k = 0; k < K; ++k) row[k] = z[order[k]];
      std::copy(row.begin(), row.end(), z);
    }
  }
}

void hard_assign(FittedModel& model) {
  const int K = model.spec.K;
  model.hard_labels.resize(model.C);
  double log_post = 0.0;
  for (std::size_t c = 0; c < model.C; ++c) {
    const double* z = model.responsibilities.data() + c * K;
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (z[k] > z[best]) best = k;  // ties keep the lowest index
    model.hard_labels[c] = best;
    log_post += std::log(std::max(z[best], 1e-300));
  }
  model.assigned_log_post_sum = log_post;
}

}  // namespace

FittedModel fit(const MethylationMatrix& matrix, const ModelSpec& spec, const FitConfig& config) {
  validate(matrix, spec);
  if (!(config.epsilon > 0.0) || config.max_iterations < 1)
    throw std::invalid_argument("fit: epsilon must be positive and max_iterations >= 1");

  const std::size_t C = matrix.n_sites();
  const int K = spec.K;
  const int nt = config.n_threads;

  const auto features = kernels::build_features(matrix, spec.variant, nt);
  const auto assignment = kmeans_init(matrix, K, config.seed, nt);
  auto [tau, shapes] = initial_params(matrix, assignment, spec);

  FittedModel model;
  model.spec = spec;
  model.N = static_cast<int>(matrix.n_patients());
  model.R = static_cast<int>(matrix.n_samples());
  model.C = C;
  model.seed = config.seed;
  model.responsibilities.resize(C * static_cast<std::size_t>(K));

  int consecutive_degenerate = 0;
  double prev_ll = 0.0;
  for (int iter = 0;; ++iter) {
    const auto cc = kernels::digest_parameters(tau, shapes);
    const double ll = kernels::posterior_pass(features, cc, model.responsibilities, nt);
    if (!std::isfinite(ll)) throw std::runtime_error("fit: log-likelihood is not finite");
    model.loglik_trace.push_back(ll);

    if (iter > 0) {
      const double drop = prev_ll - ll;
      if (drop > 0.0) {
        model.max_ascent_violation = std::max(model.max_ascent_violation, drop);
        if (drop > 1e-6 * std::abs(prev_ll))
          std::cerr << "betamix: warning: log-likelihood fell by " << drop << " at iteration "
                    << iter << "\n";
      }
      if (std::abs(ll - prev_ll) < config.epsilon) {
        model.converged = true;
        model.n_iterations = iter;
        break;
      }
    }
    if (iter == config.max_iterations) break;  // responsibilities stay in sync with parameters
    prev_ll = ll;

    tau = kernels::column_means(model.responsibilities, C, K, nt);
    const auto acc = kernels::stats_pass(features, model.responsibilities, K, nt);
    const auto stats = stats_from_sums(acc, features.pool_size);

    bool degenerate_iter = false;
    for (int k = 0; k < K; ++k) {
      if (acc.weight[k] * features.pool_size < 1e-10) {
        degenerate_iter = true;  // empty cluster: keep previous shapes
        continue;
      }
      for (int b = 0; b < features.n_blocks; ++b) {
        const auto& st = stats[static_cast<std::size_t>(k) * features.n_blocks + b];
        try {
          ShapePair next = closed_form_shape(st);
          if (config.exact_mstep) next = newton_shape(st, next);
          shapes.block(k, b) = next;
          if (!config.exact_mstep) {
            const auto [r1, r2] = score_residuals(st, next);
            model.max_score_residual =
                std::max({model.max_score_residual, std::abs(r1), std::abs(r2)});
          }
        } catch (const DegenerateStatsError&) {
          degenerate_iter = true;  // keep this block's previous shapes
        }
      }
    }
    if (degenerate_iter) {
      ++model.n_degenerate_events;
      if (++consecutive_degenerate >= 10)
        throw std::runtime_error("fit: degenerate M-step statistics for 10 consecutive iterations");
    } else {
      consecutive_degenerate = 0;
    }
  }

  if (!model.converged) model.n_iterations = config.max_iterations;
  model.tau = std::move(tau);
  model.shapes = std::move(shapes);
  canonicalize(model);
  hard_assign(model);
  return model;
}

}  // namespace betamix
