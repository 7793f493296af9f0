#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "betamix/kernels.hpp"
#include "betamix/model.hpp"

namespace betamix {

// Weighted mean log features of one parameter block:
//   y1 = weighted mean of log x over the pooled columns (always < 0)
//   y2 = weighted mean of log(1-x)
//   weight = sum of responsibilities scaled by the pooled column count.
struct SufficientStats {
  double y1 = 0.0;
  double y2 = 0.0;
  double weight = 0.0;
};

// Raised when a block's statistics admit no valid shape update (empty
// cluster, or data so concentrated the score equations degenerate). The fit
// loop responds by keeping the previous iterate's shapes for that block.
class DegenerateStatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed-form shape update from the digamma lower bound: the exact inverse
// of the approximated score equations. Both returned shapes exceed 1/2.
ShapePair closed_form_shape(const SufficientStats& stats);

// Newton solve of the exact score equations
//   psi(alpha) - psi(alpha+delta) = y1,  psi(delta) - psi(alpha+delta) = y2,
// the verification path for the closed-form update. `initial` is typically
// the closed-form estimate.
ShapePair newton_shape(const SufficientStats& stats, ShapePair initial);

// Residuals of the approximated score equations at (alpha, delta), per unit
// weight: y - log((shape - 1/2)/(alpha + delta - 1/2)). Zero (to rounding)
// right after a closed-form M-step.
std::pair<double, double> score_residuals(const SufficientStats& stats, const ShapePair& shape);

// Posterior responsibilities, one row per site, each row summing to 1.
std::vector<double> e_step(const MethylationMatrix& matrix, std::span<const double> tau,
                           const ShapeParams& shapes, int n_threads = 0);

// Mixing-proportion update: column means of the responsibility matrix.
std::vector<double> m_step_tau(std::span<const double> responsibilities, std::size_t C, int K,
                               int n_threads = 0);

// Per-(cluster, block) sufficient statistics for the variant's pattern,
// ordered k-major (block index fastest).
std::vector<SufficientStats> accumulate_stats(const MethylationMatrix& matrix,
                                              std::span<const double> responsibilities,
                                              const ModelSpec& spec, int n_threads = 0);

// Observed-data log-likelihood of the mixture.
double loglik(const MethylationMatrix& matrix, std::span<const double> tau,
              const ShapeParams& shapes, int n_threads = 0);

// Full EM: k-means seeding, method-of-moments start, alternating E/M steps
// until the absolute log-likelihood change drops below config.epsilon or the
// iteration cap is hit. Cluster labels are canonical on return (sorted by
// the fitted mean of the first parameter block). Deterministic for a given
// seed, independent of thread count.
FittedModel fit(const MethylationMatrix& matrix, const ModelSpec& spec, const FitConfig& config);

}  // namespace betamix
