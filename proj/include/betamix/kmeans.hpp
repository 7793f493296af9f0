#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "betamix/model.hpp"

namespace betamix {

struct InitAssignment {
  std::vector<int> labels;          // per site, in [0, K)
  std::vector<std::size_t> counts;  // per cluster, all non-zero
};

// Lloyd's algorithm over the C rows (each row is the NR-vector of beta
// values), squared-Euclidean distance, k-means++ seeding from `seed`.
// At most 50 iterations or max centroid movement < 1e-6. Deterministic for
// a given seed and any thread count. An empty cluster is re-seeded at the
// point farthest from its nearest centroid (up to 10 retries).
InitAssignment kmeans_init(const MethylationMatrix& matrix, int K, std::uint64_t seed,
                           int n_threads = 0);

// Empirical mixing proportions and per-block method-of-moments shapes for
// the variant's tying pattern. Blocks with infeasible moments fall back to
// {1.01, 1.01}; any estimated shape <= 0.51 is floored to 1.01.
std::pair<std::vector<double>, ShapeParams> initial_params(const MethylationMatrix& matrix,
                                                           const InitAssignment& assignment,
                                                           const ModelSpec& spec);

}  // namespace betamix
