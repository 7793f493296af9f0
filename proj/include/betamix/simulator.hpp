#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "betamix/model.hpp"
#include "betamix/thresholds.hpp"

namespace betamix {

// Synthetic-data generator mirroring the study design the engine targets:
// per-site methylation states drawn per sample (shared across patients),
// one beta draw per patient from the state's distribution.
struct SimConfig {
  std::size_t C = 20000;
  int N = 4;
  int R = 2;
  std::array<ShapePair, 3> state_shapes{{{2.0, 20.0}, {4.0, 3.0}, {20.0, 2.0}}};  // hypo, hemi, hyper
  std::array<double, 3> state_probs{0.35, 0.35, 0.30};
  // Empty: states independent across samples. Otherwise a 3^R-entry joint
  // table over state combinations (sample 0 is the most significant digit).
  std::vector<double> joint_table;
  std::uint64_t seed = 1;
  int n_threads = 0;
};

struct SimulatedData {
  MethylationMatrix matrix;
  std::vector<std::vector<int>> truth;  // truth[r][c]: state of site c in sample r
  std::vector<int> truth_joint;         // base-3 code, sample 0 most significant
};

// Deterministic for a given seed and any thread count: every site draws from
// its own counter-keyed stream.
SimulatedData simulate(const SimConfig& config);

// Threshold crossings of the generating mixture (the ground truth that
// fitted thresholds are compared against).
ThresholdPair true_thresholds(const SimConfig& config);

}  // namespace betamix
