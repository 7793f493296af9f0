#include "betamix/simulator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "betamix/kernels.hpp"
#include "betamix/rng.hpp"

namespace betamix {

namespace {

// Substream tags; any fixed distinct constants work.
constexpr std::uint64_t kStateTag = 0x535441u;
constexpr std::uint64_t kValueTag = 0x56414cu;

int draw_categorical(RngStream& rng, const double* probs, int m) {
  const double u = rng.next_unit();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += probs[i];
    if (u <= acc) return i;
  }
  return m - 1;  // guard against rounding in the cumulative sum
}

}  // namespace

SimulatedData simulate(const SimConfig& config) {
  const std::size_t C = config.C;
  const int N = config.N, R = config.R;
  if (C < 1 || N < 1 || R < 1)
    throw std::invalid_argument("simulate: C, N and R must all be >= 1");
  int joint_cells = 1;
  for (int r = 0; r < R; ++r) joint_cells *= 3;
  if (!config.joint_table.empty()) {
    if (static_cast<int>(config.joint_table.size()) != joint_cells)
      throw std::invalid_argument("simulate: joint table needs 3^R entries");
    const double sum = std::accumulate(config.joint_table.begin(), config.joint_table.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("simulate: joint table must sum to 1");
  } else {
    const double sum =
        std::accumulate(config.state_probs.begin(), config.state_probs.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("simulate: state probabilities must sum to 1");
  }

  std::vector<double> values(C * static_cast<std::size_t>(N) * R);
  std::vector<std::vector<int>> truth(R, std::vector<int>(C));
  std::vector<int> joint(C);

  const int nt = kernels::resolve_threads(config.n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::size_t c = 0; c < C; ++c) {
    RngStream state_rng(config.seed, kStateTag, c);
    if (config.joint_table.empty()) {
      int code = 0;
      for (int r = 0; r < R; ++r) {
        const int s = draw_categorical(state_rng, config.state_probs.data(), 3);
        truth[r][c] = s;
        code = code * 3 + s;
      }
      joint[c] = code;
    } else {
      int code = draw_categorical(state_rng, config.joint_table.data(), joint_cells);
      joint[c] = code;
      for (int r = R - 1; r >= 0; --r) {
        truth[r][c] = code % 3;
        code /= 3;
      }
    }
    for (int r = 0; r < R; ++r) {
      const ShapePair& s = config.state_shapes[truth[r][c]];
      for (int n = 0; n < N; ++n) {
        RngStream value_rng(config.seed, kValueTag, c,
                            static_cast<std::uint64_t>(r) * N + n);
        values[(static_cast<std::size_t>(r) * N + n) * C + c] =
            clamp_unit(value_rng.next_beta(s.alpha, s.delta));
      }
    }
  }

  std::vector<std::string> cpg_ids(C);
  for (std::size_t c = 0; c < C; ++c) cpg_ids[c] = "cg" + std::to_string(c + 1);
  std::vector<std::string> patients(N), samples(R);
  for (int n = 0; n < N; ++n) patients[n] = "patient" + std::to_string(n + 1);
  for (int r = 0; r < R; ++r) samples[r] = "sample" + std::to_string(r + 1);

  return {MethylationMatrix(std::move(values), std::move(cpg_ids), std::move(patients),
                            std::move(samples)),
          std::move(truth), std::move(joint)};
}

ThresholdPair true_thresholds(const SimConfig& config) {
  std::vector<double> tau;
  if (config.joint_table.empty()) {
    tau.assign(config.state_probs.begin(), config.state_probs.end());
  } else {
    // Marginal state frequencies of sample 0.
    tau.assign(3, 0.0);
    int joint_cells = 1;
    for (int r = 0; r < config.R; ++r) joint_cells *= 3;
    const int div = joint_cells / 3;
    for (int j = 0; j < joint_cells; ++j) tau[j / div] += config.joint_table[j];
  }
  return find_threshold_crossings(tau, config.state_shapes);
}

}  // namespace betamix
