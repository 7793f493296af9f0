#include "betamix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace betamix {

int param_count(const ModelSpec& spec, int N, int R) {
  int blocks = 1;
  switch (spec.variant) {
    case ModelVariant::KDotDot: blocks = 1; break;
    case ModelVariant::KNDot: blocks = N; break;
    case ModelVariant::KDotR: blocks = R; break;
  }
  return 2 * spec.K * blocks + (spec.K - 1);
}

InfoCriteria aic_bic_icl(const FittedModel& fitted, std::size_t C) {
  const double ll = fitted.final_loglik();
  const int Q = param_count(fitted.spec, fitted.N, fitted.R);
  InfoCriteria out;
  out.aic = 2.0 * Q - 2.0 * ll;
  out.bic = Q * std::log(static_cast<double>(C)) - 2.0 * ll;
  double log_post = fitted.assigned_log_post_sum;
  if (fitted.has_responsibilities()) {
    log_post = 0.0;
    const int K = fitted.spec.K;
    for (std::size_t c = 0; c < C; ++c) {
      const double* z = fitted.responsibilities.data() + c * K;
      int g = 0;
      for (int k = 1; k < K; ++k)
        if (z[k] > z[g]) g = k;
      log_post += std::log(std::max(z[g], 1e-300));
    }
  }
  out.icl = out.bic + 2.0 * log_post;
  return out;
}

double ari(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument("ari: label vectors differ in length");
  if (labels_a.size() < 2) throw std::invalid_argument("ari: need at least two items");

  std::unordered_map<long long, double> cells;
  std::unordered_map<int, double> rows, cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    cells[(static_cast<long long>(labels_a[i]) << 32) ^ static_cast<unsigned>(labels_b[i])] += 1.0;
    rows[labels_a[i]] += 1.0;
    cols[labels_b[i]] += 1.0;
  }
  const auto choose2 = [](double m) { return 0.5 * m * (m - 1.0); };
  double s_cells = 0.0, s_rows = 0.0, s_cols = 0.0;
  for (const auto& [key, m] : cells) s_cells += choose2(m);
  for (const auto& [key, m] : rows) s_rows += choose2(m);
  for (const auto& [key, m] : cols) s_cols += choose2(m);
  const double total = choose2(static_cast<double>(labels_a.size()));
  const double expected = s_rows * s_cols / total;
  const double denom = 0.5 * (s_rows + s_cols) - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivial and identical
  return (s_cells - expected) / denom;
}

std::vector<double> uncertainty(std::span<const double> responsibilities, std::size_t C, int K) {
  if (responsibilities.size() != C * static_cast<std::size_t>(K))
    throw std::invalid_argument("uncertainty: responsibility size mismatch");
  std::vector<double> u(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double* z = responsibilities.data() + c * K;
    u[c] = 1.0 - *std::max_element(z, z + K);
  }
  return u;
}

SelectionReport build_selection_report(std::vector<SelectionEntry> entries) {
  SelectionReport report;
  report.entries = std::move(entries);
  if (report.entries.empty()) return report;
  const auto best = [&](auto value) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < report.entries.size(); ++i)
      if (value(report.entries[i]) < value(report.entries[arg])) arg = i;
    return report.entries[arg].id;
  };
  report.best_by["aic"] = best([](const SelectionEntry& e) { return e.criteria.aic; });
  report.best_by["bic"] = best([](const SelectionEntry& e) { return e.criteria.bic; });
  report.best_by["icl"] = best([](const SelectionEntry& e) { return e.criteria.icl; });
  return report;
}

}  // namespace betamix
