#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "betamix/model.hpp"

namespace betamix {

// Free parameters after constraint tying: 2 shapes per block plus K-1
// mixing proportions.
int param_count(const ModelSpec& spec, int N, int R);

struct InfoCriteria {
  double aic = 0.0;
  double bic = 0.0;
  double icl = 0.0;
};

// AIC = 2Q - 2 log L, BIC = Q log C - 2 log L, and
// ICL = BIC + 2 sum_c log zhat of the hard-assigned cluster (floored at
// log 1e-300). Uses the stored hard-assignment posterior sum when the
// responsibility matrix was not persisted.
InfoCriteria aic_bic_icl(const FittedModel& fitted, std::size_t C);

// Adjusted Rand index between two partitions of the same items, by the
// pair-counting contingency formula. Label values are arbitrary.
double ari(std::span<const int> labels_a, std::span<const int> labels_b);

// Per-site clustering uncertainty 1 - max_k zhat_ck, in [0, 1-1/K].
std::vector<double> uncertainty(std::span<const double> responsibilities, std::size_t C, int K);

struct SelectionEntry {
  std::string id;
  ModelVariant variant = ModelVariant::KDotDot;
  int K = 0;
  double loglik = 0.0;
  int Q = 0;
  InfoCriteria criteria;
};

struct SelectionReport {
  std::vector<SelectionEntry> entries;
  std::map<std::string, std::string> best_by;  // criterion name -> entry id
};

SelectionReport build_selection_report(std::vector<SelectionEntry> entries);

}  // namespace betamix
