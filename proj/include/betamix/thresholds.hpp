#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "betamix/model.hpp"

namespace betamix {

enum class MethylationState { Hypo = 0, Hemi = 1, Hyper = 2 };

const char* state_name(MethylationState s);

// Methylation-state boundaries on the beta scale: t_lo separates hypo from
// hemi, t_hi separates hemi from hyper.
struct ThresholdPair {
  double t_lo = 0.2;
  double t_hi = 0.8;
};

class ThresholdUndefinedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ratio of one cluster's weighted fitted density to the sum of all the
// others, evaluated at a single beta value. `j` follows the paper's cluster
// naming: 1 is the hypomethylated cluster (smallest fitted mean), 2 the
// hypermethylated one (largest). `patient` selects the KN. scope; pass -1
// for the K.. global scope. K.R models have no marginal density per value
// and are rejected.
double density_ratio(double x, int j, const FittedModel& fitted, int patient = -1);

// Unit crossings of the density ratios for a 3-cluster single-sample fit:
// one pair for K.., one per patient for KN.. A 10,001-point grid scan
// followed by bisection refines each crossing to 1e-6.
std::vector<ThresholdPair> infer_thresholds(const FittedModel& fitted);

// Crossing search on explicit 3-component parameters (shared by
// infer_thresholds and the simulator's ground-truth thresholds).
ThresholdPair find_threshold_crossings(std::span<const double> tau,
                                       std::span<const ShapePair> components);

// State of each (cluster, sample) cell of a K.R fit, by locating the fitted
// mean within the sample's thresholds. A mean exactly on a boundary takes
// the lower state. `per_sample` may be empty, which uses (0.2, 0.8)
// everywhere, or must supply one pair per sample.
std::vector<std::vector<MethylationState>> label_kr_clusters(
    const FittedModel& fitted, std::span<const ThresholdPair> per_sample = {});

}  // namespace betamix
