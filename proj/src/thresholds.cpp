#include "betamix/thresholds.hpp"

#include <algorithm>
#include <cmath>

namespace betamix {

namespace {

constexpr int kGridPoints = 10001;
constexpr double kRefineWidth = 1e-6;

double grid_x(int i) { return static_cast<double>(i + 1) / (kGridPoints + 1); }

struct ComponentSet {
  std::vector<double> tau;
  std::vector<ShapePair> comps;
  int hypo = 0, hemi = 1, hyper = 2;
};

// omega_j with j expressed as a component index.
double omega(const ComponentSet& cs, int j, double x) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < cs.comps.size(); ++k) {
    const double d = cs.tau[k] * std::exp(beta_log_pdf(x, cs.comps[k]));
    if (static_cast<int>(k) == j)
      num = d;
    else
      den += d;
  }
  return num / den;
}

void order_components(ComponentSet& cs) {
  const auto mean = [&](int k) { return cs.comps[k].mean(); };
  cs.hypo = 0;
  cs.hyper = 0;
  for (int k = 1; k < static_cast<int>(cs.comps.size()); ++k) {
    if (mean(k) < mean(cs.hypo)) cs.hypo = k;
    if (mean(k) > mean(cs.hyper)) cs.hyper = k;
  }
  for (int k = 0; k < static_cast<int>(cs.comps.size()); ++k)
    if (k != cs.hypo && k != cs.hyper) cs.hemi = k;
}

// Bisection for omega_j(x) = 1 inside [lo, hi], which brackets one crossing.
double refine(const ComponentSet& cs, int j, double lo, double hi, bool ge_on_left) {
  while (hi - lo > kRefineWidth) {
    const double mid = 0.5 * (lo + hi);
    const bool ge = omega(cs, j, mid) >= 1.0;
    if (ge == ge_on_left)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ThresholdPair crossings(const ComponentSet& cs) {
  const double hemi_mean = cs.comps[cs.hemi].mean();

  // t_lo: the last grid step below the hemi centre where omega_hypo falls
  // through 1 (upper edge of the hypo region).
  int lo_idx = -1;
  for (int i = 0; i + 1 < kGridPoints && grid_x(i) < hemi_mean; ++i) {
    if (omega(cs, cs.hypo, grid_x(i)) >= 1.0 && omega(cs, cs.hypo, grid_x(i + 1)) < 1.0)
      lo_idx = i;
  }
  if (lo_idx < 0)
    throw ThresholdUndefinedError(
        "no hypo/hemi boundary: the hypomethylated density ratio never crosses 1");

  // t_hi: the first grid step above the hemi centre where omega_hyper rises
  // through 1.
  int hi_idx = -1;
  for (int i = 0; i + 1 < kGridPoints; ++i) {
    if (grid_x(i) <= hemi_mean) continue;
    if (omega(cs, cs.hyper, grid_x(i)) < 1.0 && omega(cs, cs.hyper, grid_x(i + 1)) >= 1.0) {
      hi_idx = i;
      break;
    }
  }
  if (hi_idx < 0)
    throw ThresholdUndefinedError(
        "no hemi/hyper boundary: the hypermethylated density ratio never crosses 1");

  return {refine(cs, cs.hypo, grid_x(lo_idx), grid_x(lo_idx + 1), true),
          refine(cs, cs.hyper, grid_x(hi_idx), grid_x(hi_idx + 1), false)};
}

ComponentSet scope_components(const FittedModel& fitted, int patient) {
  if (fitted.spec.variant == ModelVariant::KDotR)
    throw std::invalid_argument("thresholds are defined for k.. and kn. fits only");
  const int block = fitted.spec.variant == ModelVariant::KNDot ? std::max(patient, 0) : 0;
  ComponentSet cs;
  cs.tau = fitted.tau;
  cs.comps.resize(fitted.spec.K);
  for (int k = 0; k < fitted.spec.K; ++k) cs.comps[k] = fitted.shapes.block(k, block);
  order_components(cs);
  return cs;
}

}  // namespace

const char* state_name(MethylationState s) {
  switch (s) {
    case MethylationState::Hypo: return "hypo";
    case MethylationState::Hemi: return "hemi";
    case MethylationState::Hyper: return "hyper";
  }
  return "hypo";
}

double density_ratio(double x, int j, const FittedModel& fitted, int patient) {
  if (j != 1 && j != 2)
    throw std::invalid_argument("density_ratio: j must be 1 (hypo) or 2 (hyper)");
  const ComponentSet cs = scope_components(fitted, patient);
  return omega(cs, j == 1 ? cs.hypo : cs.hyper, x);
}

std::vector<ThresholdPair> infer_thresholds(const FittedModel& fitted) {
  if (fitted.spec.variant == ModelVariant::KDotR)
    throw std::invalid_argument("infer_thresholds: k.r fits have no marginal thresholds");
  if (fitted.spec.K != 3)
    throw std::invalid_argument("infer_thresholds: needs a K = 3 fit");
  std::vector<ThresholdPair> out;
  if (fitted.spec.variant == ModelVariant::KDotDot) {
    out.push_back(crossings(scope_components(fitted, -1)));
  } else {
    for (int n = 0; n < fitted.N; ++n) out.push_back(crossings(scope_components(fitted, n)));
  }
  return out;
}

ThresholdPair find_threshold_crossings(std::span<const double> tau,
                                       std::span<const ShapePair> components) {
  if (tau.size() != components.size() || components.size() < 3)
    throw std::invalid_argument("find_threshold_crossings: need >= 3 weighted components");
  ComponentSet cs;
  cs.tau.assign(tau.begin(), tau.end());
  cs.comps.assign(components.begin(), components.end());
  order_components(cs);
  return crossings(cs);
}

std::vector<std::vector<MethylationState>> label_kr_clusters(
    const FittedModel& fitted, std::span<const ThresholdPair> per_sample) {
  if (fitted.spec.variant != ModelVariant::KDotR)
    throw std::invalid_argument("label_kr_clusters: expects a k.r fit");
  const int R = fitted.R;
  if (!per_sample.empty() && static_cast<int>(per_sample.size()) != R)
    throw std::invalid_argument("label_kr_clusters: need one threshold pair per sample");

  std::vector<std::vector<MethylationState>> labels(fitted.spec.K,
                                                    std::vector<MethylationState>(R));
  for (int k = 0; k < fitted.spec.K; ++k) {
    for (int r = 0; r < R; ++r) {
      const ThresholdPair t = per_sample.empty() ? ThresholdPair{} : per_sample[r];
      const double mean = fitted.shapes.block(k, r).mean();
      MethylationState s = MethylationState::Hyper;
      if (mean <= t.t_lo)
        s = MethylationState::Hypo;
      else if (mean <= t.t_hi)
        s = MethylationState::Hemi;
      labels[k][r] = s;
    }
  }
  return labels;
}

}  // namespace betamix
