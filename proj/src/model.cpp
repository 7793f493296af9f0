#include "betamix/model.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace betamix {

MethylationMatrix::MethylationMatrix(std::vector<double> values,
                                     std::vector<std::string> cpg_ids,
                                     std::vector<std::string> patient_labels,
                                     std::vector<std::string> sample_labels)
    : n_sites_(cpg_ids.size()),
      n_patients_(patient_labels.size()),
      n_samples_(sample_labels.size()),
      values_(std::move(values)),
      cpg_ids_(std::move(cpg_ids)),
      patient_labels_(std::move(patient_labels)),
      sample_labels_(std::move(sample_labels)) {
  if (n_sites_ == 0 || n_patients_ == 0 || n_samples_ == 0)
    throw std::invalid_argument("MethylationMatrix: C, N and R must all be >= 1");
  if (values_.size() != n_sites_ * n_patients_ * n_samples_)
    throw std::invalid_argument("MethylationMatrix: value count does not match C*N*R");

  std::unordered_set<std::string> seen;
  seen.reserve(n_sites_);
  for (const auto& id : cpg_ids_)
    if (!seen.insert(id).second)
      throw std::invalid_argument("MethylationMatrix: duplicate CpG id '" + id + "'");

  for (double& v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("MethylationMatrix: beta value outside [0,1]");
    const double clamped = clamp_unit(v);
    if (clamped != v) {
      v = clamped;
      ++clamp_count_;
    }
  }
}

void MethylationMatrix::set_positions(std::vector<GenomicPosition> positions) {
  if (positions.size() != n_sites_)
    throw std::invalid_argument("MethylationMatrix: position count does not match C");
  positions_ = std::move(positions);
}

MethylationMatrix MethylationMatrix::extract_sample(std::size_t r) const {
  if (r >= n_samples_) throw std::invalid_argument("extract_sample: sample index out of range");
  std::vector<double> sub(values_.begin() + r * n_patients_ * n_sites_,
                          values_.begin() + (r + 1) * n_patients_ * n_sites_);
  MethylationMatrix out(std::move(sub), cpg_ids_, patient_labels_, {sample_labels_[r]});
  if (!positions_.empty()) out.set_positions(positions_);
  return out;
}

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::KDotDot: return "k..";
    case ModelVariant::KNDot: return "kn.";
    case ModelVariant::KDotR: return "k.r";
  }
  return "k..";
}

ModelVariant variant_from_name(const std::string& s) {
  if (s == "k.." || s == "K..") return ModelVariant::KDotDot;
  if (s == "kn." || s == "KN.") return ModelVariant::KNDot;
  if (s == "k.r" || s == "K.R") return ModelVariant::KDotR;
  throw std::invalid_argument("unknown model variant '" + s + "' (expected k.., kn. or k.r)");
}

int default_cluster_count(ModelVariant variant, int M, int R) {
  if (variant != ModelVariant::KDotR) return M;
  int k = 1;
  for (int i = 0; i < R; ++i) k *= M;
  return k;
}

ShapeParams::ShapeParams(ModelVariant variant, int K, int N, int R)
    : variant_(variant), k_(K), n_(N), r_(R) {
  if (K < 1 || N < 1 || R < 1) throw std::invalid_argument("ShapeParams: K, N, R must be >= 1");
  switch (variant) {
    case ModelVariant::KDotDot: blocks_ = 1; break;
    case ModelVariant::KNDot: blocks_ = N; break;
    case ModelVariant::KDotR: blocks_ = R; break;
  }
  shapes_.assign(static_cast<std::size_t>(K) * blocks_, ShapePair{});
}

void validate(const MethylationMatrix& matrix, const ModelSpec& spec) {
  if (spec.K < 1) throw std::invalid_argument("validate: K must be >= 1");
  const std::size_t R = matrix.n_samples();
  if (spec.variant == ModelVariant::KDotR) {
    if (R < 2)
      throw std::invalid_argument("validate: the k.r model needs R >= 2 samples, got R = " +
                                  std::to_string(R));
  } else if (R != 1) {
    throw std::invalid_argument(std::string("validate: the ") + variant_name(spec.variant) +
                                " model fits a single sample (R = 1); extract one sample first");
  }
  if (matrix.n_sites() < static_cast<std::size_t>(spec.K))
    throw std::invalid_argument("validate: need at least K sites, got C = " +
                                std::to_string(matrix.n_sites()));
}

}  // namespace betamix
