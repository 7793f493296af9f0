#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "betamix/special.hpp"

namespace betamix {

// Beta values exactly 0 or 1 do occur after preprocessing; every value is
// clamped into [kClampLo, 1-kClampLo] before any log is taken.
inline constexpr double kClampLo = 1e-6;

inline double clamp_unit(double x) {
  if (x < kClampLo) return kClampLo;
  if (x > 1.0 - kClampLo) return 1.0 - kClampLo;
  return x;
}

struct GenomicPosition {
  std::string chromosome;
  std::int64_t coordinate = 0;
};

// C x (N*R) matrix of beta values, stored column-major so per-column
// reductions stream contiguously. Column order: sample-major, i.e. column
// (n, r) lives at index r*N + n. Immutable after construction.
class MethylationMatrix {
 public:
  // Takes values indexed value(c,n,r) = values[(r*N + n)*C + c]; clamps
  // into the open unit interval and counts how many values needed it.
  MethylationMatrix(std::vector<double> values, std::vector<std::string> cpg_ids,
                    std::vector<std::string> patient_labels,
                    std::vector<std::string> sample_labels);

  std::size_t n_sites() const { return n_sites_; }
  std::size_t n_patients() const { return n_patients_; }
  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_columns() const { return n_patients_ * n_samples_; }

  double value(std::size_t c, std::size_t n, std::size_t r) const {
    return values_[(r * n_patients_ + n) * n_sites_ + c];
  }
  std::span<const double> column(std::size_t n, std::size_t r) const {
    return {values_.data() + (r * n_patients_ + n) * n_sites_, n_sites_};
  }
  std::span<const double> raw() const { return values_; }

  const std::vector<std::string>& cpg_ids() const { return cpg_ids_; }
  const std::vector<std::string>& patient_labels() const { return patient_labels_; }
  const std::vector<std::string>& sample_labels() const { return sample_labels_; }

  std::size_t clamp_count() const { return clamp_count_; }

  bool has_positions() const { return !positions_.empty(); }
  const std::vector<GenomicPosition>& positions() const { return positions_; }
  void set_positions(std::vector<GenomicPosition> positions);

  // View of a single sample as an R=1 matrix (used to fit K.. / KN. on one
  // sample of a paired dataset).
  MethylationMatrix extract_sample(std::size_t r) const;

 private:
  std::size_t n_sites_ = 0, n_patients_ = 0, n_samples_ = 0;
  std::vector<double> values_;
  std::vector<std::string> cpg_ids_;
  std::vector<std::string> patient_labels_;
  std::vector<std::string> sample_labels_;
  std::vector<GenomicPosition> positions_;
  std::size_t clamp_count_ = 0;
};

enum class ModelVariant { KDotDot, KNDot, KDotR };

const char* variant_name(ModelVariant v);            // "k..", "kn.", "k.r"
ModelVariant variant_from_name(const std::string& s);

struct ModelSpec {
  ModelVariant variant = ModelVariant::KDotDot;
  int K = 3;  // cluster count
  int M = 3;  // methylation-state count
};

// Default K for a variant: M for the single-sample models, M^R for K.R.
int default_cluster_count(ModelVariant variant, int M, int R);

// Shape parameters with the variant's tying pattern. Internally one block
// per (cluster, tied-group); the (k, n, r) accessors resolve through the
// pattern so tied entries are bit-identical by construction.
class ShapeParams {
 public:
  ShapeParams() = default;
  ShapeParams(ModelVariant variant, int K, int N, int R);

  // Number of distinct blocks per cluster: 1 (K..), N (KN.), R (K.R).
  int blocks_per_cluster() const { return blocks_; }
  int block_of(int n, int r) const {
    switch (variant_) {
      case ModelVariant::KDotDot: return 0;
      case ModelVariant::KNDot: return n;
      case ModelVariant::KDotR: return r;
    }
    return 0;
  }
  // Columns pooled into each block.
  int pool_size() const { return n_ * r_ / blocks_; }

  ModelVariant variant() const { return variant_; }
  int K() const { return k_; }
  int N() const { return n_; }
  int R() const { return r_; }

  ShapePair& block(int k, int b) { return shapes_[k * blocks_ + b]; }
  const ShapePair& block(int k, int b) const { return shapes_[k * blocks_ + b]; }
  const ShapePair& at(int k, int n, int r) const { return block(k, block_of(n, r)); }

  double alpha(int k, int n, int r) const { return at(k, n, r).alpha; }
  double delta(int k, int n, int r) const { return at(k, n, r).delta; }

 private:
  ModelVariant variant_ = ModelVariant::KDotDot;
  int k_ = 0, n_ = 0, r_ = 0, blocks_ = 1;
  std::vector<ShapePair> shapes_;
};

struct FitConfig {
  double epsilon = 1e-5;     // absolute change in observed-data log-likelihood
  int max_iterations = 1000;
  std::uint64_t seed = 1;
  int n_threads = 0;         // 0 = library default
  bool exact_mstep = false;  // Newton on the exact score equations (verification path)
};

struct FittedModel {
  ModelSpec spec;
  int N = 0, R = 0;
  std::size_t C = 0;
  std::vector<double> tau;              // K mixing proportions
  ShapeParams shapes;
  std::vector<double> responsibilities; // C x K row-major; may be empty after load
  std::vector<int> hard_labels;         // argmax per site, ties to lowest index
  std::vector<double> loglik_trace;
  bool converged = false;
  int n_iterations = 0;
  int n_degenerate_events = 0;
  double assigned_log_post_sum = 0.0;   // sum_c log zhat_{c,hard_c}, floored; feeds ICL
  double max_score_residual = 0.0;      // largest |approximated score residual| seen
  double max_ascent_violation = 0.0;    // largest log-likelihood drop between iterations
  std::uint64_t seed = 0;

  bool has_responsibilities() const { return !responsibilities.empty(); }
  double final_loglik() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
};

// Checks matrix/spec compatibility: the single-sample variants need R = 1,
// K.R needs R >= 2, and there must be at least K sites.
void validate(const MethylationMatrix& matrix, const ModelSpec& spec);

}  // namespace betamix
