#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "betamix/model.hpp"
#include "betamix/thresholds.hpp"

namespace betamix {

struct DmrRegion {
  std::string chromosome;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::vector<std::string> cpg_ids;

  std::size_t site_count() const { return cpg_ids.size(); }
};

// A site is differentially methylated iff its hard-assigned cluster carries
// different state labels across the R samples.
std::vector<std::uint8_t> identify_dmcs(
    const FittedModel& fitted, const std::vector<std::vector<MethylationState>>& labels);

// Maximal runs of >= min_run consecutively flagged sites, where adjacency is
// consecutive probe order within a chromosome. Positions must be sorted
// (non-decreasing) within each chromosome.
std::vector<DmrRegion> map_dmrs(std::span<const std::uint8_t> dmc_flags,
                                std::span<const GenomicPosition> positions,
                                std::span<const std::string> cpg_ids, int min_run = 3);

// Step points of the empirical CDF: sorted unique values with cumulative
// fractions, F(max) = 1.
std::vector<std::pair<double, double>> ecdf(std::span<const double> values);

}  // namespace betamix
