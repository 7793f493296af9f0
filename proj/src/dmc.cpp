#include "betamix/dmc.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace betamix {

std::vector<std::uint8_t> identify_dmcs(
    const FittedModel& fitted, const std::vector<std::vector<MethylationState>>& labels) {
  if (fitted.spec.variant != ModelVariant::KDotR)
    throw std::invalid_argument("identify_dmcs: expects a k.r fit");
  if (static_cast<int>(labels.size()) != fitted.spec.K)
    throw std::invalid_argument("identify_dmcs: one label row per cluster required");
  if (fitted.hard_labels.size() != fitted.C)
    throw std::invalid_argument("identify_dmcs: fit carries no hard assignment");

  std::vector<std::uint8_t> changes(fitted.spec.K, 0);
  for (int k = 0; k < fitted.spec.K; ++k)
    for (std::size_t r = 1; r < labels[k].size(); ++r)
      if (labels[k][r] != labels[k][0]) changes[k] = 1;

  std::vector<std::uint8_t> flags(fitted.C);
  for (std::size_t c = 0; c < fitted.C; ++c) flags[c] = changes[fitted.hard_labels[c]];
  return flags;
}

std::vector<DmrRegion> map_dmrs(std::span<const std::uint8_t> dmc_flags,
                                std::span<const GenomicPosition> positions,
                                std::span<const std::string> cpg_ids, int min_run) {
  if (dmc_flags.size() != positions.size() || dmc_flags.size() != cpg_ids.size())
    throw std::invalid_argument("map_dmrs: flags, positions and ids must align");
  if (min_run < 1) throw std::invalid_argument("map_dmrs: min_run must be >= 1");

  // Probe order within a chromosome is its subsequence of the input, which
  // must be sorted; chromosomes may interleave.
  std::vector<std::string> chrom_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_chrom;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto& sites = by_chrom[positions[i].chromosome];
    if (!sites.empty() && positions[i].coordinate < positions[sites.back()].coordinate)
      throw std::invalid_argument("map_dmrs: positions not sorted within chromosome " +
                                  positions[i].chromosome);
    if (sites.empty()) chrom_order.push_back(positions[i].chromosome);
    sites.push_back(i);
  }

  std::vector<DmrRegion> regions;
  for (const auto& chrom : chrom_order) {
    const auto& sites = by_chrom[chrom];
    std::size_t i = 0;
    while (i < sites.size()) {
      if (!dmc_flags[sites[i]]) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < sites.size() && dmc_flags[sites[j]]) ++j;
      if (j - i >= static_cast<std::size_t>(min_run)) {
        DmrRegion region;
        region.chromosome = chrom;
        region.start = positions[sites[i]].coordinate;
        region.end = positions[sites[j - 1]].coordinate;
        for (std::size_t s = i; s < j; ++s) region.cpg_ids.push_back(cpg_ids[sites[s]]);
        regions.push_back(std::move(region));
      }
      i = j;
    }
  }
  return regions;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ecdf: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> steps;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    steps.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return steps;
}

}  // namespace betamix
