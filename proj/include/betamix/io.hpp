#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "betamix/dmc.hpp"
#include "betamix/metrics.hpp"
#include "betamix/model.hpp"
#include "betamix/simulator.hpp"
#include "betamix/thresholds.hpp"

namespace betamix {

// All floating-point output uses 17 significant digits so text files
// round-trip doubles exactly.
std::string format_double(double v);

struct LoadResult {
  MethylationMatrix matrix;
  std::size_t dropped_rows = 0;  // rows with missing or non-numeric values
};

// Beta-value table: header `cpg_id,patient{n}_sample{r},...`. The labels
// define N and R; every patient/sample combination must appear exactly once.
// Rows with unusable values are dropped and counted; values are clamped into
// the open unit interval.
LoadResult load_csv(const std::string& path);

// `cpg_id,chromosome,position` table, joined to the matrix by CpG id.
// Every site must be covered.
std::vector<GenomicPosition> load_positions(const std::string& path,
                                            const MethylationMatrix& matrix);

void write_matrix_csv(const std::string& path, const MethylationMatrix& matrix);
void write_truth_csv(const std::string& path, const SimulatedData& data);

// Versioned structured-text model persistence; load(save(m)) == m field by
// field. Responsibilities are large and only written when requested; a model
// without them still supports thresholds, selection and DMC calls, but not
// per-site uncertainty.
void save_model(const std::string& path, const FittedModel& model,
                bool include_responsibilities = false);
FittedModel load_model(const std::string& path);

// Weighted component densities tau_k f_k(x) on a uniform grid, one column
// per (block, cluster); overlaying them reproduces the fitted-density plots.
void export_density_grid(const std::string& path, const FittedModel& fitted,
                         int grid_size = 512);

void write_thresholds_csv(const std::string& path, const FittedModel& fitted,
                          const std::vector<ThresholdPair>& thresholds);
std::vector<ThresholdPair> read_thresholds_csv(const std::string& path);

void write_selection_csv(const std::string& path, const SelectionReport& report);

// One run = one manifest: inputs, configuration, outputs and timings, plus
// the exact argument vector so a run can be replayed.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::vector<std::string> argv;  // program name excluded
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::map<std::string, double> timings_seconds;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

}  // namespace betamix
