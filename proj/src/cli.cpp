#include "betamix/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "betamix/dmc.hpp"
#include "betamix/em.hpp"
#include "betamix/io.hpp"
#include "betamix/metrics.hpp"
#include "betamix/simulator.hpp"
#include "betamix/thresholds.hpp"

namespace betamix {

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

class PhaseTimer {
 public:
  explicit PhaseTimer(RunManifest& manifest) : manifest_(manifest) {}
  template <typename F>
  auto time(const std::string& phase, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(phase, start);
    } else {
      auto result = f();
      record(phase, start);
      return result;
    }
  }

 private:
  void record(const std::string& phase, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    manifest_.timings_seconds[phase] = d.count();
  }
  RunManifest& manifest_;
};

int default_threads() {
  if (const char* env = std::getenv("BETAMIX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

void finish(RunManifest& manifest, const std::string& outdir) {
  manifest.tool_version = kVersion;
  write_manifest(out_path(outdir, "manifest.json"), manifest);
}

struct ClusterSummaryRow {
  int cluster;
  int block;
};

void write_fit_report(const std::string& path, const FittedModel& model) {
  std::ofstream out(path);
  out << "cluster,scope,tau,alpha,delta,mean,sd\n";
  const int B = model.shapes.blocks_per_cluster();
  for (int k = 0; k < model.spec.K; ++k)
    for (int b = 0; b < B; ++b) {
      const ShapePair& s = model.shapes.block(k, b);
      out << k + 1 << ',';
      if (model.spec.variant == ModelVariant::KNDot)
        out << "patient" << b + 1;
      else if (model.spec.variant == ModelVariant::KDotR)
        out << "sample" << b + 1;
      else
        out << "all";
      out << ',' << format_double(model.tau[k]) << ',' << format_double(s.alpha) << ','
          << format_double(s.delta) << ',' << format_double(s.mean()) << ','
          << format_double(std::sqrt(s.variance())) << '\n';
    }
}

void write_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                      const std::vector<int>& labels) {
  std::ofstream out(path);
  out << "cpg_id,cluster\n";
  for (std::size_t c = 0; c < ids.size(); ++c) out << ids[c] << ',' << labels[c] + 1 << '\n';
}

// Reads a labels CSV and returns (ids, labels) using `column` (header name)
// or the second column when empty.
std::pair<std::vector<std::string>, std::vector<int>> read_labels_csv(const std::string& path,
                                                                      const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::stringstream hs(line);
  std::vector<std::string> header;
  std::string cell;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  std::size_t col = 1;
  if (!column.empty()) {
    bool found = false;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == column) {
        col = j;
        found = true;
      }
    if (!found) throw std::runtime_error(path + ": no column named '" + column + "'");
  }
  if (header.size() < 2 || col == 0)
    throw std::runtime_error(path + ": need a cpg_id column plus a label column");
  std::vector<std::string> ids;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<std::string> fields;
    while (std::getline(ls, cell, ',')) fields.push_back(cell);
    if (fields.size() <= col) throw std::runtime_error(path + ": short row '" + line + "'");
    ids.push_back(fields[0]);
    labels.push_back(std::stoi(fields[col]));
  }
  return {std::move(ids), std::move(labels)};
}

int dispatch(const std::vector<std::string>& args);

int cmd_rerun(const std::string& manifest_path) {
  const RunManifest m = read_manifest(manifest_path);
  return dispatch(m.argv);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"betamix: beta mixture models for methylation beta values"};
  app.set_version_flag("--version", std::string("betamix ") + kVersion);
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
  std::string sim_out;
  SimConfig sim_config;
  std::string sim_probs, sim_shapes, sim_joint;
  int sim_threads = default_threads();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--c", sim_config.C, "number of CpG sites");
  sim->add_option("--n", sim_config.N, "number of patients");
  sim->add_option("--r", sim_config.R, "number of samples per patient");
  sim->add_option("--seed", sim_config.seed, "random seed");
  sim->add_option("--probs", sim_probs, "state probabilities 'hypo,hemi,hyper'");
  sim->add_option("--shapes", sim_shapes, "state shapes 'a1,d1;a2,d2;a3,d3'");
  sim->add_option("--joint-table", sim_joint, "explicit joint state table (3^R probabilities)");
  sim->add_option("--threads", sim_threads, "worker threads (0 = auto)");

  // --- fit ---
  auto* fitc = app.add_subcommand("fit", "fit a beta mixture model");
  std::string fit_data, fit_out, fit_model = "k..";
  int fit_k = 0, fit_m = 3, fit_sample = 0, fit_threads = default_threads();
  FitConfig fit_config;
  bool fit_save_resp = false;
  fitc->add_option("--data", fit_data, "beta value CSV")->required();
  fitc->add_option("--out", fit_out, "output directory")->required();
  fitc->add_option("--model", fit_model, "model variant: k.., kn. or k.r");
  fitc->add_option("--k", fit_k, "cluster count (default: M, or M^R for k.r)");
  fitc->add_option("--m", fit_m, "number of methylation states");
  fitc->add_option("--sample", fit_sample,
                   "1-based sample to extract for single-sample variants on R > 1 data");
  fitc->add_option("--epsilon", fit_config.epsilon, "log-likelihood convergence tolerance");
  fitc->add_option("--max-iter", fit_config.max_iterations, "iteration cap");
  fitc->add_option("--seed", fit_config.seed, "random seed for initialization");
  fitc->add_option("--threads", fit_threads, "worker threads (0 = auto)");
  fitc->add_flag("--exact-mstep", fit_config.exact_mstep,
                 "Newton on the exact score equations (verification path)");
  fitc->add_flag("--save-responsibilities", fit_save_resp,
                 "persist the full responsibility matrix in the model file");

  // --- thresholds ---
  auto* thr = app.add_subcommand("thresholds", "methylation state thresholds from a fitted model");
  std::string thr_model, thr_out;
  thr->add_option("--model", thr_model, "fitted k.. or kn. model file")->required();
  thr->add_option("--out", thr_out, "output directory")->required();

  // --- dmc ---
  auto* dmc = app.add_subcommand("dmc", "differentially methylated sites and regions");
  std::string dmc_model, dmc_data, dmc_out, dmc_positions, dmc_thresholds;
  std::vector<std::string> dmc_companions;
  int dmc_min_run = 3;
  dmc->add_option("--model", dmc_model, "fitted k.r model file")->required();
  dmc->add_option("--data", dmc_data, "beta value CSV the model was fitted on")->required();
  dmc->add_option("--out", dmc_out, "output directory")->required();
  dmc->add_option("--companion", dmc_companions,
                  "per-sample companion k.. model files for state thresholds");
  dmc->add_option("--thresholds", dmc_thresholds, "per-sample thresholds CSV (sample,t_lo,t_hi)");
  dmc->add_option("--positions", dmc_positions, "genomic positions CSV for DMR mapping");
  dmc->add_option("--min-run", dmc_min_run, "minimum adjacent DMCs per region");

  // --- select ---
  auto* sel = app.add_subcommand("select", "compare fitted models by AIC/BIC/ICL");
  std::vector<std::string> sel_models;
  std::string sel_out;
  sel->add_option("--model", sel_models, "fitted model files")->required()->expected(-2);
  sel->add_option("--out", sel_out, "output directory")->required();

  // --- ari ---
  auto* aric = app.add_subcommand("ari", "adjusted Rand index between two label files");
  std::string ari_a, ari_b, ari_col_a, ari_col_b, ari_out;
  aric->add_option("--labels-a", ari_a, "first labels CSV (cpg_id,label)")->required();
  aric->add_option("--labels-b", ari_b, "second labels CSV")->required();
  aric->add_option("--column-a", ari_col_a, "label column name in the first file");
  aric->add_option("--column-b", ari_col_b, "label column name in the second file");
  aric->add_option("--out", ari_out, "output directory")->required();

  // --- ecdf ---
  auto* ecdfc = app.add_subcommand("ecdf", "empirical CDF step points for a site subset");
  std::string ecdf_data, ecdf_subset, ecdf_out;
  int ecdf_sample = 0;
  ecdfc->add_option("--data", ecdf_data, "beta value CSV")->required();
  ecdfc->add_option("--subset", ecdf_subset, "file with one CpG id per line");
  ecdfc->add_option("--sample", ecdf_sample, "restrict to one 1-based sample (default: all)");
  ecdfc->add_option("--out", ecdf_out, "output directory")->required();

  // --- rerun ---
  auto* rerun = app.add_subcommand("rerun", "replay a recorded run manifest");
  std::string rerun_manifest;
  rerun->add_option("manifest", rerun_manifest, "manifest.json of a previous run")->required();

  std::vector<const char*> argv_c;
  argv_c.push_back("betamix");
  for (const auto& a : args) argv_c.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv_c.size()), argv_c.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunManifest manifest;
  manifest.argv = args;
  PhaseTimer timer(manifest);

  if (sim->parsed()) {
    manifest.subcommand = "simulate";
    manifest.seed = sim_config.seed;
    sim_config.n_threads = sim_threads;
    if (!sim_probs.empty()) {
      const auto p = parse_number_list(sim_probs);
      if (p.size() != 3) throw std::runtime_error("--probs needs exactly 3 values");
      std::copy(p.begin(), p.end(), sim_config.state_probs.begin());
    }
    if (!sim_shapes.empty()) {
      std::stringstream ss(sim_shapes);
      std::string group;
      int i = 0;
      while (std::getline(ss, group, ';')) {
        const auto v = parse_number_list(group);
        if (v.size() != 2 || i >= 3)
          throw std::runtime_error("--shapes needs 3 'alpha,delta' groups separated by ';'");
        sim_config.state_shapes[i++] = {v[0], v[1]};
      }
      if (i != 3) throw std::runtime_error("--shapes needs 3 'alpha,delta' groups");
    }
    if (!sim_joint.empty()) sim_config.joint_table = parse_number_list(sim_joint);
    manifest.config["C"] = std::to_string(sim_config.C);
    manifest.config["N"] = std::to_string(sim_config.N);
    manifest.config["R"] = std::to_string(sim_config.R);

    const auto data = timer.time("simulate", [&] { return simulate(sim_config); });
    timer.time("write", [&] {
      write_matrix_csv(out_path(sim_out, "data.csv"), data.matrix);
      write_truth_csv(out_path(sim_out, "truth.csv"), data);
    });
    manifest.outputs = {out_path(sim_out, "data.csv"), out_path(sim_out, "truth.csv")};
    finish(manifest, sim_out);
    std::cout << "simulated " << data.matrix.n_sites() << " sites, " << sim_config.N
              << " patients, " << sim_config.R << " samples -> " << sim_out << "\n";
    return 0;
  }

  if (fitc->parsed()) {
    manifest.subcommand = "fit";
    manifest.inputs = {fit_data};
    manifest.seed = fit_config.seed;
    fit_config.n_threads = fit_threads;

    auto loaded = timer.time("load", [&] { return load_csv(fit_data); });
    if (loaded.dropped_rows > 0)
      std::cerr << "betamix: dropped " << loaded.dropped_rows << " rows with unusable values\n";
    if (loaded.matrix.clamp_count() > 0)
      std::cerr << "betamix: clamped " << loaded.matrix.clamp_count()
                << " boundary beta values\n";

    ModelSpec spec;
    spec.variant = variant_from_name(fit_model);
    spec.M = fit_m;

    const MethylationMatrix* matrix = &loaded.matrix;
    std::optional<MethylationMatrix> extracted;
    if (spec.variant != ModelVariant::KDotR && loaded.matrix.n_samples() > 1) {
      if (fit_sample < 1)
        throw std::runtime_error(
            "single-sample variants on multi-sample data need --sample <1..R>");
      extracted = loaded.matrix.extract_sample(static_cast<std::size_t>(fit_sample - 1));
      matrix = &*extracted;
    }
    spec.K = fit_k > 0 ? fit_k
                       : default_cluster_count(spec.variant, spec.M,
                                               static_cast<int>(matrix->n_samples()));
    manifest.config["variant"] = variant_name(spec.variant);
    manifest.config["K"] = std::to_string(spec.K);
    manifest.config["epsilon"] = format_double(fit_config.epsilon);
    manifest.config["max_iterations"] = std::to_string(fit_config.max_iterations);
    if (fit_sample > 0) manifest.config["sample"] = std::to_string(fit_sample);

    const FittedModel model = timer.time("fit", [&] { return fit(*matrix, spec, fit_config); });
    const InfoCriteria ic = aic_bic_icl(model, model.C);

    timer.time("write", [&] {
      save_model(out_path(fit_out, "model.bmm"), model, fit_save_resp);
      write_fit_report(out_path(fit_out, "report.csv"), model);
      write_labels_csv(out_path(fit_out, "labels.csv"), matrix->cpg_ids(), model.hard_labels);
      export_density_grid(out_path(fit_out, "density.csv"), model);
    });
    manifest.outputs = {out_path(fit_out, "model.bmm"), out_path(fit_out, "report.csv"),
                        out_path(fit_out, "labels.csv"), out_path(fit_out, "density.csv")};
    finish(manifest, fit_out);
    std::cout << "fit " << variant_name(spec.variant) << " K=" << spec.K << " on " << model.C
              << " sites: loglik=" << format_double(model.final_loglik())
              << " iterations=" << model.n_iterations
              << (model.converged ? " (converged)" : " (iteration cap)")
              << " BIC=" << format_double(ic.bic) << "\n";
    return 0;
  }

  if (thr->parsed()) {
    manifest.subcommand = "thresholds";
    manifest.inputs = {thr_model};
    const FittedModel model = timer.time("load", [&] { return load_model(thr_model); });
    const auto thresholds = timer.time("thresholds", [&] { return infer_thresholds(model); });
    write_thresholds_csv(out_path(thr_out, "thresholds.csv"), model, thresholds);
    manifest.outputs = {out_path(thr_out, "thresholds.csv")};
    finish(manifest, thr_out);
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      std::cout << (model.spec.variant == ModelVariant::KNDot
                        ? "patient" + std::to_string(i + 1)
                        : std::string("global"))
                << ": t_lo=" << format_double(thresholds[i].t_lo)
                << " t_hi=" << format_double(thresholds[i].t_hi) << "\n";
    return 0;
  }

  if (dmc->parsed()) {
    manifest.subcommand = "dmc";
    manifest.inputs = {dmc_model, dmc_data};
    const FittedModel model = timer.time("load_model", [&] { return load_model(dmc_model); });
    auto loaded = timer.time("load_data", [&] { return load_csv(dmc_data); });
    if (loaded.matrix.n_sites() != model.C)
      throw std::runtime_error("dmc: data file has " + std::to_string(loaded.matrix.n_sites()) +
                               " usable sites but the model was fitted on " +
                               std::to_string(model.C));

    std::vector<ThresholdPair> per_sample;
    if (!dmc_thresholds.empty()) {
      per_sample = read_thresholds_csv(dmc_thresholds);
      manifest.inputs.push_back(dmc_thresholds);
    } else if (!dmc_companions.empty()) {
      if (static_cast<int>(dmc_companions.size()) != model.R)
        throw std::runtime_error("dmc: need one --companion model per sample");
      for (const auto& path : dmc_companions) {
        const FittedModel companion = load_model(path);
        if (companion.spec.variant != ModelVariant::KDotDot)
          throw std::runtime_error("dmc: companion models must be k.. fits");
        per_sample.push_back(infer_thresholds(companion).front());
        manifest.inputs.push_back(path);
      }
    }

    const auto labels = label_kr_clusters(model, per_sample);
    const auto flags = identify_dmcs(model, labels);

    const auto& ids = loaded.matrix.cpg_ids();
    std::vector<double> u;
    if (model.has_responsibilities())
      u = uncertainty(model.responsibilities, model.C, model.spec.K);
    std::ofstream out(out_path(dmc_out, "dmc.csv"));
    out << "cpg_id,cluster";
    for (int r = 0; r < model.R; ++r) out << ",state_sample" << r + 1;
    out << ",is_dmc,uncertainty\n";
    std::size_t n_dmc = 0;
    for (std::size_t c = 0; c < model.C; ++c) {
      const int k = model.hard_labels[c];
      out << ids[c] << ',' << k + 1;
      for (int r = 0; r < model.R; ++r) out << ',' << state_name(labels[k][r]);
      out << ',' << int(flags[c]) << ',';
      if (!u.empty()) out << format_double(u[c]);
      out << '\n';
      n_dmc += flags[c];
    }
    out.close();
    manifest.outputs = {out_path(dmc_out, "dmc.csv")};

    if (!dmc_positions.empty()) {
      const auto positions = load_positions(dmc_positions, loaded.matrix);
      const auto regions = map_dmrs(flags, positions, ids, dmc_min_run);
      std::ofstream rout(out_path(dmc_out, "dmr.csv"));
      rout << "chromosome,start,end,n_sites,cpg_ids\n";
      for (const auto& region : regions) {
        rout << region.chromosome << ',' << region.start << ',' << region.end << ','
             << region.site_count() << ',';
        for (std::size_t i = 0; i < region.cpg_ids.size(); ++i)
          rout << (i ? ";" : "") << region.cpg_ids[i];
        rout << '\n';
      }
      manifest.inputs.push_back(dmc_positions);
      manifest.outputs.push_back(out_path(dmc_out, "dmr.csv"));
      std::cout << regions.size() << " DMRs written\n";
    }
    finish(manifest, dmc_out);
    std::cout << n_dmc << " of " << model.C << " sites differentially methylated ("
              << format_double(static_cast<double>(n_dmc) / model.C) << ")\n";
    return 0;
  }

  if (sel->parsed()) {
    manifest.subcommand = "select";
    manifest.inputs = sel_models;
    std::vector<SelectionEntry> entries;
    for (const auto& path : sel_models) {
      const FittedModel model = load_model(path);
      SelectionEntry e;
      e.id = path;
      e.variant = model.spec.variant;
      e.K = model.spec.K;
      e.loglik = model.final_loglik();
      e.Q = param_count(model.spec, model.N, model.R);
      e.criteria = aic_bic_icl(model, model.C);
      entries.push_back(std::move(e));
    }
    const SelectionReport report = build_selection_report(std::move(entries));
    write_selection_csv(out_path(sel_out, "selection.csv"), report);
    manifest.outputs = {out_path(sel_out, "selection.csv")};
    finish(manifest, sel_out);
    for (const auto& [criterion, id] : report.best_by)
      std::cout << "best by " << criterion << ": " << id << "\n";
    return 0;
  }

  if (aric->parsed()) {
    manifest.subcommand = "ari";
    manifest.inputs = {ari_a, ari_b};
    auto [ids_a, labels_a] = read_labels_csv(ari_a, ari_col_a);
    auto [ids_b, labels_b] = read_labels_csv(ari_b, ari_col_b);
    if (ids_a != ids_b)
      throw std::runtime_error("ari: the two files do not cover the same CpG ids in order");
    const double value = ari(labels_a, labels_b);
    std::ofstream out(out_path(ari_out, "ari.txt"));
    out << format_double(value) << '\n';
    manifest.outputs = {out_path(ari_out, "ari.txt")};
    finish(manifest, ari_out);
    std::cout << format_double(value) << "\n";
    return 0;
  }

  if (ecdfc->parsed()) {
    manifest.subcommand = "ecdf";
    manifest.inputs = {ecdf_data};
    auto loaded = load_csv(ecdf_data);
    std::vector<std::uint8_t> keep(loaded.matrix.n_sites(), 1);
    if (!ecdf_subset.empty()) {
      manifest.inputs.push_back(ecdf_subset);
      std::ifstream sub(ecdf_subset);
      if (!sub) throw std::runtime_error("cannot open '" + ecdf_subset + "'");
      std::unordered_map<std::string, std::size_t> index;
      for (std::size_t c = 0; c < loaded.matrix.n_sites(); ++c)
        index[loaded.matrix.cpg_ids()[c]] = c;
      std::fill(keep.begin(), keep.end(), 0);
      std::string id;
      while (std::getline(sub, id)) {
        if (!id.empty() && id.back() == '\r') id.pop_back();
        if (id.empty()) continue;
        const auto it = index.find(id);
        if (it == index.end())
          throw std::runtime_error("ecdf: subset id '" + id + "' not present in the data");
        keep[it->second] = 1;
      }
    }
    std::ofstream out(out_path(ecdf_out, "ecdf.csv"));
    out << "sample,x,cdf\n";
    for (std::size_t r = 0; r < loaded.matrix.n_samples(); ++r) {
      if (ecdf_sample > 0 && static_cast<std::size_t>(ecdf_sample - 1) != r) continue;
      std::vector<double> values;
      for (std::size_t c = 0; c < loaded.matrix.n_sites(); ++c) {
        if (!keep[c]) continue;
        for (std::size_t n = 0; n < loaded.matrix.n_patients(); ++n)
          values.push_back(loaded.matrix.value(c, n, r));
      }
      for (const auto& [x, f] : ecdf(values))
        out << r + 1 << ',' << format_double(x) << ',' << format_double(f) << '\n';
    }
    manifest.outputs = {out_path(ecdf_out, "ecdf.csv")};
    finish(manifest, ecdf_out);
    return 0;
  }

  if (rerun->parsed()) return cmd_rerun(rerun_manifest);

  return 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    std::cerr << "betamix: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace betamix
