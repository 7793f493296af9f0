#include "betamix/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace betamix {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

bool parse_value(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

// patient{n}_sample{r} -> (n-1, r-1); returns false if the label does not
// match the scheme.
bool parse_column_label(const std::string& label, int* patient, int* sample) {
  int n = 0, r = 0;
  int consumed = 0;
  if (std::sscanf(label.c_str(), "patient%d_sample%d%n", &n, &r, &consumed) != 2) return false;
  if (consumed != static_cast<int>(label.size())) return false;
  if (n < 1 || r < 1) return false;
  *patient = n - 1;
  *sample = r - 1;
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LoadResult load_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "cpg_id")
    throw std::runtime_error(path + ": malformed header, expected 'cpg_id,patient{n}_sample{r},...'");

  const std::size_t n_cols = header.size() - 1;
  std::vector<int> col_patient(n_cols), col_sample(n_cols);
  int N = 0, R = 0;
  std::set<std::pair<int, int>> seen;
  for (std::size_t j = 0; j < n_cols; ++j) {
    if (!parse_column_label(header[j + 1], &col_patient[j], &col_sample[j]))
      throw std::runtime_error(path + ": column '" + header[j + 1] +
                               "' does not match patient{n}_sample{r}");
    if (!seen.insert({col_patient[j], col_sample[j]}).second)
      throw std::runtime_error(path + ": duplicate column '" + header[j + 1] + "'");
    N = std::max(N, col_patient[j] + 1);
    R = std::max(R, col_sample[j] + 1);
  }
  if (n_cols != static_cast<std::size_t>(N) * R)
    throw std::runtime_error(path + ": header does not cover every patient/sample combination");

  std::vector<std::string> ids;
  std::vector<double> row_major;  // usable rows only, header column order
  std::size_t dropped = 0;
  std::vector<double> row(n_cols);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ':' + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    bool usable = true;
    for (std::size_t j = 0; j < n_cols && usable; ++j)
      usable = parse_value(fields[j + 1], &row[j]) && row[j] >= 0.0 && row[j] <= 1.0;
    if (!usable) {
      ++dropped;
      continue;
    }
    ids.push_back(fields[0]);
    row_major.insert(row_major.end(), row.begin(), row.end());
  }
  const std::size_t C = ids.size();
  if (C == 0) throw std::runtime_error(path + ": zero usable rows");

  // Re-order into column-major (n, r) layout.
  std::vector<double> values(C * n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    const std::size_t dest = (static_cast<std::size_t>(col_sample[j]) * N + col_patient[j]) * C;
    for (std::size_t c = 0; c < C; ++c) values[dest + c] = row_major[c * n_cols + j];
  }
  std::vector<std::string> patients(N), samples(R);
  for (int n = 0; n < N; ++n) patients[n] = "patient" + std::to_string(n + 1);
  for (int r = 0; r < R; ++r) samples[r] = "sample" + std::to_string(r + 1);
  return {MethylationMatrix(std::move(values), std::move(ids), std::move(patients),
                            std::move(samples)),
          dropped};
}

std::vector<GenomicPosition> load_positions(const std::string& path,
                                            const MethylationMatrix& matrix) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "cpg_id" || header[1] != "chromosome" ||
      header[2] != "position")
    throw std::runtime_error(path + ": expected header 'cpg_id,chromosome,position'");

  std::unordered_map<std::string, GenomicPosition> by_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": malformed position row '" + line + "'");
    by_id[fields[0]] = {fields[1], std::stoll(fields[2])};
  }
  std::vector<GenomicPosition> positions;
  positions.reserve(matrix.n_sites());
  for (const auto& id : matrix.cpg_ids()) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::runtime_error(path + ": no genomic position for CpG id '" + id + "'");
    positions.push_back(it->second);
  }
  return positions;
}

void write_matrix_csv(const std::string& path, const MethylationMatrix& matrix) {
  auto out = open_output(path);
  out << "cpg_id";
  for (std::size_t n = 0; n < matrix.n_patients(); ++n)
    for (std::size_t r = 0; r < matrix.n_samples(); ++r)
      out << ",patient" << n + 1 << "_sample" << r + 1;
  out << '\n';
  for (std::size_t c = 0; c < matrix.n_sites(); ++c) {
    out << matrix.cpg_ids()[c];
    for (std::size_t n = 0; n < matrix.n_patients(); ++n)
      for (std::size_t r = 0; r < matrix.n_samples(); ++r)
        out << ',' << format_double(matrix.value(c, n, r));
    out << '\n';
  }
}

void write_truth_csv(const std::string& path, const SimulatedData& data) {
  auto out = open_output(path);
  out << "cpg_id";
  for (std::size_t r = 0; r < data.truth.size(); ++r) out << ",state_sample" << r + 1;
  out << ",joint_state\n";
  for (std::size_t c = 0; c < data.matrix.n_sites(); ++c) {
    out << data.matrix.cpg_ids()[c];
    for (const auto& states : data.truth) out << ',' << states[c];
    out << ',' << data.truth_joint[c] << '\n';
  }
}

namespace {

constexpr const char* kModelMagic = "betamix model 1";

}  // namespace

void save_model(const std::string& path, const FittedModel& model,
                bool include_responsibilities) {
  auto out = open_output(path);
  out << kModelMagic << '\n';
  out << "variant " << variant_name(model.spec.variant) << '\n';
  out << "K " << model.spec.K << '\n';
  out << "M " << model.spec.M << '\n';
  out << "N " << model.N << '\n';
  out << "R " << model.R << '\n';
  out << "C " << model.C << '\n';
  out << "seed " << model.seed << '\n';
  out << "converged " << (model.converged ? 1 : 0) << '\n';
  out << "n_iterations " << model.n_iterations << '\n';
  out << "n_degenerate_events " << model.n_degenerate_events << '\n';
  out << "assigned_log_post_sum " << format_double(model.assigned_log_post_sum) << '\n';
  out << "max_score_residual " << format_double(model.max_score_residual) << '\n';
  out << "max_ascent_violation " << format_double(model.max_ascent_violation) << '\n';
  out << "tau";
  for (double t : model.tau) out << ' ' << format_double(t);
  out << '\n';
  const int B = model.shapes.blocks_per_cluster();
  out << "shapes " << model.spec.K * B << '\n';
  for (int k = 0; k < model.spec.K; ++k)
    for (int b = 0; b < B; ++b) {
      const ShapePair& s = model.shapes.block(k, b);
      out << k << ' ' << b << ' ' << format_double(s.alpha) << ' ' << format_double(s.delta)
          << '\n';
    }
  out << "loglik_trace " << model.loglik_trace.size() << '\n';
  for (std::size_t i = 0; i < model.loglik_trace.size(); ++i)
    out << (i ? " " : "") << format_double(model.loglik_trace[i]);
  out << '\n';
  out << "hard_labels " << model.hard_labels.size() << '\n';
  for (std::size_t i = 0; i < model.hard_labels.size(); ++i)
    out << (i ? " " : "") << model.hard_labels[i];
  out << '\n';
  if (include_responsibilities && model.has_responsibilities()) {
    out << "responsibilities " << model.C << ' ' << model.spec.K << '\n';
    for (std::size_t c = 0; c < model.C; ++c) {
      const double* z = model.responsibilities.data() + c * model.spec.K;
      for (int k = 0; k < model.spec.K; ++k) out << (k ? " " : "") << format_double(z[k]);
      out << '\n';
    }
  } else {
    out << "responsibilities 0 0\n";
  }
  out << "end\n";
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
  std::string k;
  if (!(in >> k) || k != key)
    throw std::runtime_error("model file: expected field '" + key + "', found '" + k + "'");
  return k;
}

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  expect_key(in, key);
  T v{};
  if (!(in >> v)) throw std::runtime_error("model file: cannot parse value of '" + key + "'");
  return v;
}

}  // namespace

FittedModel load_model(const std::string& path) {
  auto in = open_input(path);
  std::string magic;
  std::getline(in, magic);
  if (!magic.empty() && magic.back() == '\r') magic.pop_back();
  if (magic != kModelMagic)
    throw std::runtime_error(path + ": unsupported model file version '" + magic + "'");

  FittedModel m;
  m.spec.variant = variant_from_name(read_field<std::string>(in, "variant"));
  m.spec.K = read_field<int>(in, "K");
  m.spec.M = read_field<int>(in, "M");
  m.N = read_field<int>(in, "N");
  m.R = read_field<int>(in, "R");
  m.C = read_field<std::size_t>(in, "C");
  m.seed = read_field<std::uint64_t>(in, "seed");
  m.converged = read_field<int>(in, "converged") != 0;
  m.n_iterations = read_field<int>(in, "n_iterations");
  m.n_degenerate_events = read_field<int>(in, "n_degenerate_events");
  m.assigned_log_post_sum = read_field<double>(in, "assigned_log_post_sum");
  m.max_score_residual = read_field<double>(in, "max_score_residual");
  m.max_ascent_violation = read_field<double>(in, "max_ascent_violation");

  expect_key(in, "tau");
  m.tau.resize(m.spec.K);
  for (double& t : m.tau)
    if (!(in >> t)) throw std::runtime_error(path + ": truncated tau");

  const int n_shape_rows = read_field<int>(in, "shapes");
  m.shapes = ShapeParams(m.spec.variant, m.spec.K, m.N, m.R);
  if (n_shape_rows != m.spec.K * m.shapes.blocks_per_cluster())
    throw std::runtime_error(path + ": shape row count mismatch");
  for (int i = 0; i < n_shape_rows; ++i) {
    int k, b;
    double a, d;
    if (!(in >> k >> b >> a >> d)) throw std::runtime_error(path + ": truncated shapes");
    m.shapes.block(k, b) = {a, d};
  }

  const std::size_t n_trace = read_field<std::size_t>(in, "loglik_trace");
  m.loglik_trace.resize(n_trace);
  for (double& v : m.loglik_trace)
    if (!(in >> v)) throw std::runtime_error(path + ": truncated loglik trace");

  const std::size_t n_labels = read_field<std::size_t>(in, "hard_labels");
  m.hard_labels.resize(n_labels);
  for (int& v : m.hard_labels)
    if (!(in >> v)) throw std::runtime_error(path + ": truncated hard labels");

  expect_key(in, "responsibilities");
  std::size_t rc, rk;
  if (!(in >> rc >> rk)) throw std::runtime_error(path + ": truncated responsibilities header");
  if (rc > 0) {
    if (rc != m.C || rk != static_cast<std::size_t>(m.spec.K))
      throw std::runtime_error(path + ": responsibility dimensions mismatch");
    m.responsibilities.resize(rc * rk);
    for (double& v : m.responsibilities)
      if (!(in >> v)) throw std::runtime_error(path + ": truncated responsibilities");
  }
  expect_key(in, "end");
  return m;
}

void export_density_grid(const std::string& path, const FittedModel& fitted, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("export_density_grid: grid too small");
  auto out = open_output(path);
  const int K = fitted.spec.K;
  const int B = fitted.shapes.blocks_per_cluster();
  out << 'x';
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      out << ',';
      if (fitted.spec.variant == ModelVariant::KNDot)
        out << "patient" << b + 1 << "_cluster" << k + 1;
      else if (fitted.spec.variant == ModelVariant::KDotR)
        out << "sample" << b + 1 << "_cluster" << k + 1;
      else
        out << "cluster" << k + 1;
    }
  out << '\n';
  for (int i = 0; i < grid_size; ++i) {
    const double x = (i + 0.5) / grid_size;
    out << format_double(x);
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) {
        const double d = fitted.tau[k] * std::exp(beta_log_pdf(x, fitted.shapes.block(k, b)));
        out << ',' << format_double(d);
      }
    out << '\n';
  }
}

void write_thresholds_csv(const std::string& path, const FittedModel& fitted,
                          const std::vector<ThresholdPair>& thresholds) {
  auto out = open_output(path);
  out << "scope,t_lo,t_hi\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (fitted.spec.variant == ModelVariant::KNDot)
      out << "patient" << i + 1;
    else
      out << "global";
    out << ',' << format_double(thresholds[i].t_lo) << ',' << format_double(thresholds[i].t_hi)
        << '\n';
  }
}

std::vector<ThresholdPair> read_thresholds_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty thresholds file");
  std::vector<ThresholdPair> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": malformed thresholds row '" + line + "'");
    out.push_back({std::stod(fields[1]), std::stod(fields[2])});
  }
  if (out.empty()) throw std::runtime_error(path + ": no threshold rows");
  return out;
}

void write_selection_csv(const std::string& path, const SelectionReport& report) {
  auto out = open_output(path);
  out << "model,variant,K,loglik,Q,aic,bic,icl\n";
  for (const auto& e : report.entries) {
    out << e.id << ',' << variant_name(e.variant) << ',' << e.K << ','
        << format_double(e.loglik) << ',' << e.Q << ',' << format_double(e.criteria.aic) << ','
        << format_double(e.criteria.bic) << ',' << format_double(e.criteria.icl) << '\n';
  }
  for (const auto& [criterion, id] : report.best_by)
    out << "best_" << criterion << ',' << id << ",,,,,,\n";
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["tool"] = "betamix";
  j["version"] = manifest.tool_version;
  j["subcommand"] = manifest.subcommand;
  j["argv"] = manifest.argv;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["seed"] = manifest.seed;
  j["config"] = manifest.config;
  j["timings_seconds"] = manifest.timings_seconds;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.tool_version = j.at("version").get<std::string>();
  m.subcommand = j.at("subcommand").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.timings_seconds = j.at("timings_seconds").get<std::map<std::string, double>>();
  return m;
}

}  // namespace betamix
