#include "lbsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace lbsgd {

namespace fs = std::filesystem;

namespace {

constexpr double kLowerQuantile = 0.05;
constexpr double kUpperQuantile = 0.95;

template <typename T>
T parse_number(const std::string& field, int line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad field '" + field + "'");
  return value;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<CsvRow> to_rows(const RunReport& report) {
  std::vector<CsvRow> rows;
  rows.reserve(report.trajectory.size());
  for (const IterateRecord& rec : report.trajectory) {
    rows.push_back({rec.t, rec.queries_cum, rec.eta, rec.f0_true, rec.max_constraint_true,
                    rec.barrier_est, rec.g_norm, rec.gamma, rec.violated});
  }
  return rows;
}

// Last value at or before q; nullopt when the trace starts after q.
std::optional<double> step_value(const std::vector<CsvRow>& rows, double q, double CsvRow::*field) {
  const auto it = std::upper_bound(rows.begin(), rows.end(), q, [](double value, const CsvRow& row) {
    return value < static_cast<double>(row.queries_cum);
  });
  if (it == rows.begin()) return std::nullopt;
  return (*std::prev(it)).*field;
}

fs::path seed_csv_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("seed_" + std::to_string(seed) + ".csv");
}

}  // namespace

std::unique_ptr<Oracle> make_experiment_oracle(const BenchmarkInstance& instance,
                                               const ExperimentConfig& config) {
  if (instance.cmdp) return std::make_unique<CmdpOracle>(*instance.cmdp);
  return make_oracle(instance.spec, config.noise.model(instance.spec.m), config.solver.oracle_kind);
}

RunReport run_seed(const BenchmarkInstance& instance, const ExperimentConfig& config,
                   std::uint64_t seed) {
  SolverConfig solver = config.solver;
  solver.seed = seed;
  const auto oracle = make_experiment_oracle(instance, config);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  Rng rng(seq);
  return solve(instance.spec, solver, *oracle, rng);
}

std::int64_t audit_safety(const RunReport& report, const ProblemSpec& spec) {
  if (spec.m == 0) return 0;
  std::int64_t count = 0;
  for (const Vector& point : report.query_points) {
    const Vector values = spec.values(point);
    if ((values.tail(spec.m).array() > 0.0).any()) ++count;
  }
  return count;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string format_csv(const RunReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const CsvRow& row : to_rows(report)) {
    out += std::to_string(row.t);
    out += ',';
    out += std::to_string(row.queries_cum);
    for (double v : {row.eta, row.f0_true, row.max_constraint_true, row.barrier_est, row.g_norm,
                     row.gamma}) {
      out += ',';
      out += format_double(v);
    }
    out += row.violated ? ",1\n" : ",0\n";
  }
  return out;
}

void emit_csv(const RunReport& report, const fs::path& path) {
  write_text(path, format_csv(report));
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::stringstream stream(text);
  std::string line;
  if (!std::getline(stream, line) || line != kCsvHeader)
    throw std::runtime_error("csv: missing or unexpected header");
  std::vector<CsvRow> rows;
  int line_no = 1;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    if (fields.size() != 9)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 9 fields");
    CsvRow row;
    row.t = parse_number<int>(fields[0], line_no);
    row.queries_cum = parse_number<std::int64_t>(fields[1], line_no);
    row.eta = parse_number<double>(fields[2], line_no);
    row.f0_true = parse_number<double>(fields[3], line_no);
    row.max_constraint_true = parse_number<double>(fields[4], line_no);
    row.barrier_est = parse_number<double>(fields[5], line_no);
    row.g_norm = parse_number<double>(fields[6], line_no);
    row.gamma = parse_number<double>(fields[7], line_no);
    row.violated = parse_number<int>(fields[8], line_no) != 0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CsvRow> read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

AggregateSummary aggregate(const std::vector<std::vector<CsvRow>>& traces,
                           std::optional<double> f_star) {
  AggregateSummary summary;
  summary.runs = traces.size();
  summary.f_star = f_star;
  const double offset = f_star.value_or(0.0);

  std::vector<double> grid;
  for (const auto& rows : traces) {
    for (const CsvRow& row : rows) grid.push_back(static_cast<double>(row.queries_cum));
    if (!rows.empty()) summary.final_accuracy.push_back(rows.back().f0_true - offset);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  for (double q : grid) {
    std::vector<double> acc;
    std::vector<double> con;
    for (const auto& rows : traces) {
      if (const auto f0 = step_value(rows, q, &CsvRow::f0_true)) {
        acc.push_back(*f0 - offset);
        con.push_back(*step_value(rows, q, &CsvRow::max_constraint_true));
      }
    }
    summary.query_grid.push_back(q);
    for (auto [band, sample] : {std::pair{&summary.accuracy, &acc}, {&summary.max_constraint, &con}}) {
      band->lower.push_back(percentile(*sample, kLowerQuantile));
      band->median.push_back(percentile(*sample, 0.5));
      band->upper.push_back(percentile(*sample, kUpperQuantile));
    }
  }
  return summary;
}

AggregateSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
  std::vector<RunReport> reports(config.seeds.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < reports.size(); k = next++)
      reports[k] = run_seed(instance, config, config.seeds[k]);
  };
  const int n_threads = std::min<int>(config.threads, static_cast<int>(reports.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  fs::create_directories(config.output_dir);
  std::vector<std::vector<CsvRow>> traces;
  std::int64_t audited = 0;
  double wall = 0.0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    emit_csv(reports[k], seed_csv_path(config.output_dir, config.seeds[k]));
    traces.push_back(to_rows(reports[k]));
    audited += audit_safety(reports[k], instance.spec);
    wall += reports[k].wall_time_seconds;
  }

  AggregateSummary summary = aggregate(traces, instance.spec.f_star);
  summary.benchmark = config.benchmark;
  summary.violations_total = audited;
  summary.mean_wall_time_seconds = wall / static_cast<double>(reports.size());
  write_summary_json(summary, config.output_dir / "summary.json");
  write_plots(summary, config.output_dir);
  return summary;
}

AggregateSummary report_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("seed_") && name.ends_with(".csv")) files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error("no seed_*.csv files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::optional<double> f_star;
  std::string benchmark;
  double wall = 0.0;
  const fs::path json_path = dir / "summary.json";
  if (fs::exists(json_path)) {
    const auto json = nlohmann::json::parse(read_text(json_path));
    if (json.contains("f_star") && json["f_star"].is_number()) f_star = json["f_star"].get<double>();
    benchmark = json.value("benchmark", "");
    wall = json.value("mean_wall_time_seconds", 0.0);
  }

  std::vector<std::vector<CsvRow>> traces;
  std::int64_t violated = 0;
  for (const fs::path& file : files) {
    traces.push_back(read_csv(file));
    for (const CsvRow& row : traces.back()) violated += row.violated ? 1 : 0;
  }
  AggregateSummary summary = aggregate(traces, f_star);
  summary.benchmark = benchmark;
  summary.violations_total = violated;
  summary.mean_wall_time_seconds = wall;
  return summary;
}

void write_summary_json(const AggregateSummary& summary, const fs::path& path) {
  nlohmann::ordered_json json;
  json["benchmark"] = summary.benchmark;
  json["runs"] = summary.runs;
  json["violations_total"] = summary.violations_total;
  json["mean_wall_time_seconds"] = summary.mean_wall_time_seconds;
  json["f_star"] = summary.f_star ? nlohmann::ordered_json(*summary.f_star) : nlohmann::ordered_json(nullptr);
  json["final_accuracy"] = summary.final_accuracy;
  if (!summary.final_accuracy.empty())
    json["final_accuracy_median"] = percentile(summary.final_accuracy, 0.5);
  json["query_grid"] = summary.query_grid;
  for (auto [key, band] : {std::pair{"accuracy", &summary.accuracy},
                           {"max_constraint", &summary.max_constraint}}) {
    json[key] = {{"p05", band->lower}, {"median", band->median}, {"p95", band->upper}};
  }
  write_text(path, json.dump(2) + "\n");
}

void write_plots(const AggregateSummary& summary, const fs::path& dir) {
  const bool positive =
      !summary.accuracy.lower.empty() &&
      std::all_of(summary.accuracy.lower.begin(), summary.accuracy.lower.end(),
                  [](double v) { return v > 0.0; });
  const std::string acc_label = summary.f_star ? "f0 - f*" : "f0";
  write_text(dir / "accuracy.svg",
             render_band_svg({summary.query_grid, summary.accuracy.lower, summary.accuracy.median,
                              summary.accuracy.upper},
                             summary.benchmark + ": accuracy", "oracle queries", acc_label,
                             positive));
  write_text(dir / "constraint.svg",
             render_band_svg({summary.query_grid, summary.max_constraint.lower,
                              summary.max_constraint.median, summary.max_constraint.upper},
                             summary.benchmark + ": max constraint", "oracle queries",
                             "max_i fi", false));
}

}  // namespace lbsgd
