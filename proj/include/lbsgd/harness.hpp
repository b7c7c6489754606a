#ifndef LBSGD_HARNESS_HPP
#define LBSGD_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lbsgd/benchmarks.hpp"
#include "lbsgd/solver.hpp"

namespace lbsgd {

/// Environment variable that replaces ExperimentConfig::output_dir when set.
inline constexpr const char* kOutputDirEnv = "LBSGD_OUTPUT_DIR";

/// Scalar noise levels applied uniformly to all m+1 functions.
struct NoiseSettings {
  double sigma = 0.001;
  double sigma_hat = 0.0;
  double b_hat = 0.0;

  NoiseModel model(int m) const { return NoiseModel::uniform(m, sigma, sigma_hat, b_hat); }
};

struct ExperimentConfig {
  std::string benchmark = "quadratic_linear";
  ParamMap params;
  SolverConfig solver;
  NoiseSettings noise;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::filesystem::path output_dir = "results";
  int threads = 1;

  /// Throws ConfigError on duplicate seeds, bad solver settings or noise.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
///
///   benchmark          quadratic_linear | rosenbrock | gaussian_ellipsoid | chain_cmdp
///   d, r, episodes,    benchmark parameters (passed through to make_benchmark)
///   threshold, horizon, discount
///   eta0, eta_final, omega, steps_per_round, batch_size, delta_hat, trunc_a,
///   mode, oracle, nu, max_total_queries                  solver settings
///   sigma, sigma_hat, b_hat                              noise
///   seeds              comma-separated list, or a count N meaning 0..N-1
///   output_dir, threads
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a config file, then applies the output_dir override.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces output_dir with $LBSGD_OUTPUT_DIR when it is set and non-empty.
void apply_environment(ExperimentConfig& config);

/// Default preset for `bench`: the per-family restart schedule and batch sizes.
ExperimentConfig preset_config(const std::string& family, int d, double sigma);

/// Builds the oracle that matches the benchmark family and config.
std::unique_ptr<Oracle> make_experiment_oracle(const BenchmarkInstance& instance,
                                               const ExperimentConfig& config);

/// One solver run with its own RNG stream seeded from `seed`.
RunReport run_seed(const BenchmarkInstance& instance, const ExperimentConfig& config,
                   std::uint64_t seed);

/// Re-evaluates the true constraints at every query point of the report and
/// counts the points with some fi > 0.
std::int64_t audit_safety(const RunReport& report, const ProblemSpec& spec);

// ---------------------------------------------------------------------------
// CSV trajectories.

struct CsvRow {
  int t = 0;
  std::int64_t queries_cum = 0;
  double eta = 0.0;
  double f0_true = 0.0;
  double max_constraint_true = 0.0;
  double barrier_est = 0.0;
  double g_norm = 0.0;
  double gamma = 0.0;
  bool violated = false;
};

inline constexpr const char* kCsvHeader =
    "t,queries_cum,eta,f0_true,max_constraint_true,barrier_est,g_norm,gamma,violated";

/// Shortest round-trip decimal formatting, independent of the C locale.
std::string format_double(double value);

std::string format_csv(const RunReport& report);
void emit_csv(const RunReport& report, const std::filesystem::path& path);
std::vector<CsvRow> parse_csv(const std::string& text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Aggregation across seeds.

struct Band {
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

struct AggregateSummary {
  std::string benchmark;
  std::vector<double> query_grid;
  Band accuracy;        // f0 - f*, or f0 when f* is unknown
  Band max_constraint;
  std::int64_t violations_total = 0;
  double mean_wall_time_seconds = 0.0;
  std::size_t runs = 0;
  std::optional<double> f_star;
  std::vector<double> final_accuracy;  // one entry per run
};

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Step-interpolates every trace onto the union of their query counts and
/// reduces to median and 5%/95% bands.
AggregateSummary aggregate(const std::vector<std::vector<CsvRow>>& traces,
                           std::optional<double> f_star);

/// Runs every seed, writes seed_<s>.csv, summary.json and two SVG plots into
/// output_dir, and returns the aggregate. Wall time excludes file I/O.
AggregateSummary run_experiment(const ExperimentConfig& config);

/// Re-aggregates the seed_*.csv files of a previous run_experiment.
AggregateSummary report_directory(const std::filesystem::path& dir);

void write_summary_json(const AggregateSummary& summary, const std::filesystem::path& path);
void write_plots(const AggregateSummary& summary, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// SVG line plots with a shaded band.

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

std::string render_band_svg(const PlotSeries& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            bool log_y = false);

}  // namespace lbsgd

#endif  // LBSGD_HARNESS_HPP
