#include <cstdio>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "lbsgd/barrier.hpp"
#include "lbsgd/harness.hpp"

using namespace lbsgd;

namespace {

void print_summary(const AggregateSummary& s, const std::filesystem::path& dir) {
  std::printf("benchmark        %s\n", s.benchmark.c_str());
  std::printf("runs             %zu\n", s.runs);
  std::printf("violations       %lld\n", static_cast<long long>(s.violations_total));
  std::printf("mean wall time   %.4f s\n", s.mean_wall_time_seconds);
  if (!s.final_accuracy.empty())
    std::printf("final %-10s median %.6g  [p05 %.6g, p95 %.6g]\n", s.f_star ? "f0-f*" : "f0",
                percentile(s.final_accuracy, 0.5), percentile(s.final_accuracy, 0.05),
                percentile(s.final_accuracy, 0.95));
  if (!s.query_grid.empty())
    std::printf("queries (max)    %.0f\n", s.query_grid.back());
  std::printf("output           %s\n", dir.string().c_str());
}

// Largest relative mismatch between exact and finite-difference gradients of
// every function and of the barrier, over random interior points.
int check_gradients(const std::string& family, int d, double r, int points, std::uint64_t seed) {
  ParamMap params{{"d", std::to_string(d)}, {"r", std::to_string(r)}};
  if (family == "chain_cmdp") params.clear();
  const BenchmarkInstance inst = make_benchmark(family, params);
  const ProblemSpec& spec = inst.spec;
  if (!spec.grads) {
    std::fprintf(stderr, "%s has no exact gradients\n", family.c_str());
    return 1;
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> worst(spec.m + 2, 0.0);
  const double eta = 0.1;
  int accepted = 0;
  while (accepted < points) {
    Vector x = spec.x0;
    for (int k = 0; k < spec.d; ++k) x[k] += 0.3 * spec.R * normal(rng) / std::sqrt(spec.d);
    if (!spec.strictly_feasible(x)) continue;
    ++accepted;
    for (int i = 0; i <= spec.m; ++i)
      worst[i] = std::max(worst[i], gradient_check_error(spec.funcs[i], (*spec.grads)[i], x));
    const auto barrier = [&](const Vector& y) { return barrier_value(spec.values(y), eta); };
    const Vector g = barrier_gradient_exact(spec.values(x), spec.gradients(x), eta);
    const Vector fd = finite_difference_gradient(barrier, x);
    worst[spec.m + 1] = std::max(worst[spec.m + 1], (g - fd).norm() / std::max(1.0, g.norm()));
  }
  std::printf("%s d=%d, %d interior points\n", family.c_str(), spec.d, points);
  for (int i = 0; i <= spec.m; ++i) std::printf("  f%-3d max rel err %.3e\n", i, worst[i]);
  std::printf("  barrier max rel err %.3e (eta=%g)\n", worst[spec.m + 1], eta);
  const double tol = 1e-6;
  const bool ok = *std::max_element(worst.begin(), worst.end()) <= tol;
  std::printf("%s (tolerance %.0e)\n", ok ? "OK" : "MISMATCH", tol);
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LB-SGD: safe stochastic optimization with log barriers"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);

  std::string family;
  int d = 2;
  double noise = 0.001;
  int seeds = 10;
  std::string out_dir;
  auto* bench = app.add_subcommand("bench", "Run a benchmark with its preset schedule");
  bench->add_option("family", family, "quadratic_linear | rosenbrock | gaussian_ellipsoid | chain_cmdp")
      ->required();
  bench->add_option("--d", d, "Dimension");
  bench->add_option("--noise", noise, "Value noise standard deviation");
  bench->add_option("--seeds", seeds, "Number of seeds");
  bench->add_option("--out", out_dir, "Output directory");

  std::string grad_family;
  int grad_d = 2;
  double grad_r = 0.5;
  int grad_points = 20;
  auto* check = app.add_subcommand("check-grad", "Compare exact and finite-difference gradients");
  check->add_option("family", grad_family, "Benchmark family")->required();
  check->add_option("--d", grad_d, "Dimension");
  check->add_option("--r", grad_r, "Ellipsoid radius");
  check->add_option("--points", grad_points, "Number of random interior points");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Re-aggregate the CSVs of a finished run");
  report->add_option("dir", report_dir, "Result directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig config = load_config(config_path);
      print_summary(run_experiment(config), config.output_dir);
    } else if (*bench) {
      ExperimentConfig config = preset_config(family, d, noise);
      if (seeds > 0 && family != "chain_cmdp") {
        config.seeds.clear();
        for (int s = 0; s < seeds; ++s) config.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      if (!out_dir.empty()) config.output_dir = out_dir;
      apply_environment(config);
      print_summary(run_experiment(config), config.output_dir);
    } else if (*check) {
      return check_gradients(grad_family, grad_d, grad_r, grad_points, 0);
    } else if (*report) {
      const AggregateSummary summary = report_directory(report_dir);
      write_summary_json(summary, std::filesystem::path(report_dir) / "report.json");
      write_plots(summary, report_dir);
      print_summary(summary, report_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
