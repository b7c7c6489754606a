// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lbsgd/barrier.hpp"
#include "lbsgd/benchmarks.hpp"
#include "lbsgd/harness.hpp"
#include "lbsgd/solver.hpp"

using namespace lbsgd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Interior points with every slack at least a quarter of the slack at x0.
std::vector<Vector> interior_points(const ProblemSpec& spec, double scale, int count,
                                    std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double min_slack = 0.25 * -spec.max_constraint(spec.x0);
  std::vector<Vector> points;
  while (static_cast<int>(points.size()) < count) {
    Vector dir(spec.d);
    for (int k = 0; k < spec.d; ++k) dir[k] = normal(rng);
    const Vector x = spec.x0 + scale * unit(rng) * dir / dir.norm();
    if (spec.max_constraint(x) <= -min_slack) points.push_back(x);
  }
  return points;
}

// ---------------------------------------------------------------------------

void gradient_exactness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  const double eta = 0.1;
  double worst = 0.0;
  int checked = 0;
  const std::vector<std::pair<ProblemSpec, double>> cases = {
      {make_quadratic_linear(4), 0.8},
      {make_rosenbrock(4), 0.15},
      {make_gaussian_ellipsoid(10, 0.5), 0.5},
      {cmdp_problem_spec(make_chain_cmdp()), 3.0},
  };
  for (const auto& [spec, scale] : cases) {
    for (const Vector& x : interior_points(spec, scale, 20, rng)) {
      const Vector g = barrier_gradient_exact(spec.values(x), spec.gradients(x), eta);
      Vector fd(spec.d);
      const double h = 1e-5;
      for (int k = 0; k < spec.d; ++k) {
        Vector up = x, down = x;
        up[k] += h;
        down[k] -= h;
        fd[k] = (barrier_value(spec.values(up), eta) - barrier_value(spec.values(down), eta)) /
                (2.0 * h);
      }
      worst = std::max(worst, (g - fd).norm() / g.norm());
      ++checked;
    }
  }
  const double elapsed = seconds_since(start);
  verdict(1, worst <= 1e-6 && elapsed < 5.0,
          format("barrier gradient vs central differences at %d points, max rel err %.2e "
                 "(<= 1e-6), %.2f s (< 5 s)",
                 checked, worst, elapsed));
}

void half_growth() {
  struct Case {
    ProblemSpec spec;
    std::string label;
  };
  std::vector<Case> cases;
  for (int d : {1, 2, 3, 4}) cases.push_back({make_quadratic_linear(d), "quadratic_linear"});
  for (int d : {2, 3, 4}) cases.push_back({make_rosenbrock(d), "rosenbrock"});
  for (int d : {2, 10, 20}) cases.push_back({make_gaussian_ellipsoid(d, 0.5), "gaussian_ellipsoid"});

  std::int64_t steps = 0;
  std::int64_t held = 0;
  std::int64_t violations = 0;
  for (const Case& c : cases) {
    for (OracleKind kind : {OracleKind::first_order, OracleKind::zeroth_order}) {
      for (std::uint64_t seed : {0, 1, 2}) {
        SolverConfig config;
        config.eta0 = config.eta_final = 0.05;
        config.steps_per_round = 150;
        config.batch_size = 2;
        config.mode = Mode::convex;  // runs every step; no early stop
        config.oracle_kind = kind;
        const auto oracle = make_oracle(c.spec, NoiseModel::uniform(c.spec.m, 0.0), kind);
        Rng rng(seed);
        const RunReport report = lbsgd_run(c.spec, config, *oracle, rng);
        violations += audit_safety(report, c.spec);
        for (std::size_t t = 0; t + 1 < report.trajectory.size(); ++t) {
          const Vector a = c.spec.values(report.trajectory[t].x).tail(c.spec.m);
          const Vector b = c.spec.values(report.trajectory[t + 1].x).tail(c.spec.m);
          ++steps;
          if ((b.array() <= 0.5 * a.array()).all()) ++held;
        }
      }
    }
  }
  verdict(2, held == steps && violations == 0,
          format("noiseless half-growth held on %lld/%lld steps, audit violations %lld",
                 static_cast<long long>(held), static_cast<long long>(steps),
                 static_cast<long long>(violations)));
}

struct QuadraticTiming {
  double mean_d2 = 0.0;
  double mean_d4 = 0.0;
};

QuadraticTiming quadratic_reproduction() {
  bool pass = true;
  std::string detail;
  QuadraticTiming timing;
  for (int d : {2, 3, 4}) {
    const ExperimentConfig config = preset_config("quadratic_linear", d, 0.001);
    const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
    std::vector<double> accuracy;
    std::int64_t violations = 0;
    std::int64_t max_queries = 0;
    double max_wall = 0.0;
    for (std::uint64_t seed : config.seeds) {
      const RunReport report = run_seed(instance, config, seed);
      violations += audit_safety(report, instance.spec);
      accuracy.push_back(instance.spec.funcs[0](report.output_x) - *instance.spec.f_star);
      max_queries = std::max(max_queries, report.queries_total);
      max_wall = std::max(max_wall, report.wall_time_seconds);
    }
    const double med = median(accuracy);
    const bool ok = violations == 0 && med <= 0.1 && max_queries <= 2000 && max_wall <= 10.0;
    pass = pass && ok;
    detail += format(" [d=%d: violations %lld, median f0-f* %.4f, max queries %lld, max wall %.4f s]",
                     d, static_cast<long long>(violations), med,
                     static_cast<long long>(max_queries), max_wall);
  }
  verdict(3, pass, "quadratic/linear, sigma 0.001, 10 seeds, need median f0-f* <= 0.1:" + detail);

  // Runtime: repeat the seed sweep so the means are not dominated by timer noise.
  for (int d : {2, 4}) {
    const ExperimentConfig config = preset_config("quadratic_linear", d, 0.001);
    const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
    double total = 0.0;
    int runs = 0;
    for (int repeat = 0; repeat < 20; ++repeat) {
      for (std::uint64_t seed : config.seeds) {
        total += run_seed(instance, config, seed).wall_time_seconds;
        ++runs;
      }
    }
    (d == 2 ? timing.mean_d2 : timing.mean_d4) = total / runs;
  }
  return timing;
}

void runtime_flatness(const QuadraticTiming& timing) {
  const double ratio = timing.mean_d4 / timing.mean_d2;
  verdict(4, ratio <= 3.0,
          format("mean wall time d=4 %.3e s vs d=2 %.3e s, ratio %.2f (<= 3)", timing.mean_d4,
                 timing.mean_d2, ratio));
}

struct EllipsoidOutcome {
  bool pass = true;
  std::string detail;
};

EllipsoidOutcome ellipsoid_runs(double sigma) {
  EllipsoidOutcome out;
  for (int d : {2, 10, 20}) {
    const ExperimentConfig config = preset_config("gaussian_ellipsoid", d, sigma);
    const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
    std::int64_t violations = 0;
    double con_lo = 1e300, con_hi = -1e300, f0_hi = -1e300, max_wall = 0.0;
    for (std::uint64_t seed : config.seeds) {
      const RunReport report = run_seed(instance, config, seed);
      violations += audit_safety(report, instance.spec);
      const double con = instance.spec.max_constraint(report.output_x);
      con_lo = std::min(con_lo, con);
      con_hi = std::max(con_hi, con);
      f0_hi = std::max(f0_hi, instance.spec.funcs[0](report.output_x));
      max_wall = std::max(max_wall, report.wall_time_seconds);
    }
    const bool ok = violations == 0 && con_lo >= -0.1 && con_hi <= 0.0 && f0_hi <= -0.5 &&
                    max_wall <= 30.0;
    out.pass = out.pass && ok;
    out.detail += format(" [d=%d: violations %lld, constraint in [%.4f, %.4f], max f0 %.4f, max wall %.3f s]",
                         d, static_cast<long long>(violations), con_lo, con_hi, f0_hi, max_wall);
  }
  return out;
}

void ellipsoid_boundary() {
  const EllipsoidOutcome noisy = ellipsoid_runs(0.001);
  verdict(5, noisy.pass,
          "gaussian/ellipsoid r=0.5, sigma 0.001, 10 seeds, need constraint in [-0.1, 0] "
          "and f0 <= -0.5:" + noisy.detail);
  const EllipsoidOutcome clean = ellipsoid_runs(0.0);
  std::printf("info criterion 5 (noiseless zeroth-order oracle, not a verdict): %s%s\n",
              clean.pass ? "met" : "not met", clean.detail.c_str());
}

void zeroth_order_statistics() {
  const int d = 5;
  ProblemSpec spec;
  spec.name = "sphere";
  spec.d = d;
  spec.m = 1;
  spec.funcs = {[](const Vector& x) { return x.squaredNorm(); },
                [](const Vector& x) { return x[0] - 10.0; }};
  spec.M = Vector(2);
  spec.M << 2.0, 0.0;
  spec.L = Vector(2);
  spec.L << 2.0, 1.0;  // |grad f(e1)| = 2
  spec.R = 1.0;
  spec.x0 = Vector::Unit(d, 0);
  spec.beta = spec.beta_hat = 9.0;

  const double nu = 0.1;
  const int N = 100000;
  Rng rng(77);
  Vector sum = Vector::Zero(d), sum_sq = Vector::Zero(d);
  for (int j = 0; j < N; ++j) {
    const Vector g = zo_batch(spec, NoiseModel::uniform(1, 0.0), spec.x0, nu, 1, rng).grad.col(0);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  const Vector mean = sum / N;
  const Vector se = ((sum_sq / N - mean.cwiseProduct(mean)) / (N - 1.0)).cwiseSqrt();
  const Vector target = 2.0 * Vector::Unit(d, 0);
  const double worst_z = ((mean - target).cwiseAbs().array() / se.array()).maxCoeff();

  const double sigma = 0.001;
  std::vector<Vector> samples;
  samples.reserve(N);
  Vector noisy_sum = Vector::Zero(d);
  for (int j = 0; j < N; ++j) {
    samples.push_back(
        zo_batch(spec, NoiseModel::uniform(1, sigma), spec.x0, nu, 1, rng).grad.col(0));
    noisy_sum += samples.back();
  }
  const Vector noisy_mean = noisy_sum / N;
  double variance = 0.0;
  for (const Vector& g : samples) variance += (g - noisy_mean).squaredNorm();
  variance /= (N - 1.0);
  const double bound = zo_variance_bound(d, spec.L[0], spec.M[0], sigma, nu, 1);
  verdict(6, worst_z <= 3.0 && variance <= bound,
          format("noiseless mean within %.2f SE of (2,0,0,0,0) (<= 3); noisy variance %.4f <= "
                 "bound %.4f",
                 worst_z, variance, bound));
}

void restart_schedule() {
  const std::vector<double> etas = restart_etas(1.0, 0.343, 0.7);
  const std::vector<double> expected = {0.7, 0.49, 0.343};
  bool etas_ok = etas.size() == 3;
  for (std::size_t k = 0; etas_ok && k < 3; ++k)
    etas_ok = std::abs(etas[k] - expected[k]) <= 4 * std::numeric_limits<double>::epsilon();
  const int K = restart_rounds(1.0, 0.343, 0.7);

  // The run records one eta per round; the per-step delta matches the closed form.
  const ProblemSpec spec = make_quadratic_linear(2);
  SolverConfig config;
  config.eta0 = 1.0;
  config.eta_final = 0.343;
  config.omega = 0.7;
  config.steps_per_round = 4;
  config.mode = Mode::convex;
  const auto oracle = make_oracle(spec, NoiseModel::uniform(spec.m, 0.001), OracleKind::zeroth_order);
  Rng rng(1);
  const RunReport report = restart_run(spec, config, *oracle, rng);
  bool rounds_ok = report.eta_schedule.size() == 3;
  for (std::size_t k = 0; rounds_ok && k < 3; ++k)
    rounds_ok = report.eta_schedule[k].eta == etas[k];
  const std::int64_t total_steps = static_cast<std::int64_t>(K) * config.steps_per_round;
  const double delta = per_step_confidence(config.delta_hat, spec.m, total_steps);
  const double closed = config.delta_hat / (spec.m * static_cast<double>(total_steps));
  const double rel = std::abs(delta - closed) / closed;
  verdict(7, K == 3 && etas_ok && rounds_ok && rel <= std::numeric_limits<double>::epsilon(),
          format("K=%d, eta = (%.17g, %.17g, %.17g), run rounds %zu, delta %.6e rel err %.1e",
                 K, etas.size() > 0 ? etas[0] : 0.0, etas.size() > 1 ? etas[1] : 0.0,
                 etas.size() > 2 ? etas[2] : 0.0, report.eta_schedule.size(), delta, rel));
}

void kkt_certificate_check() {
  const ProblemSpec spec = make_rosenbrock(2);
  SolverConfig config;
  config.eta0 = config.eta_final = 0.01;
  config.steps_per_round = 2000;
  config.mode = Mode::nonconvex;
  config.oracle_kind = OracleKind::first_order;
  const auto oracle = make_oracle(spec, NoiseModel::uniform(spec.m, 0.0), OracleKind::first_order);
  Rng rng(0);
  const RunReport report = lbsgd_run(spec, config, *oracle, rng);
  if (!report.kkt) {
    verdict(8, false, "no KKT certificate attached to the Rosenbrock run");
    return;
  }
  const KktCertificate& kkt = *report.kkt;
  double dev = 0.0;
  for (const IterateRecord& rec : report.trajectory)
    if (rec.x == report.output_x) dev = rec.deviation_bound;
  const double comp_err = (kkt.complementarity.array() - config.eta0).abs().maxCoeff();
  const double lambda_min = kkt.lambda.minCoeff();
  const bool pass = comp_err <= 1e-12 && lambda_min >= 0.0 &&
                    kkt.stationarity <= config.eta0 + dev;
  verdict(8, pass,
          format("complementarity max |c - eta| %.1e (<= 1e-12), min lambda %.4g, stationarity "
                 "%.4g <= eta + deviation bound %.4g",
                 comp_err, lambda_min, kkt.stationarity, config.eta0 + dev));
}

void convex_output() {
  ExperimentConfig config = preset_config("quadratic_linear", 4, 0.001);
  config.solver.mode = Mode::convex;
  const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
  int feasible = 0;
  int in_hull = 0;
  for (std::uint64_t seed : config.seeds) {
    const RunReport report = run_seed(instance, config, seed);
    if (instance.spec.max_constraint(report.output_x) <= 0.0) ++feasible;
    // Last round: the records sharing the final eta.
    const double last_eta = report.trajectory.back().eta;
    Vector weighted = Vector::Zero(instance.spec.d);
    double weight = 0.0;
    Vector lo = Vector::Constant(instance.spec.d, 1e300);
    Vector hi = Vector::Constant(instance.spec.d, -1e300);
    bool weights_ok = true;
    for (const IterateRecord& rec : report.trajectory) {
      if (rec.eta != last_eta) continue;
      weights_ok = weights_ok && rec.gamma >= 0.0;
      weighted += rec.gamma * rec.x;
      weight += rec.gamma;
      lo = lo.cwiseMin(rec.x);
      hi = hi.cwiseMax(rec.x);
    }
    const double tol = 1e-12;
    const bool box = ((report.output_x - lo).array() >= -tol).all() &&
                     ((hi - report.output_x).array() >= -tol).all();
    const bool combination = weight > 0.0 && (weighted / weight - report.output_x).norm() <= tol;
    if (weights_ok && box && combination) ++in_hull;
  }
  const int n = static_cast<int>(config.seeds.size());
  verdict(9, feasible == n && in_hull == n,
          format("weighted-average output feasible in %d/%d seeds, in iterate hull in %d/%d", feasible,
                 n, in_hull, n));
}

void toy_cmdp() {
  const ExperimentConfig config = preset_config("chain_cmdp", 0, 0.0);
  const BenchmarkInstance instance = make_benchmark(config.benchmark, config.params);
  const SoftmaxPolicyProblem& p = *instance.cmdp;
  const TabularCmdp& mdp = p.cmdp;
  const Matrix uniform = Matrix::Constant(mdp.n_states, mdp.n_actions, 1.0 / mdp.n_actions);
  const double base = evaluate_policy(mdp, uniform).ret;

  double worst_cost = -1e300;
  double worst_ratio = 1e300;
  Vector probe = Vector::Zero(p.dim);
  for (std::uint64_t seed : config.seeds) {
    const RunReport report = run_seed(instance, config, seed);
    for (const IterateRecord& rec : report.trajectory) {
      const double cost =
          evaluate_policy(mdp, softmax_policy(rec.x, mdp.n_states, mdp.n_actions)).cost;
      worst_cost = std::max(worst_cost, cost);
    }
    const double ret =
        evaluate_policy(mdp, softmax_policy(report.output_x, mdp.n_states, mdp.n_actions)).ret;
    worst_ratio = std::min(worst_ratio, ret / base);
    if (seed == config.seeds.front()) probe = report.output_x;
  }

  // Score-function gradients against central differences of the exact values.
  double worst_cos = 1.0;
  Rng rng(99);
  for (const Vector& x : {Vector(Vector::Zero(p.dim)), probe}) {
    const BatchEstimate est = cmdp_oracle(p, x, 100000, rng);
    for (int i = 0; i < 2; ++i) {
      const auto f = [&](const Vector& y) {
        const PolicyValue v = evaluate_policy(mdp, softmax_policy(y, mdp.n_states, mdp.n_actions));
        return i == 0 ? -v.ret : v.cost - mdp.threshold;
      };
      Vector fd(p.dim);
      const double h = 1e-6;
      for (int k = 0; k < p.dim; ++k) {
        Vector up = x, down = x;
        up[k] += h;
        down[k] -= h;
        fd[k] = (f(up) - f(down)) / (2.0 * h);
      }
      const Vector g = est.grad.col(i);
      worst_cos = std::min(worst_cos, g.dot(fd) / (g.norm() * fd.norm()));
    }
  }
  verdict(10, worst_cost <= mdp.threshold && worst_ratio >= 1.2 && worst_cos >= 0.99,
          format("max iterate cost %.4f (<= %.2f), min return ratio %.3f (>= 1.2, uniform %.4f), "
                 "min cosine %.4f (>= 0.99)",
                 worst_cost, mdp.threshold, worst_ratio, base, worst_cos));
}

void determinism() {
  bool identical = true;
  int files = 0;
  for (const std::string family : {"quadratic_linear", "gaussian_ellipsoid", "chain_cmdp"}) {
    ExperimentConfig config = preset_config(family, 2, 0.001);
    config.seeds = {3, 8};
    config.threads = 2;
    const fs::path a = fs::temp_directory_path() / ("lbsgd_accept_a_" + family);
    const fs::path b = fs::temp_directory_path() / ("lbsgd_accept_b_" + family);
    fs::remove_all(a);
    fs::remove_all(b);
    config.output_dir = a;
    run_experiment(config);
    config.output_dir = b;
    config.threads = 1;
    run_experiment(config);
    for (std::uint64_t seed : config.seeds) {
      const std::string name = "seed_" + std::to_string(seed) + ".csv";
      const std::string first = slurp(a / name);
      identical = identical && !first.empty() && first == slurp(b / name);
      ++files;
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  verdict(11, identical, format("%d CSV files byte-identical across reruns (threaded vs serial)", files));
}

}  // namespace

int main() {
  gradient_exactness();
  half_growth();
  const QuadraticTiming timing = quadratic_reproduction();
  runtime_flatness(timing);
  ellipsoid_boundary();
  zeroth_order_statistics();
  restart_schedule();
  kkt_certificate_check();
  convex_output();
  toy_cmdp();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
