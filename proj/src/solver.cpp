#include "lbsgd/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lbsgd {

namespace {

constexpr double kStallGamma = 1e-14;
constexpr int kStallSteps = 10;

struct RoundResult {
  Vector output;
  Vector warm_start;
  Termination termination = Termination::completed;
  int steps = 0;
};

// Gradient-norm upper bound for the sampling radius: the previous iteration's
// measured norm plus its confidence width, never above L_i.
Vector gradient_norm_bound(const ProblemSpec& spec, const BatchEstimate& batch, double z) {
  Vector bound(spec.m);
  for (int i = 1; i <= spec.m; ++i) {
    const double ucb = batch.grad.col(i).norm() + batch.b_hat[i] + z * batch.sigma_hat_n[i];
    bound[i - 1] = std::min(spec.L[i], ucb);
  }
  return bound;
}

class RoundRunner {
 public:
  RoundRunner(const ProblemSpec& spec, const SolverConfig& config, const Oracle& oracle,
              Rng& rng, RunReport& report, double delta_step)
      : spec_(spec),
        config_(config),
        oracle_(oracle),
        rng_(rng),
        report_(report),
        delta_step_(delta_step),
        z_(std::sqrt(std::log(1.0 / delta_step))) {}

  RoundResult run(const Vector& start, double eta, int steps, int batch_size) {
    RoundResult result;
    Vector x = start;
    Vector weighted_sum = Vector::Zero(spec_.d);
    double gamma_sum = 0.0;
    double best_g_norm = std::numeric_limits<double>::infinity();
    Vector best_x = start;
    int stall_count = 0;
    Vector grad_norm_est = spec_.L.tail(spec_.m);

    const RadiusRule radius = [&](const BatchEstimate& center) {
      if (config_.nu_override) return *config_.nu_override;
      const Vector alpha_bar = truncate_below(Vector(-center.value.tail(spec_.m)), config_.trunc_a);
      const Vector alpha_lower =
          truncate_below(Vector(alpha_bar - z_ * center.sigma_n.tail(spec_.m)), config_.trunc_a);
      return safe_sampling_radius(alpha_lower, grad_norm_est, spec_, eta);
    };

    for (int step = 0; step < steps; ++step) {
      if (report_.queries_total + oracle_.cost(batch_size) > config_.max_total_queries) {
        result.termination = Termination::budget_exhausted;
        report_.budget_exhausted = true;
        break;
      }
      BatchEstimate batch = oracle_.sample(x, batch_size, radius, rng_);
      const BarrierState state =
          compute_barrier_state(spec_, batch, eta, delta_step_, config_.trunc_a);
      report_.queries_total += batch.queries_used;

      IterateRecord rec;
      rec.t = static_cast<int>(report_.iterations_total);
      rec.queries_cum = report_.queries_total;
      rec.x = x;
      const Vector exact = spec_.values(x);
      rec.f0_true = exact[0];
      rec.max_constraint_true = spec_.m > 0 ? exact.tail(spec_.m).maxCoeff()
                                            : -std::numeric_limits<double>::infinity();
      rec.barrier_est = batch.value[0] - eta * state.alpha_bar.array().log().sum();
      rec.g_norm = state.g_norm;
      rec.gamma = state.gamma;
      rec.eta = eta;
      rec.deviation_bound = state.deviation_bound;
      rec.nu = batch.nu;
      rec.near_boundary = state.near_boundary;
      for (auto& point : batch.sample_points) {
        if (spec_.m > 0 && spec_.max_constraint(point) > 0.0) ++rec.violation_count;
        report_.query_points.push_back(std::move(point));
      }
      rec.violated = rec.violation_count > 0;
      report_.violations_total += rec.violation_count;
      report_.trajectory.push_back(std::move(rec));
      ++report_.iterations_total;
      ++result.steps;

      if (state.g_norm < best_g_norm) {
        best_g_norm = state.g_norm;
        best_x = x;
      }
      weighted_sum += state.gamma * x;
      gamma_sum += state.gamma;

      if (config_.mode == Mode::nonconvex && state.g_norm <= 0.75 * eta) {
        result.termination = Termination::stopping_rule;
        break;
      }

      x -= state.gamma * state.g;
      grad_norm_est = gradient_norm_bound(spec_, batch, z_);

      stall_count = state.gamma < kStallGamma ? stall_count + 1 : 0;
      if (stall_count >= kStallSteps) {
        result.termination = Termination::stalled;
        report_.stalled = true;
        break;
      }
    }

    if (config_.mode == Mode::nonconvex) {
      result.output = result.steps > 0 ? best_x : start;
      result.warm_start = x;
    } else {
      result.output = gamma_sum > 0.0 ? Vector(weighted_sum / gamma_sum) : x;
      result.warm_start = result.output;
    }
    return result;
  }

 private:
  const ProblemSpec& spec_;
  const SolverConfig& config_;
  const Oracle& oracle_;
  Rng& rng_;
  RunReport& report_;
  double delta_step_;
  double z_;
};

void attach_kkt(const ProblemSpec& spec, RunReport& report, double eta) {
  if (spec.grads && spec.strictly_feasible(report.output_x))
    report.kkt = kkt_certificate(spec, report.output_x, eta);
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::string to_string(OutputRule rule) {
  switch (rule) {
    case OutputRule::argmin_gnorm: return "argmin_gnorm";
    case OutputRule::weighted_average: return "weighted_average";
    case OutputRule::last_round: return "last_round";
  }
  return "?";
}

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::completed: return "completed";
    case Termination::stopping_rule: return "stopping_rule";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::stalled: return "stalled";
  }
  return "?";
}

double per_step_confidence(double delta_hat, int m, std::int64_t total_steps) {
  return delta_hat / (static_cast<double>(std::max(m, 1)) * static_cast<double>(total_steps));
}

int restart_rounds(double eta0, double eta_final, double omega) {
  const double ratio = std::log(eta0 / eta_final) / std::log(1.0 / omega);
  // Absorb rounding so that exact powers (0.7^3 = 0.343) give integral K.
  return std::max(0, static_cast<int>(std::ceil(ratio - 1e-9)));
}

std::vector<double> restart_etas(double eta0, double eta_final, double omega) {
  const int rounds = restart_rounds(eta0, eta_final, omega);
  std::vector<double> etas;
  double eta = eta0;
  for (int k = 1; k <= rounds; ++k) {
    eta *= omega;
    etas.push_back(eta);
  }
  return etas;
}

RunReport lbsgd_run(const ProblemSpec& spec, const SolverConfig& config, const Oracle& oracle,
                    Rng& rng) {
  config.validate();
  if (!spec.strictly_feasible(spec.x0))
    throw InfeasiblePointError("lbsgd_run: start point is not strictly feasible");

  RunReport report;
  const double delta = per_step_confidence(config.delta_hat, spec.m, config.steps_per_round);
  const auto start = std::chrono::steady_clock::now();
  RoundRunner runner(spec, config, oracle, rng, report, delta);
  const RoundResult round = runner.run(spec.x0, config.eta0, config.steps_per_round,
                                       config.batch_size);
  report.wall_time_seconds = elapsed_seconds(start);

  report.output_x = round.output;
  report.output_rule =
      config.mode == Mode::nonconvex ? OutputRule::argmin_gnorm : OutputRule::weighted_average;
  report.eta_schedule.push_back({config.eta0, round.steps, config.batch_size, round.termination});
  attach_kkt(spec, report, config.eta0);
  return report;
}

RunReport restart_run(const ProblemSpec& spec, const SolverConfig& config, const Oracle& oracle,
                      Rng& rng, const RoundSchedule& schedule) {
  config.validate();
  if (!spec.strictly_feasible(spec.x0))
    throw InfeasiblePointError("restart_run: start point is not strictly feasible");

  const std::vector<double> etas = restart_etas(config.eta0, config.eta_final, config.omega);
  std::vector<RoundPlan> plans;
  std::int64_t total_steps = 0;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    RoundPlan plan{config.steps_per_round, config.batch_size};
    if (schedule) plan = schedule(static_cast<int>(k + 1), etas[k]);
    if (plan.steps <= 0 || plan.batch_size <= 0)
      throw ConfigError("restart schedule produced a non-positive round size");
    total_steps += plan.steps;
    plans.push_back(plan);
  }

  RunReport report;
  report.output_rule = OutputRule::last_round;
  report.output_x = spec.x0;
  if (etas.empty()) return report;

  const double delta = per_step_confidence(config.delta_hat, spec.m, total_steps);
  const auto start = std::chrono::steady_clock::now();
  RoundRunner runner(spec, config, oracle, rng, report, delta);
  Vector x = spec.x0;
  double last_eta = etas.front();
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const RoundResult round = runner.run(x, etas[k], plans[k].steps, plans[k].batch_size);
    report.eta_schedule.push_back({etas[k], round.steps, plans[k].batch_size, round.termination});
    if (round.steps > 0) {
      report.output_x = round.output;
      last_eta = etas[k];
    }
    x = round.warm_start;
    if (round.termination == Termination::budget_exhausted) break;
  }
  report.wall_time_seconds = elapsed_seconds(start);
  attach_kkt(spec, report, last_eta);
  return report;
}

RunReport solve(const ProblemSpec& spec, const SolverConfig& config, const Oracle& oracle,
                Rng& rng) {
  if (config.mode != Mode::strongly_convex && config.eta_final == config.eta0)
    return lbsgd_run(spec, config, oracle, rng);
  return restart_run(spec, config, oracle, rng);
}

}  // namespace lbsgd
