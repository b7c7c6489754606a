#ifndef LBSGD_SOLVER_HPP
#define LBSGD_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lbsgd/barrier.hpp"
#include "lbsgd/oracle.hpp"
#include "lbsgd/problem.hpp"

namespace lbsgd {

/// One LB-SGD iteration as seen by the audit channel.
struct IterateRecord {
  int t = 0;
  std::int64_t queries_cum = 0;
  Vector x;
  double f0_true = 0.0;
  double max_constraint_true = 0.0;
  double barrier_est = 0.0;
  double g_norm = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  bool violated = false;
  int violation_count = 0;  // query points of this iteration with some fi > 0
  double deviation_bound = 0.0;
  double nu = 0.0;
  bool near_boundary = false;
};

enum class OutputRule { argmin_gnorm, weighted_average, last_round };
enum class Termination { completed, stopping_rule, budget_exhausted, stalled };

std::string to_string(OutputRule rule);
std::string to_string(Termination termination);

struct RoundInfo {
  double eta = 0.0;
  int steps = 0;
  int batch_size = 0;
  Termination termination = Termination::completed;
};

struct RunReport {
  std::vector<IterateRecord> trajectory;
  Vector output_x;
  OutputRule output_rule = OutputRule::argmin_gnorm;
  std::int64_t violations_total = 0;
  std::int64_t queries_total = 0;
  std::int64_t iterations_total = 0;
  double wall_time_seconds = 0.0;
  std::optional<KktCertificate> kkt;
  std::vector<RoundInfo> eta_schedule;
  /// Every raw query location in order (iterates and sphere samples).
  std::vector<Vector> query_points;
  bool budget_exhausted = false;
  bool stalled = false;
};

/// Per-event confidence delta_hat / (max(m, 1) * T_total).
double per_step_confidence(double delta_hat, int m, std::int64_t total_steps);

/// Number of restart rounds ceil(log(eta0 / eta_final) / log(1 / omega)).
int restart_rounds(double eta0, double eta_final, double omega);

/// Barrier parameters omega^k * eta0 for k = 1..K.
std::vector<double> restart_etas(double eta0, double eta_final, double omega);

/// Optional per-round override of (T_k, n_k); k is 1-based.
struct RoundPlan {
  int steps = 0;
  int batch_size = 0;
};
using RoundSchedule = std::function<RoundPlan(int k, double eta)>;

/// Single LB-SGD run at fixed eta = config.eta0 from spec.x0.
RunReport lbsgd_run(const ProblemSpec& spec, const SolverConfig& config,
                    const Oracle& oracle, Rng& rng);

/// Restarts with geometrically decreasing eta, warm-starting every round at
/// the previous round's output (weighted average in convex modes, last
/// iterate otherwise).
RunReport restart_run(const ProblemSpec& spec, const SolverConfig& config,
                      const Oracle& oracle, Rng& rng,
                      const RoundSchedule& schedule = {});

/// lbsgd_run when eta0 == eta_final and the mode is not strongly convex,
/// restart_run otherwise.
RunReport solve(const ProblemSpec& spec, const SolverConfig& config, const Oracle& oracle,
                Rng& rng);

}  // namespace lbsgd

#endif  // LBSGD_SOLVER_HPP
