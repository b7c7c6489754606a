#ifndef LBSGD_BENCHMARKS_HPP
#define LBSGD_BENCHMARKS_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lbsgd/oracle.hpp"
#include "lbsgd/problem.hpp"

namespace lbsgd {

/// min |x - 2|^2 / (4d)  s.t.  |x_k| <= 1/sqrt(d), as m = 2d linear constraints.
ProblemSpec make_quadratic_linear(int d);

/// Closed-form optimum of make_quadratic_linear: clip (2, ..., 2) to the box.
double quadratic_linear_optimum(int d);

/// Constrained Rosenbrock-type objective on two balls (r1 = 0.1, r2 = 0.2).
/// Throws ConfigError when d < 2 or the origin is not strictly feasible.
ProblemSpec make_rosenbrock(int d);

/// Constant Hessian of the Rosenbrock objective.
Matrix rosenbrock_hessian(int d);

/// min -exp(-4|x|^2)  s.t.  <x - c, A (x - c)> <= r^2, A = diag(3, 1.2, ..., 1.2),
/// c = 0.5 * (1, ..., 1) / sqrt(d).
ProblemSpec make_gaussian_ellipsoid(int d, double r);

/// Euclidean distance from the origin to the ellipsoid of make_gaussian_ellipsoid.
double ellipsoid_distance_to_origin(int d, double r);

// ---------------------------------------------------------------------------
// Toy constrained MDP with a softmax policy.

struct TabularCmdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> transition;  // transition[a](s, s')
  Matrix reward;                   // S x A
  Matrix cost;                     // S x A
  double discount = 1.0;
  int horizon = 1;
  double threshold = 0.0;
  Vector init_dist;

  void validate() const;
};

struct ChainCmdpConfig {
  int n_states = 6;
  int horizon = 10;
  double discount = 0.9;
  double safe_advance_prob = 0.25;  // action 0 moves one state forward with this probability
  int risky_jump = 2;               // action 1 moves this many states forward
  int costly_states = 4;            // action 1 costs 1 in states [0, costly_states)
  double threshold = 1.8;
  int episodes_per_estimate = 1000;
};

struct SoftmaxPolicyProblem {
  TabularCmdp cmdp;
  int dim = 0;
  int episodes_per_estimate = 1;
};

/// Expected discounted return and cost of a stationary policy, exact by DP.
struct PolicyValue {
  double ret = 0.0;
  double cost = 0.0;
};

/// pi(a|s) = softmax_a x[s * A + a]; rows of the result sum to 1.
Matrix softmax_policy(const Vector& x, int n_states, int n_actions);

PolicyValue evaluate_policy(const TabularCmdp& cmdp, const Matrix& policy);

/// Exact gradients of return and cost w.r.t. the softmax parameters.
struct PolicyGradient {
  Vector ret;
  Vector cost;
};

PolicyGradient exact_policy_gradient(const TabularCmdp& cmdp, const Vector& x);

/// Greedy deterministic policy always taking `action`.
Matrix constant_action_policy(const TabularCmdp& cmdp, int action);

/// Builds the chain and checks by exact DP that the uniform policy is safe.
/// Throws ConfigError when it is not.
SoftmaxPolicyProblem make_chain_cmdp(const ChainCmdpConfig& config = {});

/// f0 = -return, f1 = cost - threshold, both by exact DP (audit channel).
ProblemSpec cmdp_problem_spec(const SoftmaxPolicyProblem& problem);

/// Monte-Carlo batch of n episodes with score-function gradients.
BatchEstimate cmdp_oracle(const SoftmaxPolicyProblem& problem, const Vector& x, int n,
                          Rng& rng);

/// Batch size n draws n * episodes_per_estimate episodes.
class CmdpOracle final : public Oracle {
 public:
  explicit CmdpOracle(const SoftmaxPolicyProblem& problem) : problem_(&problem) {}
  BatchEstimate sample(const Vector& x, int n, const RadiusRule& radius,
                       Rng& rng) const override;
  std::int64_t cost(int n) const override {
    return static_cast<std::int64_t>(n) * problem_->episodes_per_estimate;
  }

 private:
  const SoftmaxPolicyProblem* problem_;
};

// ---------------------------------------------------------------------------
// Name-based construction for configs and the CLI.

using ParamMap = std::map<std::string, std::string>;

/// A constructed benchmark; owns the CMDP when the family is chain_cmdp.
struct BenchmarkInstance {
  std::string family;
  ProblemSpec spec;
  std::shared_ptr<SoftmaxPolicyProblem> cmdp;
};

/// Families: quadratic_linear (d), rosenbrock (d), gaussian_ellipsoid (d, r),
/// chain_cmdp (episodes, threshold, horizon, discount).
BenchmarkInstance make_benchmark(const std::string& family, const ParamMap& params);

std::vector<std::string> benchmark_families();

}  // namespace lbsgd

#endif  // LBSGD_BENCHMARKS_HPP
