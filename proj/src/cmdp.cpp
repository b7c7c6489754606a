#include <cmath>

#include "lbsgd/benchmarks.hpp"

namespace lbsgd {

namespace {

// Upper bounds on |grad| and |Hessian| of -return and cost over the parameter
// space of the default chain, from sampled Hessians with a 1.5x margin.
constexpr double kChainM0 = 0.9;
constexpr double kChainM1 = 0.45;
constexpr double kChainL0 = 1.55;
constexpr double kChainL1 = 0.8;
// Parameter-space radius used only by diagnostics; softmax parameters are unbounded.
constexpr double kChainRadius = 10.0;

constexpr double kProbTolerance = 1e-12;

// Per-step expected reward or cost under the policy, one entry per state.
Vector expected_per_state(const Matrix& table, const Matrix& policy) {
  return table.cwiseProduct(policy).rowwise().sum();
}

Matrix policy_transition(const TabularCmdp& cmdp, const Matrix& policy) {
  Matrix P = Matrix::Zero(cmdp.n_states, cmdp.n_states);
  for (int a = 0; a < cmdp.n_actions; ++a)
    P += policy.col(a).asDiagonal() * cmdp.transition[a];
  return P;
}

double discounted_total(const TabularCmdp& cmdp, const Matrix& policy, const Matrix& table) {
  const Matrix P = policy_transition(cmdp, policy);
  const Vector per_state = expected_per_state(table, policy);
  Eigen::RowVectorXd dist = cmdp.init_dist.transpose();
  double total = 0.0;
  double weight = 1.0;
  for (int t = 0; t < cmdp.horizon; ++t) {
    total += weight * dist.dot(per_state);
    dist = dist * P;
    weight *= cmdp.discount;
  }
  return total;
}

// Gradient of the discounted total of `table` w.r.t. softmax parameters:
// sum_t discount^t p_t(s) pi(b|s) (Q_t(s, b) - V_t(s)).
Vector discounted_gradient(const TabularCmdp& cmdp, const Matrix& policy, const Matrix& table) {
  const int S = cmdp.n_states;
  const int A = cmdp.n_actions;
  const int H = cmdp.horizon;
  const Matrix P = policy_transition(cmdp, policy);

  std::vector<Eigen::RowVectorXd> dists(H);
  dists[0] = cmdp.init_dist.transpose();
  for (int t = 1; t < H; ++t) dists[t] = dists[t - 1] * P;

  Vector grad = Vector::Zero(S * A);
  Vector v_next = Vector::Zero(S);
  for (int t = H - 1; t >= 0; --t) {
    Matrix q(S, A);
    for (int a = 0; a < A; ++a)
      q.col(a) = table.col(a) + cmdp.discount * cmdp.transition[a] * v_next;
    const Vector v = q.cwiseProduct(policy).rowwise().sum();
    const double weight = std::pow(cmdp.discount, t);
    for (int s = 0; s < S; ++s)
      for (int b = 0; b < A; ++b)
        grad[s * A + b] += weight * dists[t][s] * policy(s, b) * (q(s, b) - v[s]);
    v_next = v;
  }
  return grad;
}

int sample_index(const auto& probs, std::uniform_real_distribution<double>& unif, Rng& rng) {
  const double u = unif(rng);
  double acc = 0.0;
  const int last = static_cast<int>(probs.size()) - 1;
  for (int k = 0; k < last; ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return last;
}

}  // namespace

void TabularCmdp::validate() const {
  if (n_states <= 0 || n_actions <= 0 || horizon <= 0)
    throw ConfigError("cmdp: sizes must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("cmdp: discount must be in (0, 1]");
  if (static_cast<int>(transition.size()) != n_actions)
    throw ConfigError("cmdp: one transition matrix per action required");
  for (const Matrix& P : transition) {
    if (P.rows() != n_states || P.cols() != n_states)
      throw ConfigError("cmdp: transition matrix has wrong shape");
    if ((P.array() < 0.0).any() ||
        ((P.rowwise().sum().array() - 1.0).abs() > kProbTolerance).any())
      throw ConfigError("cmdp: transition rows must be probability vectors");
  }
  if (reward.rows() != n_states || reward.cols() != n_actions || cost.rows() != n_states ||
      cost.cols() != n_actions)
    throw ConfigError("cmdp: reward and cost must be S x A");
  if ((cost.array() < 0.0).any()) throw ConfigError("cmdp: costs must be non-negative");
  if (init_dist.size() != n_states || (init_dist.array() < 0.0).any() ||
      std::abs(init_dist.sum() - 1.0) > kProbTolerance)
    throw ConfigError("cmdp: init_dist must be a probability vector");
}

Matrix softmax_policy(const Vector& x, int n_states, int n_actions) {
  Matrix policy(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    const auto logits = x.segment(s * n_actions, n_actions);
    const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
    policy.row(s) = (e / e.sum()).transpose();
  }
  return policy;
}

PolicyValue evaluate_policy(const TabularCmdp& cmdp, const Matrix& policy) {
  return {discounted_total(cmdp, policy, cmdp.reward), discounted_total(cmdp, policy, cmdp.cost)};
}

PolicyGradient exact_policy_gradient(const TabularCmdp& cmdp, const Vector& x) {
  const Matrix policy = softmax_policy(x, cmdp.n_states, cmdp.n_actions);
  return {discounted_gradient(cmdp, policy, cmdp.reward),
          discounted_gradient(cmdp, policy, cmdp.cost)};
}

Matrix constant_action_policy(const TabularCmdp& cmdp, int action) {
  Matrix policy = Matrix::Zero(cmdp.n_states, cmdp.n_actions);
  policy.col(action).setOnes();
  return policy;
}

SoftmaxPolicyProblem make_chain_cmdp(const ChainCmdpConfig& config) {
  const int S = config.n_states;
  if (S < 2 || config.horizon <= 0 || config.episodes_per_estimate <= 0 ||
      config.risky_jump <= 0 || config.costly_states < 0)
    throw ConfigError("chain cmdp: sizes must be positive");
  if (!(config.safe_advance_prob > 0.0 && config.safe_advance_prob <= 1.0))
    throw ConfigError("chain cmdp: safe_advance_prob must be in (0, 1]");

  TabularCmdp cmdp;
  cmdp.n_states = S;
  cmdp.n_actions = 2;
  cmdp.discount = config.discount;
  cmdp.horizon = config.horizon;
  cmdp.threshold = config.threshold;
  const int goal = S - 1;

  Matrix advance = Matrix::Zero(S, S);
  Matrix jump = Matrix::Zero(S, S);
  for (int s = 0; s < goal; ++s) {
    advance(s, s + 1) = config.safe_advance_prob;
    advance(s, s) += 1.0 - config.safe_advance_prob;
    jump(s, std::min(s + config.risky_jump, goal)) = 1.0;
  }
  advance(goal, goal) = 1.0;
  jump(goal, goal) = 1.0;
  cmdp.transition = {advance, jump};

  cmdp.reward = Matrix::Zero(S, 2);
  cmdp.reward.row(goal).setOnes();
  cmdp.cost = Matrix::Zero(S, 2);
  for (int s = 0; s < std::min(config.costly_states, S); ++s) cmdp.cost(s, 1) = 1.0;
  cmdp.init_dist = Vector::Zero(S);
  cmdp.init_dist[0] = 1.0;
  cmdp.validate();

  const Matrix uniform = Matrix::Constant(S, 2, 0.5);
  if (!(evaluate_policy(cmdp, uniform).cost < cmdp.threshold))
    throw ConfigError("chain cmdp: uniform policy violates the cost threshold");

  SoftmaxPolicyProblem problem;
  problem.cmdp = std::move(cmdp);
  problem.dim = S * 2;
  problem.episodes_per_estimate = config.episodes_per_estimate;
  return problem;
}

ProblemSpec cmdp_problem_spec(const SoftmaxPolicyProblem& problem) {
  const TabularCmdp cmdp = problem.cmdp;
  const int S = cmdp.n_states;
  const int A = cmdp.n_actions;

  ProblemSpec spec;
  spec.name = "chain_cmdp";
  spec.d = problem.dim;
  spec.m = 1;
  spec.funcs.push_back([cmdp, S, A](const Vector& x) {
    return -evaluate_policy(cmdp, softmax_policy(x, S, A)).ret;
  });
  spec.funcs.push_back([cmdp, S, A](const Vector& x) {
    return evaluate_policy(cmdp, softmax_policy(x, S, A)).cost - cmdp.threshold;
  });
  std::vector<GradientFunction> grads;
  grads.push_back([cmdp](const Vector& x) -> Vector { return -exact_policy_gradient(cmdp, x).ret; });
  grads.push_back([cmdp](const Vector& x) -> Vector { return exact_policy_gradient(cmdp, x).cost; });
  spec.grads = std::move(grads);

  spec.M = Vector(2);
  spec.M << kChainM0, kChainM1;
  spec.L = Vector(2);
  spec.L << kChainL0, kChainL1;
  spec.R = kChainRadius;
  spec.x0 = Vector::Zero(spec.d);
  spec.beta = -spec.funcs[1](spec.x0);
  spec.beta_hat = cmdp.threshold;
  return spec;
}

BatchEstimate cmdp_oracle(const SoftmaxPolicyProblem& problem, const Vector& x, int n, Rng& rng) {
  const TabularCmdp& cmdp = problem.cmdp;
  const int A = cmdp.n_actions;
  const int dim = problem.dim;
  const Matrix policy = softmax_policy(x, cmdp.n_states, A);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix values(n, 2);
  Matrix grad_sum = Matrix::Zero(dim, 2);
  Vector grad_sq_sum = Vector::Zero(2);
  std::vector<int> states(cmdp.horizon);
  std::vector<int> actions(cmdp.horizon);
  std::vector<double> rewards(cmdp.horizon);
  std::vector<double> costs(cmdp.horizon);
  Matrix episode_grad(dim, 2);

  for (int j = 0; j < n; ++j) {
    int s = sample_index(cmdp.init_dist, unif, rng);
    double weight = 1.0;
    for (int t = 0; t < cmdp.horizon; ++t) {
      const int a = sample_index(policy.row(s), unif, rng);
      states[t] = s;
      actions[t] = a;
      rewards[t] = weight * cmdp.reward(s, a);
      costs[t] = weight * cmdp.cost(s, a);
      s = sample_index(cmdp.transition[a].row(s), unif, rng);
      weight *= cmdp.discount;
    }
    // Score function with discounted reward-to-go.
    episode_grad.setZero();
    double ret_to_go = 0.0;
    double cost_to_go = 0.0;
    for (int t = cmdp.horizon - 1; t >= 0; --t) {
      ret_to_go += rewards[t];
      cost_to_go += costs[t];
      const int base = states[t] * A;
      for (int b = 0; b < A; ++b) {
        const double score = (b == actions[t] ? 1.0 : 0.0) - policy(states[t], b);
        episode_grad(base + b, 0) -= score * ret_to_go;
        episode_grad(base + b, 1) += score * cost_to_go;
      }
    }
    values(j, 0) = -ret_to_go;
    values(j, 1) = cost_to_go - cmdp.threshold;
    grad_sum += episode_grad;
    grad_sq_sum += episode_grad.colwise().squaredNorm().transpose();
  }

  BatchEstimate batch;
  const double nn = n;
  batch.value = values.colwise().mean().transpose();
  batch.grad = grad_sum / nn;
  batch.sigma_n = Vector::Zero(2);
  batch.sigma_hat_n = Vector::Zero(2);
  if (n > 1) {
    for (int i = 0; i < 2; ++i) {
      const double var = (values.col(i).array() - batch.value[i]).square().sum() / (nn - 1.0);
      const double grad_var =
          std::max(0.0, grad_sq_sum[i] - nn * batch.grad.col(i).squaredNorm()) / (nn - 1.0);
      batch.sigma_n[i] = std::sqrt(var / nn);
      batch.sigma_hat_n[i] = std::sqrt(grad_var / nn);
    }
  }
  batch.b_hat = Vector::Zero(2);
  batch.queries_used = n;
  batch.sample_points.push_back(x);
  return batch;
}

BatchEstimate CmdpOracle::sample(const Vector& x, int n, const RadiusRule&, Rng& rng) const {
  return cmdp_oracle(*problem_, x, n * problem_->episodes_per_estimate, rng);
}

}  // namespace lbsgd
