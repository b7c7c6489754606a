#include "lbsgd/barrier.hpp"

#include <cmath>

namespace lbsgd {

namespace {

double sqrt_log_inv(double delta) { return std::sqrt(std::log(1.0 / delta)); }

}  // namespace

BarrierGradient barrier_gradient(const BatchEstimate& batch, double eta, double trunc_a) {
  const Eigen::Index m = batch.value.size() - 1;
  BarrierGradient out;
  const Vector measured_slack = -batch.value.tail(m);
  out.alpha_bar = truncate_below(measured_slack, trunc_a);
  out.truncated = (measured_slack.array() <= trunc_a).any();
  out.g = batch.grad.col(0);
  for (Eigen::Index i = 0; i < m; ++i) out.g += (eta / out.alpha_bar[i]) * batch.grad.col(i + 1);
  return out;
}

ConfidenceBounds confidence_bounds(const BatchEstimate& batch, const Vector& alpha_bar,
                                   const Vector& g, double delta_step, double trunc_a) {
  const Eigen::Index m = alpha_bar.size();
  const double z = sqrt_log_inv(delta_step);
  const double g_norm = g.norm();
  const Vector direction = g_norm > 0.0 ? Vector(g / g_norm) : Vector::Zero(g.size());

  ConfidenceBounds out;
  out.alpha_lower = alpha_bar - z * batch.sigma_n.tail(m);
  out.near_boundary = (out.alpha_lower.array() <= trunc_a).any();
  out.alpha_lower = truncate_below(out.alpha_lower, trunc_a);

  const Vector projections = batch.grad.rightCols(m).transpose() * direction;
  out.theta_hat = projections.cwiseAbs() + batch.b_hat.tail(m) + z * batch.sigma_hat_n.tail(m);
  return out;
}

double deviation_bound(const BatchEstimate& batch, const Vector& alpha_bar,
                       const Vector& alpha_lower, const Vector& L, double eta,
                       double delta_step) {
  const Eigen::Index m = alpha_bar.size();
  const double z = sqrt_log_inv(delta_step);
  double bound = batch.b_hat[0] + batch.sigma_hat_n[0] * z;
  for (Eigen::Index i = 0; i < m; ++i) {
    bound += eta / alpha_bar[i] * (batch.b_hat[i + 1] + batch.sigma_hat_n[i + 1] * z);
    bound += L[i + 1] * eta * batch.sigma_n[i + 1] / (alpha_lower[i] * alpha_bar[i]) * z;
  }
  return bound;
}

BarrierState compute_barrier_state(const ProblemSpec& spec, const BatchEstimate& batch,
                                   double eta, double delta_step, double trunc_a) {
  BarrierState state;
  state.eta = eta;
  state.delta_step = delta_step;

  BarrierGradient bg = barrier_gradient(batch, eta, trunc_a);
  state.g = std::move(bg.g);
  state.alpha_bar = std::move(bg.alpha_bar);
  state.g_norm = state.g.norm();

  ConfidenceBounds cb = confidence_bounds(batch, state.alpha_bar, state.g, delta_step, trunc_a);
  state.alpha_lower = std::move(cb.alpha_lower);
  state.theta_hat = std::move(cb.theta_hat);
  state.near_boundary = cb.near_boundary || bg.truncated;

  state.m2_hat = m2_estimate(spec.M, eta, state.alpha_lower, state.theta_hat);
  state.gamma = step_size(state.alpha_lower, state.theta_hat, spec.M, state.m2_hat, state.g_norm);
  state.deviation_bound =
      deviation_bound(batch, state.alpha_bar, state.alpha_lower, spec.L, eta, delta_step);
  return state;
}

StepFloorConstants step_floor_constants(const ProblemSpec& spec, double eta) {
  StepFloorConstants out;
  if (!spec.mfcq) return out;
  const double L = spec.L.maxCoeff();
  const double M = spec.M.maxCoeff();
  const int m = spec.m;
  const double c = 0.5 * std::pow(spec.mfcq->l / (4.0 * L * (2 * m + 1)), m);
  const double ratio = M * c * eta / (L * L);
  const double den = std::max(4.0 + 5.0 * ratio, 1.0 + std::sqrt(ratio / 4.0));
  out.c = c;
  out.C = c / (2.0 * L * L * (1.0 + m / c)) / den;
  return out;
}

double convex_gap_bound(const ProblemSpec& spec, double eta) {
  if (eta > spec.beta / 2.0)
    throw ConfigError("convex_gap_bound: eta must not exceed beta / 2");
  const int m = spec.m;
  if (m == 0) return eta;
  const double L = spec.L.maxCoeff();
  return eta * (m + 1) +
         eta * m * std::log(2.0 * m * L * spec.R * spec.beta_hat / (eta * spec.beta));
}

}  // namespace lbsgd
