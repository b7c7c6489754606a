#ifndef LBSGD_BARRIER_HPP
#define LBSGD_BARRIER_HPP

// Log-barrier quantities for one LB-SGD iteration. The pure math is written
// as templates over Eigen expressions so it works for any scalar type and
// accepts blocks/maps without copies; the batch-level helpers are double.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "lbsgd/oracle.hpp"
#include "lbsgd/problem.hpp"

namespace lbsgd {

/// f0 + eta * sum_i -log(-fi). `values` holds f0..fm.
template <typename Derived>
typename Derived::Scalar barrier_value(const Eigen::MatrixBase<Derived>& values,
                                       typename Derived::Scalar eta) {
  using std::log;
  using Scalar = typename Derived::Scalar;
  Scalar sum(0);
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (!(values[i] < Scalar(0)))
      throw std::domain_error("barrier_value: constraint value is not negative");
    sum -= log(-values[i]);
  }
  return values[0] + eta * sum;
}

/// Exact barrier gradient grad f0 + eta * sum_i grad fi / (-fi).
/// `grads` is d x (m+1) with one gradient per column.
template <typename DerivedV, typename DerivedG>
Eigen::Matrix<typename DerivedG::Scalar, Eigen::Dynamic, 1> barrier_gradient_exact(
    const Eigen::MatrixBase<DerivedV>& values, const Eigen::MatrixBase<DerivedG>& grads,
    typename DerivedG::Scalar eta) {
  using Scalar = typename DerivedG::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = grads.col(0);
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (!(values[i] < Scalar(0)))
      throw std::domain_error("barrier_gradient_exact: constraint value is not negative");
    g += (eta / -values[i]) * grads.col(i);
  }
  return g;
}

/// [v]_a: values at or below the floor are replaced by it.
template <typename Derived>
auto truncate_below(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar floor) {
  return v.cwiseMax(floor);
}

/// Local smoothness bound M0 + 10 eta sum Mi/alpha_i + 8 eta sum theta_i^2/alpha_i^2.
/// `M` has m+1 entries, `alpha_lower` and `theta_hat` have m.
template <typename DM, typename DA, typename DT>
typename DM::Scalar m2_estimate(const Eigen::MatrixBase<DM>& M, typename DM::Scalar eta,
                                const Eigen::MatrixBase<DA>& alpha_lower,
                                const Eigen::MatrixBase<DT>& theta_hat) {
  using Scalar = typename DM::Scalar;
  const Eigen::Index m = alpha_lower.size();
  if (m == 0) return M[0];
  const auto alpha = alpha_lower.array();
  const Scalar smooth_term = (M.tail(m).array() / alpha).sum();
  const Scalar direction_term = (theta_hat.array().square() / alpha.square()).sum();
  return M[0] + Scalar(10) * eta * smooth_term + Scalar(8) * eta * direction_term;
}

/// Adaptive safe step: min{ min_i alpha_i / (2 theta_i + sqrt(alpha_i Mi)) / |g|, 1/M2 }.
/// A constraint whose denominator is zero imposes no cap. Zero when |g| = 0.
template <typename DA, typename DT, typename DM>
typename DA::Scalar step_size(const Eigen::MatrixBase<DA>& alpha_lower,
                              const Eigen::MatrixBase<DT>& theta_hat,
                              const Eigen::MatrixBase<DM>& M,
                              typename DA::Scalar m2_hat, typename DA::Scalar g_norm) {
  using std::sqrt;
  using Scalar = typename DA::Scalar;
  if (!(g_norm > Scalar(0))) return Scalar(0);
  Scalar gamma = Scalar(1) / m2_hat;
  for (Eigen::Index i = 0; i < alpha_lower.size(); ++i) {
    const Scalar den = Scalar(2) * std::abs(theta_hat[i]) + sqrt(alpha_lower[i] * M[i + 1]);
    if (den > Scalar(0)) gamma = std::min(gamma, alpha_lower[i] / den / g_norm);
  }
  return gamma;
}

/// Barrier gradient estimate with truncated slacks.
struct BarrierGradient {
  Vector g;
  Vector alpha_bar;  // max(-F^i_n, a), size m
  bool truncated = false;
};

BarrierGradient barrier_gradient(const BatchEstimate& batch, double eta, double trunc_a);

struct ConfidenceBounds {
  Vector alpha_lower;  // size m
  Vector theta_hat;    // size m
  bool near_boundary = false;
};

/// Lower slack bounds and upper directional-derivative bounds at confidence
/// 1 - delta_step. Lower bounds at or below `trunc_a` are clamped to it.
ConfidenceBounds confidence_bounds(const BatchEstimate& batch, const Vector& alpha_bar,
                                   const Vector& g, double delta_step, double trunc_a);

/// High-probability bound on |g - grad B_eta|, with alpha_lower standing in
/// for the unknown true slack.
double deviation_bound(const BatchEstimate& batch, const Vector& alpha_bar,
                       const Vector& alpha_lower, const Vector& L, double eta,
                       double delta_step);

/// Everything derived at one iterate.
struct BarrierState {
  double eta = 0.0;
  Vector alpha_bar;
  Vector alpha_lower;
  Vector theta_hat;
  Vector g;
  double g_norm = 0.0;
  double m2_hat = 0.0;
  double gamma = 0.0;
  double delta_step = 0.0;
  double deviation_bound = 0.0;
  bool near_boundary = false;
};

/// Runs barrier_gradient -> confidence_bounds -> m2_estimate -> step_size ->
/// deviation_bound in that order.
BarrierState compute_barrier_state(const ProblemSpec& spec, const BatchEstimate& batch,
                                   double eta, double delta_step, double trunc_a);

/// Keeping-distance constant c and step floor C. Empty without MFCQ metadata.
struct StepFloorConstants {
  std::optional<double> c;
  std::optional<double> C;
};

StepFloorConstants step_floor_constants(const ProblemSpec& spec, double eta);

/// Optimality gap implied by an eta-accurate barrier minimiser (convex case).
/// Throws ConfigError when eta > beta / 2.
double convex_gap_bound(const ProblemSpec& spec, double eta);

}  // namespace lbsgd

#endif  // LBSGD_BARRIER_HPP
