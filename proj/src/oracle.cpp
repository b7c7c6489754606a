#include "lbsgd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbsgd {

NoiseModel NoiseModel::uniform(int m, double sigma, double sigma_hat, double b_hat) {
  NoiseModel noise;
  noise.sigma = Vector::Constant(m + 1, sigma);
  noise.sigma_hat = Vector::Constant(m + 1, sigma_hat);
  noise.b_hat = Vector::Constant(m + 1, b_hat);
  return noise;
}

void NoiseModel::validate(int m) const {
  if (sigma.size() != m + 1 || sigma_hat.size() != m + 1 || b_hat.size() != m + 1)
    throw ConfigError("noise model must have m+1 entries per field");
  if ((sigma.array() < 0.0).any() || (sigma_hat.array() < 0.0).any() ||
      (b_hat.array() < 0.0).any())
    throw ConfigError("noise scales must be non-negative");
}

Vector sample_unit_sphere(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector s(d);
  double norm = 0.0;
  do {
    for (int k = 0; k < d; ++k) s[k] = normal(rng);
    norm = s.norm();
  } while (norm == 0.0);
  return s / norm;
}

BatchEstimate first_order_batch(const ProblemSpec& spec, const NoiseModel& noise,
                                const Vector& x, int n, Rng& rng) {
  const int m = spec.m;
  const int d = spec.d;
  const Vector exact_values = spec.values(x);
  const Matrix exact_grads = spec.gradients(x);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::normal_distribution<double> normal(0.0, 1.0);
  BatchEstimate batch;
  batch.value = Vector::Zero(m + 1);
  batch.grad = Matrix::Zero(d, m + 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= m; ++i) {
      batch.value[i] += exact_values[i] + noise.sigma[i] * normal(rng);
      for (int k = 0; k < d; ++k)
        batch.grad(k, i) += exact_grads(k, i) + noise.sigma_hat[i] * inv_sqrt_d * normal(rng);
    }
  }
  batch.value /= n;
  batch.grad /= n;

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  batch.sigma_n = noise.sigma / sqrt_n;
  batch.sigma_hat_n = noise.sigma_hat / sqrt_n;
  batch.b_hat = noise.b_hat;
  batch.queries_used = static_cast<std::int64_t>(n) * (m + 1);
  batch.sample_points.push_back(x);
  return batch;
}

BatchEstimate zo_center_values(const ProblemSpec& spec, const NoiseModel& noise,
                               const Vector& x, int n, Rng& rng) {
  const int m = spec.m;
  const Vector exact_values = spec.values(x);
  std::normal_distribution<double> normal(0.0, 1.0);

  BatchEstimate batch;
  batch.center_draws = Matrix(n, m + 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= m; ++i)
      batch.center_draws(j, i) = exact_values[i] + noise.sigma[i] * normal(rng);
  batch.value = batch.center_draws.colwise().mean().transpose();
  batch.grad = Matrix::Zero(spec.d, m + 1);
  batch.sigma_n = noise.sigma / std::sqrt(static_cast<double>(n));
  batch.queries_used = static_cast<std::int64_t>(n) * (m + 1);
  batch.sample_points.push_back(x);
  return batch;
}

double zo_variance_bound(int d, double L, double M, double sigma, double nu, int n) {
  const double dd = d;
  return 3.0 / n * (dd * L * L + dd * dd * M * M * nu * nu / 4.0) +
         4.0 * dd * dd * sigma * sigma / (n * nu * nu);
}

BatchEstimate zo_complete(const ProblemSpec& spec, const NoiseModel& noise,
                          BatchEstimate center, const Vector& x, double nu,
                          Rng& rng) {
  const int m = spec.m;
  const int d = spec.d;
  const Matrix& minus = center.center_draws;
  const int n = static_cast<int>(minus.rows());
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix grad = Matrix::Zero(d, m + 1);
  for (int j = 0; j < n; ++j) {
    const Vector s = sample_unit_sphere(d, rng);
    Vector probe = x + nu * s;
    const Vector plus = spec.values(probe);
    for (int i = 0; i <= m; ++i) {
      const double noisy_plus = plus[i] + noise.sigma[i] * normal(rng);
      grad.col(i) += ((noisy_plus - minus(j, i)) / nu) * s;
    }
    center.sample_points.push_back(std::move(probe));
  }
  center.grad = grad * (static_cast<double>(d) / n);

  center.b_hat.resize(m + 1);
  center.sigma_hat_n.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    center.b_hat[i] = nu * spec.M[i];
    center.sigma_hat_n[i] =
        std::sqrt(zo_variance_bound(d, spec.L[i], spec.M[i], noise.sigma[i], nu, n));
  }
  center.queries_used += static_cast<std::int64_t>(n) * (m + 1);
  center.nu = nu;
  return center;
}

BatchEstimate zo_batch(const ProblemSpec& spec, const NoiseModel& noise,
                       const Vector& x, double nu, int n, Rng& rng) {
  return zo_complete(spec, noise, zo_center_values(spec, noise, x, n, rng), x, nu, rng);
}

double safe_sampling_radius(const Vector& alpha_lower, const Vector& grad_norm_est,
                            const ProblemSpec& spec, double eta) {
  const int m = spec.m;
  double nu = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= m; ++i) {
    const double alpha = alpha_lower[i - 1];
    const double Mi = spec.M[i];
    const double feasible_den = 2.0 * grad_norm_est[i - 1] + std::sqrt(alpha * Mi);
    if (feasible_den > 0.0) nu = std::min(nu, alpha / feasible_den);
    if (Mi > 0.0) nu = std::min(nu, alpha / (2.0 * m * Mi * spec.R));
  }
  if (spec.M[0] > 0.0) nu = std::min(nu, eta / (2.0 * std::max(m, 1) * spec.M[0]));
  if (!std::isfinite(nu)) nu = spec.R;
  return std::max(nu, 1e-12);
}

FirstOrderOracle::FirstOrderOracle(const ProblemSpec& spec, NoiseModel noise)
    : spec_(&spec), noise_(std::move(noise)) {
  noise_.validate(spec.m);
  if (!spec.grads) throw ConfigError(spec.name + ": first-order oracle needs gradients");
}

BatchEstimate FirstOrderOracle::sample(const Vector& x, int n, const RadiusRule&,
                                       Rng& rng) const {
  return first_order_batch(*spec_, noise_, x, n, rng);
}

std::int64_t FirstOrderOracle::cost(int n) const {
  return static_cast<std::int64_t>(n) * (spec_->m + 1);
}

ZerothOrderOracle::ZerothOrderOracle(const ProblemSpec& spec, NoiseModel noise)
    : spec_(&spec), noise_(std::move(noise)) {
  noise_.validate(spec.m);
}

BatchEstimate ZerothOrderOracle::sample(const Vector& x, int n, const RadiusRule& radius,
                                        Rng& rng) const {
  BatchEstimate center = zo_center_values(*spec_, noise_, x, n, rng);
  const double nu = radius(center);
  return zo_complete(*spec_, noise_, std::move(center), x, nu, rng);
}

std::int64_t ZerothOrderOracle::cost(int n) const {
  return 2 * static_cast<std::int64_t>(n) * (spec_->m + 1);
}

std::unique_ptr<Oracle> make_oracle(const ProblemSpec& spec, const NoiseModel& noise,
                                    OracleKind kind) {
  if (kind == OracleKind::first_order)
    return std::make_unique<FirstOrderOracle>(spec, noise);
  return std::make_unique<ZerothOrderOracle>(spec, noise);
}

}  // namespace lbsgd
