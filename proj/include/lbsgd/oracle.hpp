#ifndef LBSGD_ORACLE_HPP
#define LBSGD_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "lbsgd/problem.hpp"

namespace lbsgd {

using Rng = std::mt19937_64;

/// Per-function noise scales. All vectors have length m+1.
struct NoiseModel {
  Vector sigma;      // value noise std
  Vector sigma_hat;  // gradient noise std (first-order oracle)
  Vector b_hat;      // gradient bias bound (first-order oracle)

  static NoiseModel uniform(int m, double sigma, double sigma_hat = 0.0,
                            double b_hat = 0.0);
  void validate(int m) const;
};

/// Averaged oracle output at one point.
struct BatchEstimate {
  Vector value;        // F^i_n, size m+1
  Matrix grad;         // G^i_n as columns, d x (m+1)
  Vector sigma_n;      // value noise after averaging
  Vector sigma_hat_n;  // gradient noise after averaging
  Vector b_hat;        // gradient bias bound
  std::int64_t queries_used = 0;
  std::vector<Vector> sample_points;
  double nu = 0.0;     // sampling radius, zero for first-order batches
  Matrix center_draws; // n x (m+1) individual centre values, zeroth-order only
};

/// Uniform direction on the unit sphere in R^d (normalised Gaussian).
Vector sample_unit_sphere(int d, Rng& rng);

BatchEstimate first_order_batch(const ProblemSpec& spec, const NoiseModel& noise,
                                const Vector& x, int n, Rng& rng);

/// Centre measurements F^i(x, xi^-_j) only: `value`, `sigma_n`,
/// `center_draws` and the centre sample point are filled.
BatchEstimate zo_center_values(const ProblemSpec& spec, const NoiseModel& noise,
                               const Vector& x, int n, Rng& rng);

/// Completes a centre batch with n two-point sphere differences of radius nu.
BatchEstimate zo_complete(const ProblemSpec& spec, const NoiseModel& noise,
                          BatchEstimate center, const Vector& x, double nu,
                          Rng& rng);

/// Two-point zeroth-order estimator: centre values then sphere differences.
BatchEstimate zo_batch(const ProblemSpec& spec, const NoiseModel& noise,
                       const Vector& x, double nu, int n, Rng& rng);

/// Upper bound on E|G_nu,n - grad f_nu|^2 with L_i standing in for |grad f_i(x)|.
double zo_variance_bound(int d, double L, double M, double sigma, double nu, int n);

/// Largest radius keeping every sphere sample feasible and the estimator bias
/// within the solver's tolerance. Terms with a zero denominator are dropped;
/// the result is floored at 1e-12.
double safe_sampling_radius(const Vector& alpha_lower, const Vector& grad_norm_est,
                            const ProblemSpec& spec, double eta);

/// Called with the centre batch before sphere sampling; returns the radius.
using RadiusRule = std::function<double(const BatchEstimate& center)>;

/// Stochastic oracle the solver draws batches from.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual BatchEstimate sample(const Vector& x, int n, const RadiusRule& radius,
                               Rng& rng) const = 0;
  /// Raw query count of one batch of size n.
  virtual std::int64_t cost(int n) const = 0;
  virtual bool needs_radius() const { return false; }
};

class FirstOrderOracle final : public Oracle {
 public:
  FirstOrderOracle(const ProblemSpec& spec, NoiseModel noise);
  BatchEstimate sample(const Vector& x, int n, const RadiusRule& radius,
                       Rng& rng) const override;
  std::int64_t cost(int n) const override;

 private:
  const ProblemSpec* spec_;
  NoiseModel noise_;
};

class ZerothOrderOracle final : public Oracle {
 public:
  ZerothOrderOracle(const ProblemSpec& spec, NoiseModel noise);
  BatchEstimate sample(const Vector& x, int n, const RadiusRule& radius,
                       Rng& rng) const override;
  std::int64_t cost(int n) const override;
  bool needs_radius() const override { return true; }

 private:
  const ProblemSpec* spec_;
  NoiseModel noise_;
};

std::unique_ptr<Oracle> make_oracle(const ProblemSpec& spec, const NoiseModel& noise,
                                    OracleKind kind);

}  // namespace lbsgd

#endif  // LBSGD_ORACLE_HPP
