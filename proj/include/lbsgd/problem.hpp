#ifndef LBSGD_PROBLEM_HPP
#define LBSGD_PROBLEM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lbsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ScalarFunction = std::function<double(const Vector&)>;
using GradientFunction = std::function<Vector(const Vector&)>;

/// Raised when a point outside the strict interior is passed where one is required.
class InfeasiblePointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for malformed configurations and out-of-range parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Extended-MFCQ constants. Only used by diagnostics.
struct MfcqConstants {
  double l = 0.0;
  double rho = 0.0;
};

/// Smooth constrained problem  min f0(x)  s.t.  fi(x) <= 0, i = 1..m.
///
/// Index 0 of `funcs`, `grads`, `M` and `L` is the objective; indices 1..m are
/// the constraints. Functions must be pure so one instance can be shared by
/// concurrent runs.
struct ProblemSpec {
  std::string name;
  int d = 0;
  int m = 0;
  std::vector<ScalarFunction> funcs;
  std::optional<std::vector<GradientFunction>> grads;
  Vector M;  // smoothness constants, size m+1
  Vector L;  // Lipschitz constants, size m+1
  double R = 1.0;
  Vector x0;
  double beta = 0.0;
  double beta_hat = 0.0;
  std::optional<MfcqConstants> mfcq;
  /// Known optimal value, when the benchmark has a closed form.
  std::optional<double> f_star;

  /// All m+1 exact function values at x.
  Vector values(const Vector& x) const;
  /// Exact gradients as a d x (m+1) matrix; requires `grads`.
  Matrix gradients(const Vector& x) const;
  /// max_i fi(x) over constraints, -inf when m = 0.
  double max_constraint(const Vector& x) const;
  bool strictly_feasible(const Vector& x) const;
};

enum class Mode { nonconvex, convex, strongly_convex };
enum class OracleKind { first_order, zeroth_order };

std::string to_string(Mode mode);
std::string to_string(OracleKind kind);
Mode parse_mode(const std::string& text);
OracleKind parse_oracle_kind(const std::string& text);

struct SolverConfig {
  double eta0 = 0.1;
  double eta_final = 0.1;
  double omega = 0.7;
  int steps_per_round = 7;
  int batch_size = 1;
  double delta_hat = 0.05;
  double trunc_a = 1e-8;
  Mode mode = Mode::nonconvex;
  OracleKind oracle_kind = OracleKind::zeroth_order;
  std::optional<double> nu_override;
  std::int64_t max_total_queries = 1'000'000;
  std::uint64_t seed = 0;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

/// Primal-dual pair built from the barrier multipliers lambda_i = eta / (-fi(x)).
struct KktCertificate {
  Vector x;
  Vector lambda;
  double stationarity = 0.0;
  Vector complementarity;
};

/// Checks the construction invariants of `spec`; one message per violation.
std::vector<std::string> validate_problem(const ProblemSpec& spec);

/// Central-difference gradient with step 1e-6 * (1 + |x|).
Vector finite_difference_gradient(const ScalarFunction& f, const Vector& x);

/// Relative gradient mismatch |g - fd| / max(1, |g|).
double gradient_check_error(const ScalarFunction& f, const GradientFunction& g,
                            const Vector& x);

/// Builds the certificate from exact gradients (spec.grads required).
KktCertificate kkt_certificate(const ProblemSpec& spec, const Vector& x,
                               double eta);

/// Builds the certificate from externally estimated gradients (d x (m+1)).
KktCertificate kkt_certificate(const ProblemSpec& spec, const Vector& x,
                               double eta, const Matrix& gradients);

}  // namespace lbsgd

#endif  // LBSGD_PROBLEM_HPP
