#include "lbsgd/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lbsgd {

Vector ProblemSpec::values(const Vector& x) const {
  Vector out(m + 1);
  for (int i = 0; i <= m; ++i) out[i] = funcs[i](x);
  return out;
}

Matrix ProblemSpec::gradients(const Vector& x) const {
  if (!grads) throw std::logic_error(name + ": exact gradients unavailable");
  Matrix out(d, m + 1);
  for (int i = 0; i <= m; ++i) out.col(i) = (*grads)[i](x);
  return out;
}

double ProblemSpec::max_constraint(const Vector& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= m; ++i) worst = std::max(worst, funcs[i](x));
  return worst;
}

bool ProblemSpec::strictly_feasible(const Vector& x) const {
  return max_constraint(x) < 0.0;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::nonconvex: return "nonconvex";
    case Mode::convex: return "convex";
    case Mode::strongly_convex: return "strongly_convex";
  }
  return "?";
}

std::string to_string(OracleKind kind) {
  return kind == OracleKind::first_order ? "first_order" : "zeroth_order";
}

Mode parse_mode(const std::string& text) {
  if (text == "nonconvex") return Mode::nonconvex;
  if (text == "convex") return Mode::convex;
  if (text == "strongly_convex") return Mode::strongly_convex;
  throw ConfigError("unknown mode '" + text + "'");
}

OracleKind parse_oracle_kind(const std::string& text) {
  if (text == "first_order") return OracleKind::first_order;
  if (text == "zeroth_order") return OracleKind::zeroth_order;
  throw ConfigError("unknown oracle kind '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive");
  if (!(eta_final > 0.0) || eta_final > eta0)
    throw ConfigError("eta_final must lie in (0, eta0]");
  if (!(omega > 0.0 && omega < 1.0)) throw ConfigError("omega must lie in (0, 1)");
  if (steps_per_round <= 0) throw ConfigError("steps_per_round must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(delta_hat > 0.0 && delta_hat < 1.0))
    throw ConfigError("delta_hat must lie in (0, 1)");
  if (!(trunc_a > 0.0)) throw ConfigError("trunc_a must be positive");
  if (nu_override && !(*nu_override > 0.0))
    throw ConfigError("nu must be positive");
  if (max_total_queries <= 0) throw ConfigError("max_total_queries must be positive");
}

Vector finite_difference_gradient(const ScalarFunction& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double gradient_check_error(const ScalarFunction& f, const GradientFunction& g,
                            const Vector& x) {
  const Vector exact = g(x);
  const Vector fd = finite_difference_gradient(f, x);
  return (exact - fd).norm() / std::max(1.0, exact.norm());
}

std::vector<std::string> validate_problem(const ProblemSpec& spec) {
  std::vector<std::string> issues;
  const auto sz = static_cast<std::size_t>(spec.m + 1);
  if (spec.d <= 0) issues.emplace_back("dimension must be positive");
  if (spec.m < 0) issues.emplace_back("constraint count must be non-negative");
  if (spec.funcs.size() != sz) {
    issues.emplace_back("expected m+1 functions");
    return issues;
  }
  if (spec.M.size() != spec.m + 1 || spec.L.size() != spec.m + 1) {
    issues.emplace_back("expected m+1 smoothness and Lipschitz constants");
  } else {
    if ((spec.M.array() < 0.0).any()) issues.emplace_back("negative smoothness constant");
    if ((spec.L.array() < 0.0).any()) issues.emplace_back("negative Lipschitz constant");
  }
  if (!(spec.R > 0.0)) issues.emplace_back("diameter R must be positive");
  if (!(spec.beta > 0.0)) issues.emplace_back("start margin beta must be positive");
  if (!(spec.beta_hat > 0.0)) issues.emplace_back("value bound beta_hat must be positive");
  if (spec.x0.size() != spec.d) {
    issues.emplace_back("start point has wrong dimension");
    return issues;
  }

  if (spec.m > 0 && !(spec.max_constraint(spec.x0) <= -spec.beta && spec.beta > 0.0)) {
    std::ostringstream msg;
    msg << "start margin violated: max_i f_i(x0) = " << spec.max_constraint(spec.x0)
        << " > -beta = " << -spec.beta;
    issues.push_back(msg.str());
  }

  if (spec.grads) {
    if (spec.grads->size() != sz) {
      issues.emplace_back("expected m+1 gradient functions");
    } else {
      for (int i = 0; i <= spec.m; ++i) {
        const double err = gradient_check_error(spec.funcs[i], (*spec.grads)[i], spec.x0);
        if (!(err <= 1e-5)) {
          std::ostringstream msg;
          msg << "gradient check failed for f" << i << ": relative error " << err;
          issues.push_back(msg.str());
        }
      }
    }
  }
  return issues;
}

KktCertificate kkt_certificate(const ProblemSpec& spec, const Vector& x,
                               double eta, const Matrix& gradients) {
  const Vector vals = spec.values(x);
  KktCertificate cert;
  cert.x = x;
  cert.lambda.resize(spec.m);
  cert.complementarity.resize(spec.m);
  Vector lagrangian_grad = gradients.col(0);
  for (int i = 1; i <= spec.m; ++i) {
    const double slack = -vals[i];
    if (!(slack > 0.0))
      throw InfeasiblePointError("kkt_certificate: constraint " + std::to_string(i) +
                                 " is not strictly satisfied");
    const double lambda = eta / slack;
    cert.lambda[i - 1] = lambda;
    cert.complementarity[i - 1] = lambda * slack;
    lagrangian_grad += lambda * gradients.col(i);
  }
  cert.stationarity = lagrangian_grad.norm();
  return cert;
}

KktCertificate kkt_certificate(const ProblemSpec& spec, const Vector& x,
                               double eta) {
  return kkt_certificate(spec, x, eta, spec.gradients(x));
}

}  // namespace lbsgd
