#include "lbsgd/benchmarks.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace lbsgd {

namespace {

constexpr double kRosenbrockR1 = 0.1;
constexpr double kRosenbrockR2 = 0.2;
constexpr double kRosenbrockShift = -0.05;
// Rosenbrock M0 is the exact spectral norm of its constant Hessian times this.
constexpr double kSmoothnessSafetyFactor = 1.5;

int param_int(const ParamMap& params, const std::string& key, int fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : std::stoi(it->second);
}

double param_double(const ParamMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : std::stod(it->second);
}

}  // namespace

ProblemSpec make_quadratic_linear(int d) {
  if (d < 1) throw ConfigError("quadratic_linear: d must be at least 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  const double scale = 4.0 * d;

  ProblemSpec spec;
  spec.name = "quadratic_linear";
  spec.d = d;
  spec.m = 2 * d;
  spec.funcs.push_back([scale](const Vector& x) {
    return (x.array() - 2.0).matrix().squaredNorm() / scale;
  });
  std::vector<GradientFunction> grads;
  grads.push_back([scale](const Vector& x) -> Vector {
    return 2.0 * (x.array() - 2.0).matrix() / scale;
  });
  for (int sign : {1, -1}) {
    for (int k = 0; k < d; ++k) {
      spec.funcs.push_back([=](const Vector& x) { return sign * x[k] - bound; });
      grads.push_back([=](const Vector&) -> Vector {
        Vector g = Vector::Zero(d);
        g[k] = sign;
        return g;
      });
    }
  }
  spec.grads = std::move(grads);

  spec.M = Vector::Zero(spec.m + 1);
  spec.M[0] = 1.0 / (2.0 * d);
  spec.L = Vector::Ones(spec.m + 1);
  // |grad f0| is largest at the box corner farthest from (2, ..., 2).
  spec.L[0] = (2.0 + bound) * std::sqrt(static_cast<double>(d)) / (2.0 * d);
  spec.R = 2.0;
  spec.x0 = Vector::Zero(d);
  spec.beta = bound;
  spec.beta_hat = 2.0 * bound;
  spec.mfcq = MfcqConstants{bound, bound / 2.0};
  spec.f_star = quadratic_linear_optimum(d);
  return spec;
}

double quadratic_linear_optimum(int d) {
  const double clipped = 2.0 - 1.0 / std::sqrt(static_cast<double>(d));
  return d * clipped * clipped / (4.0 * d);
}

Matrix rosenbrock_hessian(int d) {
  Matrix H = Matrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    H(i, i) += 200.0 - 2.0;
    H(i + 1, i + 1) += 200.0;
    H(i, i + 1) -= 200.0;
    H(i + 1, i) -= 200.0;
  }
  return H;
}

ProblemSpec make_rosenbrock(int d) {
  if (d < 2) throw ConfigError("rosenbrock: d must be at least 2");
  const double r1_sq = kRosenbrockR1 * kRosenbrockR1;
  const double r2_sq = kRosenbrockR2 * kRosenbrockR2;
  const double shift_sq = d * kRosenbrockShift * kRosenbrockShift;
  const double beta = std::min(r1_sq, r2_sq - shift_sq);
  if (!(beta > 0.0))
    throw ConfigError("rosenbrock: origin is not strictly feasible for d = " + std::to_string(d));

  const Vector center = Vector::Constant(d, kRosenbrockShift);
  ProblemSpec spec;
  spec.name = "rosenbrock";
  spec.d = d;
  spec.m = 2;
  spec.funcs.push_back([d](const Vector& x) {
    double f = 0.0;
    for (int i = 0; i + 1 < d; ++i) {
      const double diff = x[i] - x[i + 1];
      f += 100.0 * diff * diff - (1.0 - x[i]) * (1.0 - x[i]);
    }
    return f;
  });
  spec.funcs.push_back([r1_sq](const Vector& x) { return x.squaredNorm() - r1_sq; });
  spec.funcs.push_back(
      [center, r2_sq](const Vector& x) { return (x - center).squaredNorm() - r2_sq; });

  std::vector<GradientFunction> grads;
  grads.push_back([d](const Vector& x) -> Vector {
    Vector g = Vector::Zero(d);
    for (int i = 0; i + 1 < d; ++i) {
      const double diff = x[i] - x[i + 1];
      g[i] += 200.0 * diff + 2.0 * (1.0 - x[i]);
      g[i + 1] -= 200.0 * diff;
    }
    return g;
  });
  grads.push_back([](const Vector& x) -> Vector { return 2.0 * x; });
  grads.push_back([center](const Vector& x) -> Vector { return 2.0 * (x - center); });
  spec.grads = std::move(grads);

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(rosenbrock_hessian(d), Eigen::EigenvaluesOnly);
  const double hessian_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  spec.M = Vector(3);
  spec.M << kSmoothnessSafetyFactor * hessian_norm, 2.0, 2.0;
  spec.L = Vector(3);
  spec.L << 2.0 * std::sqrt(d - 1.0) + kRosenbrockR1 * hessian_norm, 2.0 * kRosenbrockR1,
      2.0 * (kRosenbrockR1 + center.norm());
  spec.R = 2.0 * kRosenbrockR1;
  spec.x0 = Vector::Zero(d);
  spec.beta = beta;
  spec.beta_hat = r2_sq;
  return spec;
}

double ellipsoid_distance_to_origin(int d, double r) {
  const Vector center = Vector::Constant(d, 0.5 / std::sqrt(static_cast<double>(d)));
  Vector a = Vector::Constant(d, 1.2);
  a[0] = 3.0;
  // Projection of the origin: x(mu) - c = -(I + mu A)^{-1} c with mu >= 0
  // chosen so the point lies on the boundary.
  const auto residual = [&](double mu) {
    return (a.array() * center.array().square() / (1.0 + mu * a.array()).square()).sum() - r * r;
  };
  if (residual(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (residual(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  const Vector x = center.array() - center.array() / (1.0 + mu * a.array());
  return x.norm();
}

ProblemSpec make_gaussian_ellipsoid(int d, double r) {
  if (d < 2) throw ConfigError("gaussian_ellipsoid: d must be at least 2");
  if (!(r > 0.0)) throw ConfigError("gaussian_ellipsoid: r must be positive");
  const Vector center = Vector::Constant(d, 0.5 / std::sqrt(static_cast<double>(d)));
  Vector a = Vector::Constant(d, 1.2);
  a[0] = 3.0;
  const double r_sq = r * r;

  ProblemSpec spec;
  spec.name = "gaussian_ellipsoid";
  spec.d = d;
  spec.m = 1;
  spec.funcs.push_back([](const Vector& x) { return -std::exp(-4.0 * x.squaredNorm()); });
  spec.funcs.push_back([center, a, r_sq](const Vector& x) {
    const Vector diff = x - center;
    return diff.dot(a.cwiseProduct(diff)) - r_sq;
  });
  std::vector<GradientFunction> grads;
  grads.push_back([](const Vector& x) -> Vector {
    return 8.0 * std::exp(-4.0 * x.squaredNorm()) * x;
  });
  grads.push_back([center, a](const Vector& x) -> Vector {
    return 2.0 * a.cwiseProduct(x - center);
  });
  spec.grads = std::move(grads);

  // |Hess f0| = e^{-4t}(8, |8 - 64t|) along/orthogonal to x with t = |x|^2,
  // maximised at t = 0; the gradient norm 8 s e^{-4 s^2} peaks at s = 1/sqrt(8).
  spec.M = Vector(2);
  spec.M << 8.0, 6.0;
  spec.L = Vector(2);
  spec.L << 8.0 / std::sqrt(8.0) * std::exp(-0.5), 2.0 * std::sqrt(3.0) * r;
  spec.R = 2.0 * r / std::sqrt(1.2);
  spec.x0 = center;
  spec.beta = r_sq;
  spec.beta_hat = r_sq;
  const double dist = ellipsoid_distance_to_origin(d, r);
  spec.f_star = -std::exp(-4.0 * dist * dist);
  return spec;
}

BenchmarkInstance make_benchmark(const std::string& family, const ParamMap& params) {
  BenchmarkInstance inst;
  inst.family = family;
  if (family == "quadratic_linear") {
    inst.spec = make_quadratic_linear(param_int(params, "d", 2));
  } else if (family == "rosenbrock") {
    inst.spec = make_rosenbrock(param_int(params, "d", 2));
  } else if (family == "gaussian_ellipsoid") {
    inst.spec = make_gaussian_ellipsoid(param_int(params, "d", 2), param_double(params, "r", 0.5));
  } else if (family == "chain_cmdp") {
    ChainCmdpConfig cfg;
    cfg.episodes_per_estimate = param_int(params, "episodes", cfg.episodes_per_estimate);
    cfg.threshold = param_double(params, "threshold", cfg.threshold);
    cfg.horizon = param_int(params, "horizon", cfg.horizon);
    cfg.discount = param_double(params, "discount", cfg.discount);
    inst.cmdp = std::make_shared<SoftmaxPolicyProblem>(make_chain_cmdp(cfg));
    inst.spec = cmdp_problem_spec(*inst.cmdp);
  } else {
    throw ConfigError("unknown benchmark family '" + family + "'");
  }
  return inst;
}

std::vector<std::string> benchmark_families() {
  return {"quadratic_linear", "rosenbrock", "gaussian_ellipsoid", "chain_cmdp"};
}

}  // namespace lbsgd
