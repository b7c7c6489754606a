#include <doctest.h>

#include <cmath>

#include "lbsgd/benchmarks.hpp"
#include "lbsgd/oracle.hpp"

using namespace lbsgd;

namespace {

// f0 = |x|^2 and one constraint x_1 - 3 <= 0 in R^d.
ProblemSpec sphere_problem(int d) {
  ProblemSpec spec;
  spec.name = "sphere";
  spec.d = d;
  spec.m = 1;
  spec.funcs = {[](const Vector& x) { return x.squaredNorm(); },
                [](const Vector& x) { return x[0] - 3.0; }};
  spec.grads = std::vector<GradientFunction>{
      [](const Vector& x) -> Vector { return 2.0 * x; },
      [d](const Vector&) -> Vector { return Vector::Unit(d, 0); }};
  spec.M = Vector(2);
  spec.M << 2.0, 0.0;
  spec.L = Vector(2);
  spec.L << 8.0, 1.0;
  spec.R = 4.0;
  spec.x0 = Vector::Zero(d);
  spec.beta = 1.0;
  spec.beta_hat = 6.0;
  return spec;
}

}  // namespace

TEST_CASE("sphere directions are unit vectors with zero mean") {
  Rng rng(11);
  const int d = 4;
  const int N = 100000;
  Vector mean = Vector::Zero(d);
  double worst = 0.0;
  for (int j = 0; j < N; ++j) {
    const Vector s = sample_unit_sphere(d, rng);
    worst = std::max(worst, std::abs(s.norm() - 1.0));
    mean += s;
  }
  mean /= N;
  CHECK(worst <= 1e-12);
  CHECK(mean.cwiseAbs().maxCoeff() <= 3.0 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("noiseless first-order batch is exact") {
  const ProblemSpec spec = sphere_problem(3);
  Vector x(3);
  x << 0.5, -1.0, 2.0;
  Rng rng(1);
  const BatchEstimate b = first_order_batch(spec, NoiseModel::uniform(1, 0.0), x, 5, rng);
  CHECK((b.value - spec.values(x)).norm() == 0.0);
  CHECK((b.grad - spec.gradients(x)).norm() == 0.0);
  CHECK(b.queries_used == 5 * 2);
  CHECK(b.sample_points.size() == 1);
}

TEST_CASE("batch noise shrinks with sqrt(n)") {
  const ProblemSpec spec = sphere_problem(3);
  Rng rng(1);
  const BatchEstimate b =
      first_order_batch(spec, NoiseModel::uniform(1, 0.001, 0.01), Vector::Zero(3), 4, rng);
  CHECK(b.sigma_n[1] == doctest::Approx(0.0005).epsilon(1e-15));
  CHECK(b.sigma_hat_n[0] == doctest::Approx(0.005).epsilon(1e-15));
}

TEST_CASE("oracles are deterministic given the seed") {
  const ProblemSpec spec = sphere_problem(3);
  const NoiseModel noise = NoiseModel::uniform(1, 0.01, 0.1);
  Vector x(3);
  x << 0.1, 0.2, 0.3;
  Rng a(5), b(5);
  const BatchEstimate fa = first_order_batch(spec, noise, x, 3, a);
  const BatchEstimate fb = first_order_batch(spec, noise, x, 3, b);
  CHECK(fa.value == fb.value);
  CHECK(fa.grad == fb.grad);
  const BatchEstimate za = zo_batch(spec, noise, x, 0.01, 3, a);
  const BatchEstimate zb = zo_batch(spec, noise, x, 0.01, 3, b);
  CHECK(za.grad == zb.grad);
  CHECK(za.sample_points.size() == zb.sample_points.size());
}

TEST_CASE("zeroth-order query accounting and sample points") {
  const ProblemSpec spec = sphere_problem(3);
  Rng rng(2);
  const double nu = 0.05;
  const BatchEstimate b = zo_batch(spec, NoiseModel::uniform(1, 0.0), Vector::Zero(3), nu, 8, rng);
  CHECK(b.queries_used == 32);
  REQUIRE(b.sample_points.size() == 9);
  CHECK(b.sample_points.front() == Vector::Zero(3));
  for (std::size_t k = 1; k < b.sample_points.size(); ++k)
    CHECK(b.sample_points[k].norm() == doctest::Approx(nu).epsilon(1e-12));
  CHECK(b.b_hat[0] == doctest::Approx(nu * 2.0));
  CHECK(b.b_hat[1] == 0.0);
  CHECK(b.nu == nu);
}

TEST_CASE("zeroth-order sigma_hat is the square root of the variance bound") {
  const ProblemSpec spec = sphere_problem(5);
  Rng rng(3);
  const double nu = 0.02;
  const double sigma = 0.001;
  const int n = 4;
  const BatchEstimate b = zo_batch(spec, NoiseModel::uniform(1, sigma), Vector::Zero(5), nu, n, rng);
  // (3/n)(d L^2 + d^2 M^2 nu^2 / 4) + 4 d^2 sigma^2 / (n nu^2)
  const double expected0 = 3.0 / n * (5 * 64.0 + 25 * 4.0 * nu * nu / 4.0) +
                           4.0 * 25 * sigma * sigma / (n * nu * nu);
  CHECK(b.sigma_hat_n[0] == doctest::Approx(std::sqrt(expected0)).epsilon(1e-14));
  CHECK(zo_variance_bound(5, 8.0, 2.0, sigma, nu, n) == doctest::Approx(expected0).epsilon(1e-14));
}

TEST_CASE("zeroth-order estimate of a linear function is unbiased") {
  // E[d <a, s> s] = a for s uniform on the sphere.
  const int d = 4;
  const int N = 100000;
  ProblemSpec spec = sphere_problem(d);
  Vector a(d);
  a << 1.0, -2.0, 0.5, 0.0;
  spec.funcs[0] = [a](const Vector& x) { return a.dot(x); };
  Rng rng(4);
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  for (int j = 0; j < N; ++j) {
    const Vector g = zo_batch(spec, NoiseModel::uniform(1, 0.0), Vector::Zero(d), 0.1, 1, rng).grad.col(0);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  const Vector mean = sum / N;
  const Vector se = ((sum_sq / N - mean.cwiseProduct(mean)) / N).cwiseSqrt();
  for (int k = 0; k < d; ++k) CHECK(std::abs(mean[k] - a[k]) <= 3.0 * se[k] + 1e-12);
}

TEST_CASE("zeroth-order bias stays within nu * M plus sampling error") {
  // Smooth non-quadratic objective: f = sum cos(x_k), M = 1.
  const int d = 3;
  const int N = 40000;
  ProblemSpec spec = sphere_problem(d);
  spec.funcs[0] = [](const Vector& x) { return x.array().cos().sum(); };
  spec.M[0] = 1.0;
  Vector x(d);
  x << 0.3, -0.7, 1.1;
  const Vector exact = -x.array().sin().matrix();
  const double nu = 0.2;
  Rng rng(9);
  Vector sum = Vector::Zero(d);
  double sq = 0.0;
  for (int j = 0; j < N; ++j) {
    const Vector g = zo_batch(spec, NoiseModel::uniform(1, 0.0), x, nu, 1, rng).grad.col(0);
    sum += g;
    sq += g.squaredNorm();
  }
  const Vector mean = sum / N;
  const double se = std::sqrt((sq / N - mean.squaredNorm()) / N);
  CHECK((mean - exact).norm() <= nu * spec.M[0] + 3.0 * se);
}

TEST_CASE("safe sampling radius drops terms with zero smoothness") {
  ProblemSpec spec = sphere_problem(2);
  spec.M << 1.0, 0.0;
  spec.R = 1.0;
  Vector alpha(1), gne(1);
  alpha << 0.1;
  gne << 1.0;
  CHECK(safe_sampling_radius(alpha, gne, spec, 0.01) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(safe_sampling_radius(alpha, gne, spec, 0.02) == doctest::Approx(0.01).epsilon(1e-15));
  // Only the first term active once eta is large.
  CHECK(safe_sampling_radius(alpha, gne, spec, 10.0) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("safe sampling radius on quadratic/linear matches the three-term formula") {
  const ProblemSpec spec = make_quadratic_linear(3);
  const Vector alpha = -spec.values(spec.x0).tail(spec.m);
  const Vector gne = spec.L.tail(spec.m);
  const double eta = 0.05;
  // M_i = 0 for the constraints leaves alpha / (2 L_i) and eta / (2 m M0).
  double expected = eta / (2.0 * spec.m * spec.M[0]);
  for (int i = 0; i < spec.m; ++i) expected = std::min(expected, alpha[i] / (2.0 * gne[i]));
  CHECK(safe_sampling_radius(alpha, gne, spec, eta) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("safe sampling radius is floored") {
  ProblemSpec spec = sphere_problem(2);
  Vector alpha(1), gne(1);
  alpha << 1e-30;
  gne << 1.0;
  CHECK(safe_sampling_radius(alpha, gne, spec, 1e-30) == 1e-12);
}

TEST_CASE("sphere samples under the safe radius stay feasible") {
  const ProblemSpec spec = make_rosenbrock(3);
  Rng rng(21);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(3);
    for (int k = 0; k < 3; ++k) x[k] = 0.05 * normal(rng);
    if (!spec.strictly_feasible(x)) continue;
    const Vector alpha = -spec.values(x).tail(spec.m);
    Vector gne(spec.m);
    for (int i = 0; i < spec.m; ++i) gne[i] = (*spec.grads)[i + 1](x).norm();
    const double nu = safe_sampling_radius(alpha, gne, spec, 0.1);
    const BatchEstimate b = zo_batch(spec, NoiseModel::uniform(spec.m, 0.0), x, nu, 20, rng);
    for (const Vector& p : b.sample_points) CHECK(spec.max_constraint(p) <= 0.0);
  }
}

TEST_CASE("noise model validation") {
  NoiseModel noise = NoiseModel::uniform(2, 0.1);
  CHECK_NOTHROW(noise.validate(2));
  CHECK_THROWS_AS(noise.validate(3), ConfigError);
  noise.sigma[0] = -1.0;
  CHECK_THROWS_AS(noise.validate(2), ConfigError);
}

TEST_CASE("oracle cost matches batch accounting") {
  const ProblemSpec spec = sphere_problem(3);
  const NoiseModel noise = NoiseModel::uniform(1, 0.001);
  const auto fo = make_oracle(spec, noise, OracleKind::first_order);
  const auto zo = make_oracle(spec, noise, OracleKind::zeroth_order);
  Rng rng(0);
  const RadiusRule radius = [](const BatchEstimate&) { return 0.01; };
  CHECK(fo->sample(spec.x0, 3, radius, rng).queries_used == fo->cost(3));
  CHECK(zo->sample(spec.x0, 3, radius, rng).queries_used == zo->cost(3));
  CHECK(zo->needs_radius());
}
