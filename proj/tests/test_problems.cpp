#include <cmath>

#include <stdexcept>

#include <doctest.h>

#include "rspg/problems.hpp"

using namespace rspg;

namespace {

double quadrature_of_derivative(double beta, const ScadParams& params) {
  const int steps = 200000;
  const double h = beta / steps;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double a = i * h, b = (i + 1) * h;
    sum += 0.5 * h *
           (scad_smooth_derivative(a, params) + scad_smooth_derivative(b, params));
  }
  return sum;
}

}  // namespace

TEST_CASE("scad derivative piecewise values") {
  const ScadParams params;  // a = 3.7, lambda = 0.01
  CHECK(scad_smooth_derivative(0.0, params) == doctest::Approx(0.0));
  CHECK(scad_smooth_derivative(0.005, params) == doctest::Approx(0.005));
  CHECK(scad_smooth_derivative(0.05, params) == doctest::Approx(0.0));
  CHECK(scad_smooth_derivative(0.02, params) ==
        doctest::Approx((3.7 * 0.01 - 0.02) / 2.7));
  CHECK_THROWS_AS(scad_smooth_derivative(-0.1, params), std::invalid_argument);
}

TEST_CASE("scad derivative is continuous and nonnegative") {
  const ScadParams params;
  const double lambda = params.lambda, alam = params.a * params.lambda;
  CHECK(scad_smooth_derivative(lambda - 1e-12, params) ==
        doctest::Approx(scad_smooth_derivative(lambda + 1e-12, params))
            .epsilon(1e-6));
  CHECK(scad_smooth_derivative(alam - 1e-12, params) ==
        doctest::Approx(0.0).epsilon(1e-9));
  for (double beta = 0.0; beta < 0.1; beta += 0.001) {
    CHECK(scad_smooth_derivative(beta, params) >= 0.0);
  }
}

TEST_CASE("scad value matches its derivative's quadrature") {
  const ScadParams params;
  CHECK(scad_smooth_value(params.lambda, params) == doctest::Approx(5e-5));
  // Plateau at a lambda^2 / 2 past the clipping point.
  CHECK(scad_smooth_value(1.0, params) ==
        doctest::Approx(params.a * params.lambda * params.lambda / 2.0));
  CHECK(scad_smooth_value(50.0, params) == scad_smooth_value(1.0, params));
  for (double beta : {0.004, 0.01, 0.02, 0.037, 0.08}) {
    CHECK(scad_smooth_value(beta, params) ==
          doctest::Approx(quadrature_of_derivative(beta, params))
              .epsilon(1e-10));
  }
}

TEST_CASE("least-squares sample gradients match matched-noise differences") {
  const auto inst = gen_least_squares(12, 0.3, 0.1, ScadParams{}, 51);
  RngStream rng = RngStream::from_seed(77);
  Vector x(12);
  for (auto& xj : x) xj = rng.next_normal();
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    RngStream g_stream = rng.child(trial);
    const Vector g = inst.problem.sfo.query(x, g_stream);
    for (std::size_t j = 0; j < x.size(); j += 3) {
      Vector hi = x, lo = x;
      hi[j] += h;
      lo[j] -= h;
      RngStream sa = rng.child(trial), sb = rng.child(trial);
      const double fd = (inst.problem.objective_sample(hi, sa) -
                         inst.problem.objective_sample(lo, sb)) /
                        (2.0 * h);
      CHECK(std::fabs(g[j] - fd) < 1e-5 * (1.0 + std::fabs(g[j])));
    }
  }
}

TEST_CASE("least-squares loss at the true coefficients is the noise variance") {
  const double sigma = 0.1;
  const auto inst = gen_least_squares(30, 0.1, sigma, ScadParams{}, 8);
  double penalty = 0.0;
  for (double xj : inst.true_x) {
    penalty += scad_smooth_value(std::fabs(xj), inst.scad);
  }
  RngStream rng = RngStream::from_seed(12);
  double mean = 0.0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    RngStream sub = rng.child(i);
    mean += inst.problem.objective_sample(inst.true_x, sub);
  }
  mean /= samples;
  CHECK(std::fabs(mean - (sigma * sigma + penalty)) < 2e-4);
  CHECK(inst.problem.objective_exact(inst.true_x) ==
        doctest::Approx(sigma * sigma + penalty));
}

TEST_CASE("noiseless residual leaves only the penalty gradient") {
  const auto inst = gen_least_squares(10, 0.4, 0.0, ScadParams{}, 3);
  RngStream rng = RngStream::from_seed(5);
  const Vector g = inst.problem.sfo.query(inst.true_x, rng);
  const Vector exact = inst.problem.sfo.true_gradient(inst.true_x);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(g[j] == doctest::Approx(exact[j]).epsilon(1e-12));
  }
}

TEST_CASE("s3vm instance constrains only the bias coordinate") {
  const auto inst = gen_s3vm(15, 0.1, 0.1, 1.0, 0.5, 0.5, 31);
  CHECK(inst.positive_ratio >= 0.0);
  CHECK(inst.positive_ratio <= 1.0);
  CHECK(inst.problem.x1.size() == 16);
  CHECK(inst.problem.set.contains(inst.problem.x1));
  Vector wild = inst.problem.x1;
  wild[0] = 1e6;
  CHECK(inst.problem.set.contains(wild));
  wild[15] = 2.0 * inst.positive_ratio - 1.0 + 0.2;
  CHECK(!inst.problem.set.contains(wild));
}

TEST_CASE("s3vm sample gradients match matched-noise differences") {
  const auto inst = gen_s3vm(8, 0.3, 0.1, 1.0, 0.5, 0.5, 64);
  RngStream rng = RngStream::from_seed(13);
  Vector x(9);
  for (auto& xj : x) xj = 0.5 * rng.next_normal();
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    RngStream g_stream = rng.child(trial);
    const Vector g = inst.problem.sfo.query(x, g_stream);
    for (std::size_t j = 0; j < x.size(); j += 2) {
      Vector hi = x, lo = x;
      hi[j] += h;
      lo[j] -= h;
      RngStream sa = rng.child(trial), sb = rng.child(trial);
      const double fd = (inst.problem.objective_sample(hi, sa) -
                         inst.problem.objective_sample(lo, sb)) /
                        (2.0 * h);
      CHECK(std::fabs(g[j] - fd) < 1e-5 * (1.0 + std::fabs(g[j])));
    }
  }
}

TEST_CASE("parameter estimation honors an exposed analytic constant") {
  CompositeProblem problem;
  const Vector diag = {2.0, 0.5, 1.0};
  problem.x1 = {1.0, 2.0, -1.0};
  problem.analytic_lipschitz = 2.0;
  problem.sfo.query = [diag](const Vector& x, RngStream&) {
    Vector g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = diag[j] * x[j];
    return g;
  };
  problem.sfo.true_gradient = [&problem](const Vector& x) {
    RngStream dummy = RngStream::from_seed(0);
    return problem.sfo.query(x, dummy);
  };
  problem.objective_sample = [diag](const Vector& x, RngStream&) {
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) v += 0.5 * diag[j] * x[j] * x[j];
    return v;
  };
  const auto params = estimate_parameters(problem, problem.x1, 50,
                                          RngStream::from_seed(2));
  CHECK(params.lipschitz_hat == doctest::Approx(2.0));
  CHECK(params.sigma_hat == doctest::Approx(0.0));
  const double psi = 0.5 * (2.0 + 0.5 * 4.0 + 1.0);
  CHECK(params.d_tilde == doctest::Approx(std::sqrt(2.0 * psi / 2.0)));
  CHECK_THROWS_AS(
      estimate_parameters(problem, problem.x1, 1, RngStream::from_seed(2)),
      std::invalid_argument);
}

TEST_CASE("evaluating the true coefficients recovers every zero") {
  const auto inst = gen_least_squares(40, 0.1, 0.1, ScadParams{}, 19);
  const auto metrics =
      evaluate_solution(inst.problem, Geometry::euclidean(), inst.true_x, 0.5,
                        20000, RngStream::from_seed(44), &inst.true_x);
  REQUIRE(metrics.zero_ratio.has_value());
  CHECK(*metrics.zero_ratio == doctest::Approx(1.0));
  CHECK(metrics.mapping_norm_sq < 0.05);
}

TEST_CASE("manifests round-trip through text") {
  ProblemManifest manifest;
  manifest.kind = "s3vm";
  manifest.n = 42;
  manifest.sparsity = 0.125;
  manifest.noise_sigma = 0.25;
  manifest.scad.a = 3.1;
  manifest.scad.lambda = 0.02;
  manifest.lambda1 = 1.5;
  manifest.lambda2 = 0.25;
  manifest.lambda3 = 0.75;
  manifest.delta = 0.05;
  manifest.seed = 987654321;
  const auto loaded = manifest_from_string(manifest_to_string(manifest));
  CHECK(loaded.kind == manifest.kind);
  CHECK(loaded.n == manifest.n);
  CHECK(loaded.sparsity == manifest.sparsity);
  CHECK(loaded.noise_sigma == manifest.noise_sigma);
  CHECK(loaded.scad.a == manifest.scad.a);
  CHECK(loaded.scad.lambda == manifest.scad.lambda);
  CHECK(loaded.lambda1 == manifest.lambda1);
  CHECK(loaded.lambda2 == manifest.lambda2);
  CHECK(loaded.lambda3 == manifest.lambda3);
  CHECK(loaded.delta == manifest.delta);
  CHECK(loaded.seed == manifest.seed);
}
