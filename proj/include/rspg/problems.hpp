#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rspg/solvers.hpp"

namespace rspg {

struct ScadParams {
  double a = 3.7;
  double lambda = 0.01;
};

// Derivative of the smooth nonconvex surrogate of the clipped absolute
// deviation penalty: q'(b) = b on [0, lambda], (a lambda - b)+/(a-1) beyond.
double scad_smooth_derivative(double beta, const ScadParams& params);

// Antiderivative with q(0) = 0, continuous, plateauing at a lambda^2 / 2.
double scad_smooth_value(double beta, const ScadParams& params);

// Sparse regression benchmark: f(x) = E[(<x,u> - v)^2] + sum_j q(|x_j|),
// unconstrained, h == 0, with v = <x_true, u> + noise.
struct LsqInstance {
  CompositeProblem problem;
  std::size_t n = 0;
  double sparsity = 0.05;
  double noise_sigma = 0.0;
  ScadParams scad;
  Vector true_x;
  std::uint64_t seed = 0;
};

// Semi-supervised SVM benchmark over (x, b) with the bias constrained to
// |b - 2r + 1| <= delta. Hinge on labeled pairs, an exp surrogate on
// unlabeled points, and an l2 regularizer folded into f.
struct S3vmInstance {
  CompositeProblem problem;
  std::size_t n = 0;  // feature dimension; variables are n + 1
  double sparsity = 0.05;
  double lambda1 = 1.0, lambda2 = 0.5, lambda3 = 0.5;
  double delta = 0.1;
  double positive_ratio = 0.0;  // r, empirical over the labeled pool
  Vector true_x;
  std::uint64_t seed = 0;
};

struct ProblemParams {
  double lipschitz_hat = 0.0;
  double sigma_hat = 0.0;
  double d_tilde = 0.0;
  double grad_bound_hat = 0.0;
  std::uint64_t pilot_samples = 200;
};

struct SolutionMetrics {
  double mapping_norm_sq = 0.0;
  double objective = 0.0;
  std::optional<double> zero_ratio;
};

LsqInstance gen_least_squares(std::size_t n, double sparsity,
                              double noise_sigma, const ScadParams& scad,
                              std::uint64_t seed);

S3vmInstance gen_s3vm(std::size_t n, double sparsity, double deltab,
                      double lambda1, double lambda2, double lambda3,
                      std::uint64_t seed);

// Pilot estimation of (L, sigma, D~, M) from n0 samples at x1. The sampled
// Lipschitz quotient carries a 1.5 safety factor; an analytic constant on
// the problem takes precedence.
ProblemParams estimate_parameters(const CompositeProblem& problem,
                                  const Vector& x1, std::uint64_t n0,
                                  RngStream rng);

// K-sample evaluation of a returned solution: estimated squared mapping
// norm, objective value, and (given the true coefficients) the recovered
// ratio of true zeros under the 0.02 truncation threshold.
SolutionMetrics evaluate_solution(const CompositeProblem& problem,
                                  const Geometry& geometry, const Vector& x_out,
                                  double gamma, std::uint64_t k_samples,
                                  RngStream rng,
                                  const Vector* true_x = nullptr);

// Re-runnable instance manifests (flat key = value text).
struct ProblemManifest {
  std::string kind;  // "least_squares" | "s3vm"
  std::size_t n = 0;
  double sparsity = 0.05;
  double noise_sigma = 0.0;
  ScadParams scad;
  double lambda1 = 1.0, lambda2 = 0.5, lambda3 = 0.5;
  double delta = 0.1;
  std::uint64_t seed = 0;
};

std::string manifest_to_string(const ProblemManifest& manifest);
ProblemManifest manifest_from_string(const std::string& text);

}  // namespace rspg
