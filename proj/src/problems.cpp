#include "rspg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace rspg {

namespace {

// Sparse standard-normal draw: each coordinate nonzero with the given
// probability. One uniform plus (when hit) one normal per coordinate, so
// the stream layout does not depend on the realized sparsity pattern.
Vector sparse_normal(std::size_t n, double nonzero_prob, RngStream& rng) {
  Vector v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hit = rng.next_uniform() < nonzero_prob;
    const double z = rng.next_normal();
    if (hit) v[i] = z;
  }
  return v;
}

double sgn(double t) { return t < 0.0 ? -1.0 : 1.0; }

// <z[0..n), u> for the augmented (x, b) variable of the SVM problem.
double dot_head(const Vector& z, const Vector& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += z[i] * u[i];
  return s;
}

}  // namespace

double scad_smooth_derivative(double beta, const ScadParams& params) {
  if (beta < 0.0) {
    throw std::invalid_argument("scad_smooth_derivative: beta must be >= 0");
  }
  if (beta <= params.lambda) return beta;
  return std::max(0.0, params.a * params.lambda - beta) / (params.a - 1.0);
}

double scad_smooth_value(double beta, const ScadParams& params) {
  if (beta < 0.0) {
    throw std::invalid_argument("scad_smooth_value: beta must be >= 0");
  }
  const double a = params.a;
  const double lam = params.lambda;
  if (beta <= lam) return 0.5 * beta * beta;
  const double b = std::min(beta, a * lam);
  // integral of (a lam - t)/(a-1) from lam to b, on top of lam^2/2
  return 0.5 * lam * lam +
         (a * lam * (b - lam) - 0.5 * (b * b - lam * lam)) / (a - 1.0);
}

LsqInstance gen_least_squares(std::size_t n, double sparsity,
                              double noise_sigma, const ScadParams& scad,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_least_squares: n must be >= 1");
  if (!(sparsity > 0.0) || sparsity > 1.0) {
    throw std::invalid_argument("gen_least_squares: sparsity must be in (0,1]");
  }
  LsqInstance inst;
  inst.n = n;
  inst.sparsity = sparsity;
  inst.noise_sigma = noise_sigma;
  inst.scad = scad;
  inst.seed = seed;

  RngStream gen = RngStream::from_seed(seed);
  RngStream truth_stream = gen.child(0);
  inst.true_x = sparse_normal(n, 0.1, truth_stream);
  RngStream init_stream = gen.child(1);
  Vector x1 = sparse_normal(n, 0.1, init_stream);
  for (double& xi : x1) xi *= 5.0;

  const Vector true_x = inst.true_x;
  const auto draw_sample = [n, sparsity, noise_sigma, true_x](RngStream& rng) {
    Vector u = sparse_normal(n, sparsity, rng);
    const double v = dot(true_x, u) + noise_sigma * rng.next_normal();
    return std::make_pair(std::move(u), v);
  };
  const auto penalty_value = [scad](const Vector& x) {
    double p = 0.0;
    for (double xi : x) p += scad_smooth_value(std::fabs(xi), scad);
    return p;
  };

  CompositeProblem& problem = inst.problem;
  problem.x1 = std::move(x1);
  problem.set = FeasibleSet::all_space();
  problem.h = SimpleTerm::zero();

  problem.sfo.query = [draw_sample, scad, n](const Vector& x, RngStream& rng) {
    auto [u, v] = draw_sample(rng);
    const double residual = dot(x, u) - v;
    Vector g(n);
    for (std::size_t j = 0; j < n; ++j) {
      g[j] = 2.0 * residual * u[j] +
             sgn(x[j]) * scad_smooth_derivative(std::fabs(x[j]), scad);
    }
    return g;
  };
  problem.sfo.true_gradient = [sparsity, true_x, scad, n](const Vector& x) {
    Vector g(n);
    for (std::size_t j = 0; j < n; ++j) {
      g[j] = 2.0 * sparsity * (x[j] - true_x[j]) +
             sgn(x[j]) * scad_smooth_derivative(std::fabs(x[j]), scad);
    }
    return g;
  };
  problem.objective_sample = [draw_sample, penalty_value](const Vector& x,
                                                          RngStream& rng) {
    auto [u, v] = draw_sample(rng);
    const double residual = dot(x, u) - v;
    return residual * residual + penalty_value(x);
  };
  problem.objective_exact = [sparsity, noise_sigma, true_x,
                             penalty_value](const Vector& x) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - true_x[j];
      d2 += d * d;
    }
    return sparsity * d2 + noise_sigma * noise_sigma + penalty_value(x);
  };
  problem.szo.query = [draw_sample, penalty_value](const Vector& x,
                                                   RngStream& rng) {
    auto [u, v] = draw_sample(rng);
    const double residual = dot(x, u) - v;
    return residual * residual + penalty_value(x);
  };
  problem.szo.shared_query = [draw_sample, penalty_value](
                                 const Vector& xa, const Vector& xb,
                                 RngStream& rng) {
    auto [u, v] = draw_sample(rng);
    const double ra = dot(xa, u) - v;
    const double rb = dot(xb, u) - v;
    return std::make_pair(ra * ra + penalty_value(xa),
                          rb * rb + penalty_value(xb));
  };
  return inst;
}

S3vmInstance gen_s3vm(std::size_t n, double sparsity, double deltab,
                      double lambda1, double lambda2, double lambda3,
                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_s3vm: n must be >= 1");
  if (!(deltab > 0.0) || !(lambda1 > 0.0) || !(lambda2 > 0.0) ||
      !(lambda3 > 0.0)) {
    throw std::invalid_argument("gen_s3vm: weights and delta must be positive");
  }
  S3vmInstance inst;
  inst.n = n;
  inst.sparsity = sparsity;
  inst.lambda1 = lambda1;
  inst.lambda2 = lambda2;
  inst.lambda3 = lambda3;
  inst.delta = deltab;
  inst.seed = seed;

  RngStream gen = RngStream::from_seed(seed);
  RngStream truth_stream = gen.child(0);
  inst.true_x.resize(n);
  for (double& xi : inst.true_x) xi = truth_stream.next_normal();

  // Empirical positive-label ratio over a labeled pool; true bias is 0.
  const std::size_t pool = 10000;
  RngStream pool_stream = gen.child(1);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < pool; ++i) {
    const Vector u = sparse_normal(n, sparsity, pool_stream);
    if (dot(inst.true_x, u) > 0.0) ++positives;
  }
  inst.positive_ratio = static_cast<double>(positives) / static_cast<double>(pool);
  const double b_center = 2.0 * inst.positive_ratio - 1.0;

  RngStream init_stream = gen.child(2);
  Vector x1 = sparse_normal(n, 0.1, init_stream);
  for (double& xi : x1) xi *= 5.0;
  x1.push_back(b_center);

  const Vector true_x = inst.true_x;
  const auto draw_pair = [n, sparsity, true_x](RngStream& rng) {
    Vector u1 = sparse_normal(n, sparsity, rng);
    const double v = sgn(dot(true_x, u1));
    Vector u2 = sparse_normal(n, sparsity, rng);
    return std::make_tuple(std::move(u1), v, std::move(u2));
  };

  CompositeProblem& problem = inst.problem;
  problem.x1 = std::move(x1);
  problem.set =
      FeasibleSet::coordinate_box(n + 1, n, b_center - deltab, b_center + deltab);
  problem.h = SimpleTerm::zero();

  problem.sfo.query = [draw_pair, lambda1, lambda2, lambda3, n](
                          const Vector& z, RngStream& rng) {
    auto [u1, v, u2] = draw_pair(rng);
    const double b = z[n];
    Vector g(n + 1, 0.0);
    const double margin = 1.0 - v * (dot_head(z, u1) + b);
    if (margin > 0.0) {
      const double c = -2.0 * lambda1 * margin * v;
      for (std::size_t j = 0; j < n; ++j) g[j] += c * u1[j];
      g[n] += c;
    }
    const double t = dot_head(z, u2) + b;
    const double c2 = -10.0 * lambda2 * t * std::exp(-5.0 * t * t);
    for (std::size_t j = 0; j < n; ++j) g[j] += c2 * u2[j];
    g[n] += c2;
    for (std::size_t j = 0; j < n; ++j) g[j] += 2.0 * lambda3 * z[j];
    return g;
  };
  const auto sample_value = [lambda1, lambda2, lambda3, n](
                                const Vector& z, const Vector& u1, double v,
                                const Vector& u2) {
    const double b = z[n];
    const double margin = std::max(0.0, 1.0 - v * (dot_head(z, u1) + b));
    const double t = dot_head(z, u2) + b;
    double reg = 0.0;
    for (std::size_t j = 0; j < n; ++j) reg += z[j] * z[j];
    return lambda1 * margin * margin + lambda2 * std::exp(-5.0 * t * t) +
           lambda3 * reg;
  };
  problem.objective_sample = [draw_pair, sample_value](const Vector& z,
                                                       RngStream& rng) {
    auto [u1, v, u2] = draw_pair(rng);
    return sample_value(z, u1, v, u2);
  };
  problem.szo.query = problem.objective_sample;
  problem.szo.shared_query = [draw_pair, sample_value](
                                 const Vector& za, const Vector& zb,
                                 RngStream& rng) {
    auto [u1, v, u2] = draw_pair(rng);
    return std::make_pair(sample_value(za, u1, v, u2),
                          sample_value(zb, u1, v, u2));
  };
  return inst;
}

ProblemParams estimate_parameters(const CompositeProblem& problem,
                                  const Vector& x1, std::uint64_t n0,
                                  RngStream rng) {
  if (n0 < 2) throw std::invalid_argument("estimate_parameters: N0 must be >= 2");
  ProblemParams params;
  params.pilot_samples = n0;

  RngStream var_stream = rng.child(0);
  params.sigma_hat =
      std::sqrt(variance_estimate(problem.sfo, x1, n0, var_stream));

  RngStream obj_stream = rng.child(1);
  double psi_hat = 0.0;
  for (std::uint64_t i = 0; i < n0; ++i) {
    RngStream sub = obj_stream.child(i);
    psi_hat += problem.objective_sample(x1, sub);
  }
  psi_hat = std::max(0.0, psi_hat / static_cast<double>(n0)) +
            problem.h.value(x1);

  // Sampled difference quotients around x1, 1.5 safety factor; the analytic
  // constant wins when the problem exposes one.
  RngStream pair_stream = rng.child(2);
  const std::uint64_t num_pairs = 5;
  const std::uint64_t batch = n0;
  // Probe curvature at the scale the iterates actually live at, not at a
  // fixed unit scale.
  const double spread =
      0.5 + norm2(x1) / std::sqrt(static_cast<double>(x1.size()));
  double max_quotient = 0.0;
  double max_grad_norm = 0.0;
  for (std::uint64_t p = 0; p < num_pairs; ++p) {
    RngStream sub = pair_stream.child(p);
    Vector y = x1, z = x1;
    for (std::size_t j = 0; j < x1.size(); ++j) {
      y[j] += spread * sub.next_normal();
      z[j] += spread * sub.next_normal();
    }
    const MiniBatchResult gy = minibatch_mean(problem.sfo, y, batch, sub);
    const MiniBatchResult gz = minibatch_mean(problem.sfo, z, batch, sub);
    Vector diff(x1.size()), step(x1.size());
    for (std::size_t j = 0; j < x1.size(); ++j) {
      diff[j] = gy.mean_gradient[j] - gz.mean_gradient[j];
      step[j] = y[j] - z[j];
    }
    const double dist = norm2(step);
    if (dist > 1e-12) max_quotient = std::max(max_quotient, norm2(diff) / dist);
    max_grad_norm = std::max(
        {max_grad_norm, norm2(gy.mean_gradient), norm2(gz.mean_gradient)});
  }
  params.lipschitz_hat = problem.analytic_lipschitz.value_or(1.5 * max_quotient);
  if (!(params.lipschitz_hat > 0.0)) {
    throw std::runtime_error("estimate_parameters: degenerate Lipschitz estimate");
  }
  params.grad_bound_hat = max_grad_norm;
  params.d_tilde = std::sqrt(2.0 * psi_hat / params.lipschitz_hat);
  return params;
}

SolutionMetrics evaluate_solution(const CompositeProblem& problem,
                                  const Geometry& geometry, const Vector& x_out,
                                  double gamma, std::uint64_t k_samples,
                                  RngStream rng, const Vector* true_x) {
  if (k_samples < 1) {
    throw std::invalid_argument("evaluate_solution: K must be >= 1");
  }
  SolutionMetrics metrics;
  RngStream grad_stream = rng.child(0);
  const MiniBatchResult batch =
      minibatch_mean(problem.sfo, x_out, k_samples, grad_stream);
  const Vector mapping = gradient_mapping(geometry, problem.set, problem.h,
                                          x_out, batch.mean_gradient, gamma);
  const double mnorm = geometry.norm(mapping);
  metrics.mapping_norm_sq = mnorm * mnorm;

  RngStream obj_stream = rng.child(1);
  double objective = 0.0;
  for (std::uint64_t i = 0; i < k_samples; ++i) {
    RngStream sub = obj_stream.child(i);
    objective += problem.objective_sample(x_out, sub);
  }
  metrics.objective =
      objective / static_cast<double>(k_samples) + problem.h.value(x_out);

  if (true_x != nullptr) {
    std::size_t true_zeros = 0, recovered = 0;
    for (std::size_t j = 0; j < true_x->size(); ++j) {
      if ((*true_x)[j] == 0.0) {
        ++true_zeros;
        if (std::fabs(x_out[j]) < 0.02) ++recovered;
      }
    }
    if (true_zeros > 0) {
      metrics.zero_ratio =
          static_cast<double>(recovered) / static_cast<double>(true_zeros);
    }
  }
  return metrics;
}

std::string manifest_to_string(const ProblemManifest& manifest) {
  std::ostringstream out;
  out.precision(17);
  out << "kind = " << manifest.kind << "\n"
      << "n = " << manifest.n << "\n"
      << "sparsity = " << manifest.sparsity << "\n"
      << "noise_sigma = " << manifest.noise_sigma << "\n"
      << "scad_a = " << manifest.scad.a << "\n"
      << "scad_lambda = " << manifest.scad.lambda << "\n"
      << "lambda1 = " << manifest.lambda1 << "\n"
      << "lambda2 = " << manifest.lambda2 << "\n"
      << "lambda3 = " << manifest.lambda3 << "\n"
      << "delta = " << manifest.delta << "\n"
      << "seed = " << manifest.seed << "\n";
  return out.str();
}

ProblemManifest manifest_from_string(const std::string& text) {
  ProblemManifest manifest;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      const auto last = s.find_last_not_of(" \t\r");
      s.erase(last == std::string::npos ? 0 : last + 1);
    };
    trim(key);
    trim(value);
    if (key == "kind") manifest.kind = value;
    else if (key == "n") manifest.n = std::stoull(value);
    else if (key == "sparsity") manifest.sparsity = std::stod(value);
    else if (key == "noise_sigma") manifest.noise_sigma = std::stod(value);
    else if (key == "scad_a") manifest.scad.a = std::stod(value);
    else if (key == "scad_lambda") manifest.scad.lambda = std::stod(value);
    else if (key == "lambda1") manifest.lambda1 = std::stod(value);
    else if (key == "lambda2") manifest.lambda2 = std::stod(value);
    else if (key == "lambda3") manifest.lambda3 = std::stod(value);
    else if (key == "delta") manifest.delta = std::stod(value);
    else if (key == "seed") manifest.seed = std::stoull(value);
    else throw std::invalid_argument("manifest: unknown key '" + key + "'");
  }
  if (manifest.kind != "least_squares" && manifest.kind != "s3vm") {
    throw std::invalid_argument("manifest: kind must be least_squares or s3vm");
  }
  return manifest;
}

}  // namespace rspg
