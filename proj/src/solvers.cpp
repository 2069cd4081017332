#include "rspg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rspg {

namespace {

constexpr double kStepTol = 1e-12;

// Stream layout inside one solver run: child(0) draws the termination
// index, child(k) feeds iteration k, child(N+1) feeds post-selection.
constexpr std::uint64_t kIndexDrawChild = 0;

void validate_stepsizes(const Vector& gammas, double alpha, double lipschitz,
                        double cap_factor) {
  const double cap = cap_factor * alpha / lipschitz;
  bool any_strict = false;
  for (double g : gammas) {
    if (!(g > 0.0) || g > cap + kStepTol) {
      throw std::invalid_argument("stepsize outside the admissible range");
    }
    if (g < cap - kStepTol) any_strict = true;
  }
  if (!any_strict) {
    throw std::invalid_argument("at least one stepsize must be strictly "
                                "below the upper limit");
  }
}

std::uint64_t ceil_clamped(double value, std::uint64_t budget) {
  const double clamped =
      std::min(std::max(value, 1.0), static_cast<double>(budget));
  return static_cast<std::uint64_t>(std::ceil(clamped - 1e-12));
}

}  // namespace

Vector StepsizePolicy::expand(std::uint64_t n_iters) const {
  if (constant) return Vector(n_iters, gamma);
  if (schedule.size() < n_iters) {
    throw std::invalid_argument("stepsize schedule shorter than iteration count");
  }
  return Vector(schedule.begin(), schedule.begin() + n_iters);
}

std::uint64_t TerminationLaw::sample(RngStream& rng) const {
  const double u = rng.next_uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    if (u < cum) return k + 1;
  }
  return weights.size();
}

TerminationLaw termination_law(double alpha, double lipschitz,
                               const Vector& gammas, bool relaxed) {
  if (gammas.empty()) throw std::invalid_argument("termination_law: N == 0");
  validate_stepsizes(gammas, alpha, lipschitz, relaxed ? 2.0 : 1.0);
  TerminationLaw law;
  law.weights.resize(gammas.size());
  double total = 0.0;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const double g = gammas[k];
    double w = relaxed ? alpha * g - lipschitz * g * g / 2.0
                       : alpha * g - lipschitz * g * g;
    w = std::max(w, 0.0);
    law.weights[k] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("termination_law: all weights vanish");
  }
  for (double& w : law.weights) w /= total;
  return law;
}

std::uint64_t rspg_batch_size(std::uint64_t oracle_budget, double sigma,
                              double lipschitz, double d_tilde) {
  if (oracle_budget < 1 || !(lipschitz > 0.0) || !(d_tilde > 0.0) ||
      sigma < 0.0) {
    throw std::invalid_argument("rspg_batch_size: invalid arguments");
  }
  const double inner = sigma * std::sqrt(6.0 * static_cast<double>(oracle_budget)) /
                       (4.0 * lipschitz * d_tilde);
  return ceil_clamped(inner, oracle_budget);
}

std::uint64_t rspgf_batch_size(std::uint64_t oracle_budget, std::size_t dim,
                               double grad_bound, double sigma,
                               double lipschitz, double d_tilde) {
  if (oracle_budget < 1 || !(lipschitz > 0.0) || !(d_tilde > 0.0)) {
    throw std::invalid_argument("rspgf_batch_size: invalid arguments");
  }
  const double n4 = static_cast<double>(dim) + 4.0;
  const double first =
      std::sqrt(n4 * (grad_bound * grad_bound + sigma * sigma) *
                static_cast<double>(oracle_budget)) /
      (lipschitz * d_tilde);
  const double inner = std::max(first, n4);
  return ceil_clamped(inner, oracle_budget);
}

double rspgf_smoothing_mu(double d_psi_or_v, std::size_t dim,
                          std::uint64_t oracle_budget, bool convex) {
  if (!(d_psi_or_v > 0.0) || oracle_budget < 1) {
    throw std::invalid_argument("rspgf_smoothing_mu: invalid arguments");
  }
  const double n4 = static_cast<double>(dim) + 4.0;
  const double budget = static_cast<double>(oracle_budget);
  if (convex) return std::sqrt(d_psi_or_v / (n4 * budget));
  return d_psi_or_v / std::sqrt(n4 * budget);
}

std::uint64_t two_phase_num_runs(double lambda) {
  if (!(lambda > 0.0) || lambda >= 1.0) {
    throw std::invalid_argument("two_phase_num_runs: lambda must be in (0,1)");
  }
  return static_cast<std::uint64_t>(std::ceil(std::log2(2.0 / lambda)));
}

std::uint64_t two_phase_budget(double epsilon, double lipschitz, double d_psi,
                               double d_tilde, double sigma, double alpha) {
  const double a2e = alpha * alpha * epsilon;
  const double t1 = 512.0 * lipschitz * lipschitz * d_psi * d_psi / a2e;
  const double inner = (d_tilde + d_psi * d_psi / d_tilde) * 128.0 *
                       std::sqrt(6.0) * lipschitz * sigma / a2e;
  const double t2 = inner * inner;
  const double t3 = 3.0 * sigma * sigma /
                    (8.0 * lipschitz * lipschitz * d_tilde * d_tilde);
  return static_cast<std::uint64_t>(std::ceil(std::max({t1, t2, t3})));
}

std::uint64_t two_phase_post_samples(double epsilon, double lambda,
                                     double sigma, double alpha) {
  const double s = static_cast<double>(two_phase_num_runs(lambda));
  return static_cast<std::uint64_t>(
      std::ceil(24.0 * s * sigma * sigma / (alpha * alpha * lambda * epsilon)));
}

std::uint64_t two_phase_post_samples_light(double epsilon, double lambda,
                                           double sigma, double alpha) {
  const double s = static_cast<double>(two_phase_num_runs(lambda));
  const double root = std::sqrt(3.0 * std::log2(2.0 * s / lambda));
  const double t = 24.0 * sigma * sigma / (alpha * alpha * epsilon) *
                   (1.0 + root) * (1.0 + root);
  return static_cast<std::uint64_t>(std::ceil(t));
}

SolverRun pg_solve(const CompositeProblem& problem, const Geometry& geometry,
                   const SolverConfig& config, std::uint64_t n_iters) {
  if (!problem.sfo.true_gradient) {
    throw std::invalid_argument("pg_solve: exact gradient required");
  }
  if (n_iters < 1) throw std::invalid_argument("pg_solve: N must be >= 1");
  const double alpha = geometry.modulus_alpha();
  StepsizePolicy policy = config.effective_stepsize(alpha);
  // PG admits the wider range (0, 2 alpha/L]; default to alpha/L.
  if (config.stepsize.constant && config.stepsize.gamma == 0.0) {
    policy = StepsizePolicy::constant_step(alpha / config.lipschitz);
  }
  const Vector gammas = policy.expand(n_iters);
  validate_stepsizes(gammas, alpha, config.lipschitz, 2.0);

  SolverRun run;
  Vector x = problem.x1;
  double best_norm = std::numeric_limits<double>::infinity();
  run.per_iteration_mapping_norms.reserve(n_iters);
  for (std::uint64_t k = 1; k <= n_iters; ++k) {
    if (config.record_trajectory) run.trajectory.push_back(x);
    const Vector grad = problem.sfo.true_gradient(x);
    const ProxResult prox =
        prox_step(geometry, problem.set, problem.h, x, grad, gammas[k - 1]);
    const double mnorm = geometry.norm(prox.mapping);
    run.per_iteration_mapping_norms.push_back(mnorm);
    if (mnorm < best_norm) {
      best_norm = mnorm;
      run.random_index = k;
      run.output_x = x;
      run.output_mapping_norm_sq = mnorm * mnorm;
    }
    x = prox.x_plus;
  }
  return run;
}

namespace {

// Shared randomized loop: draws R first, then runs R-1 prox steps fed by
// the supplied batch sampler. full_length runs all N steps regardless of R
// and keeps the whole trajectory.
template <typename BatchFn>
SolverRun randomized_run(const CompositeProblem& problem,
                         const Geometry& geometry, const SolverConfig& config,
                         RngStream root, std::uint64_t n_iters,
                         const Vector& gammas, BatchFn sample_batch,
                         bool full_length) {
  const double alpha = geometry.modulus_alpha();
  const TerminationLaw law =
      termination_law(alpha, config.lipschitz, gammas, config.relaxed_law);
  SolverRun run;
  RngStream index_stream = root.child(kIndexDrawChild);
  run.random_index = law.sample(index_stream);

  const std::uint64_t last_step =
      full_length ? n_iters : run.random_index - 1;
  Vector x = problem.x1;
  const bool keep_trajectory = full_length || config.record_trajectory;
  for (std::uint64_t k = 1; k <= last_step; ++k) {
    if (keep_trajectory) run.trajectory.push_back(x);
    RngStream iter_stream = root.child(k);
    const MiniBatchResult batch =
        sample_batch(x, iter_stream, &run.counters);
    const ProxResult prox = prox_step(geometry, problem.set, problem.h, x,
                                      batch.mean_gradient, gammas[k - 1]);
    run.per_iteration_mapping_norms.push_back(geometry.norm(prox.mapping));
    x = prox.x_plus;
    if (full_length && k == run.random_index - 1) run.output_x = x;
  }
  if (keep_trajectory) run.trajectory.push_back(x);
  if (!full_length) {
    run.output_x = x;
  } else if (run.random_index == 1) {
    run.output_x = problem.x1;
  }
  return run;
}

}  // namespace

SolverRun rspg_solve(const CompositeProblem& problem, const Geometry& geometry,
                     const SolverConfig& config, RngStream root) {
  if (!problem.sfo.query) throw std::invalid_argument("rspg_solve: no SFO");
  const std::uint64_t m = rspg_batch_size(config.oracle_budget, config.sigma,
                                          config.lipschitz, config.d_tilde);
  if (config.oracle_budget < m) {
    throw std::invalid_argument("rspg_solve: budget below one batch");
  }
  const std::uint64_t n_iters = config.oracle_budget / m;
  const Vector gammas =
      config.effective_stepsize(geometry.modulus_alpha()).expand(n_iters);
  return randomized_run(
      problem, geometry, config, root, n_iters, gammas,
      [&](const Vector& x, RngStream& rng, OracleCounter* counter) {
        return minibatch_mean(problem.sfo, x, m, rng, counter);
      },
      /*full_length=*/false);
}

SolverRun rspg_solve(const CompositeProblem& problem, const Geometry& geometry,
                     const SolverConfig& config) {
  return rspg_solve(problem, geometry, config,
                    RngStream::from_seed(config.master_seed));
}

std::size_t post_select(const std::vector<Vector>& candidates,
                        const std::vector<double>& candidate_gammas,
                        const CompositeProblem& problem,
                        const Geometry& geometry, std::uint64_t t_samples,
                        RngStream rng, Vector& scores, OracleCounter* counter) {
  if (candidates.empty()) {
    throw std::invalid_argument("post_select: empty candidate list");
  }
  if (candidates.size() != candidate_gammas.size()) {
    throw std::invalid_argument("post_select: gamma list size mismatch");
  }
  if (t_samples < 1) throw std::invalid_argument("post_select: T must be >= 1");
  scores.assign(candidates.size(), 0.0);
  std::size_t best = 0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    RngStream sub = rng.child(s);
    const MiniBatchResult batch =
        minibatch_mean(problem.sfo, candidates[s], t_samples, sub, counter);
    const Vector mapping =
        gradient_mapping(geometry, problem.set, problem.h, candidates[s],
                         batch.mean_gradient, candidate_gammas[s]);
    scores[s] = geometry.norm(mapping);
    if (scores[s] < scores[best]) best = s;
  }
  return best;
}

namespace {

SolverRun finish_two_phase(const CompositeProblem& problem,
                           const Geometry& geometry, const SolverConfig& config,
                           std::uint64_t t_samples, RngStream select_stream,
                           SolverRun run, PhaseMetadata meta) {
  const double alpha = geometry.modulus_alpha();
  const StepsizePolicy policy = config.effective_stepsize(alpha);
  std::vector<double> gammas(meta.candidates.size());
  for (std::size_t s = 0; s < meta.candidates.size(); ++s) {
    gammas[s] = policy.at(meta.candidate_indices[s]);
  }
  meta.selected =
      post_select(meta.candidates, gammas, problem, geometry, t_samples,
                  select_stream, meta.scores, &run.post_counters);
  run.output_x = meta.candidates[meta.selected];
  run.random_index = meta.candidate_indices[meta.selected];
  run.output_mapping_norm_sq =
      meta.scores[meta.selected] * meta.scores[meta.selected];
  run.phase_metadata = std::move(meta);
  return run;
}

}  // namespace

SolverRun two_phase_rspg(const CompositeProblem& problem,
                         const Geometry& geometry, const SolverConfig& config,
                         std::uint64_t num_runs, std::uint64_t t_samples) {
  if (num_runs < 1) throw std::invalid_argument("two_phase_rspg: S must be >= 1");
  RngStream root = RngStream::from_seed(config.master_seed);
  SolverRun combined;
  PhaseMetadata meta;
  for (std::uint64_t s = 1; s <= num_runs; ++s) {
    SolverRun sub = rspg_solve(problem, geometry, config, root.child(s));
    combined.counters.sfo_calls += sub.counters.sfo_calls;
    combined.counters.szo_calls += sub.counters.szo_calls;
    meta.candidates.push_back(std::move(sub.output_x));
    meta.candidate_indices.push_back(sub.random_index);
  }
  return finish_two_phase(problem, geometry, config, t_samples, root.child(0),
                          std::move(combined), std::move(meta));
}

SolverRun two_phase_rspg_v(const CompositeProblem& problem,
                           const Geometry& geometry, const SolverConfig& config,
                           std::uint64_t num_candidates,
                           std::uint64_t t_samples) {
  if (num_candidates < 1) {
    throw std::invalid_argument("two_phase_rspg_v: S must be >= 1");
  }
  const std::uint64_t m = rspg_batch_size(config.oracle_budget, config.sigma,
                                          config.lipschitz, config.d_tilde);
  if (config.oracle_budget < m) {
    throw std::invalid_argument("two_phase_rspg_v: budget below one batch");
  }
  const std::uint64_t n_iters = config.oracle_budget / m;
  const double alpha = geometry.modulus_alpha();
  const Vector gammas = config.effective_stepsize(alpha).expand(n_iters);

  RngStream root = RngStream::from_seed(config.master_seed);
  SolverRun run = randomized_run(
      problem, geometry, config, root, n_iters, gammas,
      [&](const Vector& x, RngStream& rng, OracleCounter* counter) {
        return minibatch_mean(problem.sfo, x, m, rng, counter);
      },
      /*full_length=*/true);

  const TerminationLaw law =
      termination_law(alpha, config.lipschitz, gammas, config.relaxed_law);
  RngStream pick_stream = root.child(n_iters + 1);
  PhaseMetadata meta;
  for (std::uint64_t s = 0; s < num_candidates; ++s) {
    const std::uint64_t idx = law.sample(pick_stream);
    meta.candidates.push_back(run.trajectory.at(idx - 1));
    meta.candidate_indices.push_back(idx);
  }
  if (!config.record_trajectory) run.trajectory.clear();
  return finish_two_phase(problem, geometry, config, t_samples,
                          root.child(n_iters + 2), std::move(run),
                          std::move(meta));
}

SolverRun rspgf_solve(const CompositeProblem& problem, const Geometry& geometry,
                      const SolverConfig& config, RngStream root) {
  if (!problem.szo.shared_query) {
    throw std::invalid_argument("rspgf_solve: no shared-noise SZO");
  }
  const std::size_t dim = problem.x1.size();
  const std::uint64_t m =
      rspgf_batch_size(config.oracle_budget, dim, config.grad_bound,
                       config.sigma, config.lipschitz, config.d_tilde);
  if (config.oracle_budget < m) {
    throw std::invalid_argument("rspgf_solve: budget below one batch");
  }
  const double mu = config.mu_override.value_or(rspgf_smoothing_mu(
      config.d_tilde, dim, config.oracle_budget, /*convex=*/false));
  const std::uint64_t n_iters = config.oracle_budget / m;
  const Vector gammas =
      config.effective_stepsize(geometry.modulus_alpha()).expand(n_iters);
  return randomized_run(
      problem, geometry, config, root, n_iters, gammas,
      [&](const Vector& x, RngStream& rng, OracleCounter* counter) {
        return minibatch_smoothed_mean(problem.szo, x, mu, m, rng, counter);
      },
      /*full_length=*/false);
}

SolverRun rspgf_solve(const CompositeProblem& problem, const Geometry& geometry,
                      const SolverConfig& config) {
  return rspgf_solve(problem, geometry, config,
                     RngStream::from_seed(config.master_seed));
}

TheoryBounds compute_theory_bounds(const ProblemConstants& constants,
                                   const SolverConfig& config) {
  TheoryBounds bounds;
  const double alpha = constants.alpha;
  const double lip = constants.lipschitz;
  const double sigma = constants.sigma;
  const double d_tilde = constants.d_tilde;
  const double budget = static_cast<double>(config.oracle_budget);
  const double root_budget = std::sqrt(budget);
  const double n4 = static_cast<double>(constants.dim) + 4.0;

  const std::uint64_t m =
      rspg_batch_size(config.oracle_budget, sigma, lip, d_tilde);
  const std::uint64_t n_iters = std::max<std::uint64_t>(1, config.oracle_budget / m);

  if (constants.d_psi) {
    const double dpsi2 = *constants.d_psi * *constants.d_psi;
    bounds.pg_bound =
        2.0 * lip * lip * dpsi2 / (alpha * alpha * static_cast<double>(n_iters));
    const double slack =
        std::max(1.0, std::sqrt(6.0) * sigma / (4.0 * lip * d_tilde * root_budget));
    bounds.rspg_nonconvex_b =
        16.0 * lip * dpsi2 / budget +
        4.0 * std::sqrt(6.0) * sigma / root_budget *
            (dpsi2 / d_tilde + d_tilde * slack);
    bounds.nonconvex_simplified =
        16.0 * lip * dpsi2 / budget +
        8.0 * std::sqrt(6.0) * *constants.d_psi * sigma / root_budget;

    const Vector gammas =
        config.effective_stepsize(alpha).expand(n_iters);
    double denom = 0.0, gamma_over_m = 0.0, gamma_sq_over_m = 0.0;
    for (double g : gammas) {
      denom += alpha * g - lip * g * g;
      gamma_over_m += g / static_cast<double>(m);
      gamma_sq_over_m += g * g / static_cast<double>(m);
    }
    if (denom > 0.0) {
      bounds.rspg_generic =
          (lip * dpsi2 + (sigma * sigma / alpha) * gamma_over_m) / denom;
      if (constants.v_star_x1) {
        bounds.convex_nondecreasing_gap =
            ((alpha - lip * gammas.front()) * *constants.v_star_x1 +
             (sigma * sigma / 2.0) * gamma_sq_over_m) /
            denom;
      }
      if (constants.v_bar_star) {
        bounds.convex_nonincreasing_gap =
            ((alpha - lip * gammas.back()) * *constants.v_bar_star +
             (sigma * sigma / 2.0) * gamma_sq_over_m) /
            denom;
      }
    }
  }
  if (constants.v_star_x1) {
    const double v = *constants.v_star_x1;
    const double slack =
        std::max(1.0, std::sqrt(6.0) * sigma / (4.0 * lip * d_tilde * root_budget));
    bounds.rspg_convex_c =
        4.0 * lip * v / (alpha * budget) +
        std::sqrt(6.0) * sigma / (alpha * root_budget) *
            (v / d_tilde + alpha * d_tilde / 3.0 * slack);
    bounds.convex_simplified =
        4.0 * lip * v / (alpha * budget) +
        2.0 * std::sqrt(2.0 * v) * sigma / std::sqrt(alpha * budget);
  }

  if (constants.grad_bound) {
    const double m2s2 =
        *constants.grad_bound * *constants.grad_bound + sigma * sigma;
    const double mu = constants.mu.value_or(0.0);
    bounds.sigma_tilde_sq =
        2.0 * n4 * (m2s2 + mu * mu * lip * lip * n4 * n4);
    const double theta1 =
        std::max(1.0, std::sqrt(n4 * m2s2) / (lip * d_tilde * root_budget));
    const double theta2 = std::max(1.0, n4 / budget);
    bounds.theta1 = theta1;
    bounds.theta2 = theta2;
    if (constants.d_psi) {
      const double dpsi2 = *constants.d_psi * *constants.d_psi;
      bounds.rspgf_nonconvex_b =
          (24.0 * theta2 + 41.0) * lip * dpsi2 * n4 / budget +
          32.0 * std::sqrt(n4 * m2s2) / root_budget *
              (dpsi2 / d_tilde + d_tilde * theta1);
      bounds.rspgf_nonconvex_simplified =
          65.0 * lip * dpsi2 * n4 / budget +
          64.0 * std::sqrt(n4 * m2s2) / root_budget;
    }
    if (constants.v_star_x1) {
      const double v = *constants.v_star_x1;
      bounds.rspgf_convex_c =
          (5.0 + theta2) * lip * v * n4 / (alpha * budget) +
          std::sqrt(n4 * m2s2) / (alpha * root_budget) *
              (4.0 * v / d_tilde + alpha * d_tilde * theta1);
      bounds.rspgf_convex_simplified =
          6.0 * lip * v * n4 / (alpha * budget) +
          4.0 * std::sqrt(v * n4 * m2s2) / std::sqrt(alpha * budget);
    }
  }
  return bounds;
}

}  // namespace rspg
