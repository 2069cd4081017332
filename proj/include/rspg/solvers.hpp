#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rspg/geometry.hpp"
#include "rspg/oracles.hpp"
#include "rspg/rng.hpp"

namespace rspg {

// Composite problem handle consumed by the solvers: stochastic oracles for
// the smooth part f, the simple term h and the feasible set X, plus an
// optional per-sample objective evaluator for reporting.
struct CompositeProblem {
  FirstOrderOracle sfo;
  ZerothOrderOracle szo;
  std::function<double(const Vector& x, RngStream& rng)> objective_sample;
  std::function<double(const Vector& x)> objective_exact;
  FeasibleSet set = FeasibleSet::all_space();
  SimpleTerm h = SimpleTerm::zero();
  Vector x1;
  std::optional<double> analytic_lipschitz;
};

struct StepsizePolicy {
  bool constant = true;
  double gamma = 0.0;       // used when constant
  Vector schedule;          // gamma_1..gamma_N, used otherwise

  static StepsizePolicy constant_step(double g) { return {true, g, {}}; }
  static StepsizePolicy scheduled(Vector gammas) {
    return {false, 0.0, std::move(gammas)};
  }
  double at(std::uint64_t k) const {  // 1-based
    return constant ? gamma : schedule.at(k - 1);
  }
  Vector expand(std::uint64_t n_iters) const;
};

struct SolverConfig {
  std::uint64_t oracle_budget = 0;     // total oracle calls allowed, per run
  StepsizePolicy stepsize;             // empty => alpha/(2L) constant
  double lipschitz = 0.0;              // L
  double sigma = 0.0;
  double d_tilde = 1.0;
  double grad_bound = 0.0;             // M, zeroth-order batch sizing
  bool relaxed_law = false;            // selects the relaxed index law
  std::uint64_t master_seed = 0;
  bool record_trajectory = false;
  std::optional<double> mu_override;   // smoothing parameter, zeroth-order

  StepsizePolicy effective_stepsize(double alpha) const {
    if (stepsize.constant && stepsize.gamma == 0.0) {
      return StepsizePolicy::constant_step(alpha / (2.0 * lipschitz));
    }
    return stepsize;
  }
};

// Probability mass function of the random termination index R.
struct TerminationLaw {
  Vector weights;  // P_R(k), k = 1..N

  std::uint64_t sample(RngStream& rng) const;  // returns R in 1..N
};

struct PhaseMetadata {
  std::vector<Vector> candidates;
  std::vector<std::uint64_t> candidate_indices;  // R_s per candidate
  Vector scores;                                 // |g_X| estimate per candidate
  std::size_t selected = 0;
};

struct SolverRun {
  Vector output_x;
  std::uint64_t random_index = 0;  // R, 1-based; 0 when not applicable
  std::vector<Vector> trajectory;  // filled when requested (or required)
  OracleCounter counters;
  OracleCounter post_counters;     // post-selection phase accounting
  Vector per_iteration_mapping_norms;
  double output_mapping_norm_sq = 0.0;  // exact for PG, estimate otherwise
  std::optional<PhaseMetadata> phase_metadata;
};

struct TheoryBounds {
  std::optional<double> pg_bound;                  // |g_X,R|^2, deterministic
  std::optional<double> rspg_generic;              // E|g~|^2, schedule form
  std::optional<double> rspg_nonconvex_b;          // B_N, scaled by alpha^2/L
  std::optional<double> rspg_convex_c;             // C_N
  std::optional<double> convex_nondecreasing_gap;
  std::optional<double> convex_nonincreasing_gap;  // needs bounded X
  std::optional<double> sigma_tilde_sq;
  std::optional<double> theta1;
  std::optional<double> theta2;
  std::optional<double> rspgf_nonconvex_b;         // zeroth-order B
  std::optional<double> rspgf_convex_c;            // zeroth-order C
  std::optional<double> nonconvex_simplified;      // optimal-D choice forms
  std::optional<double> convex_simplified;
  std::optional<double> rspgf_nonconvex_simplified;
  std::optional<double> rspgf_convex_simplified;
};

struct ProblemConstants {
  double lipschitz = 0.0;
  double sigma = 0.0;
  double alpha = 1.0;
  double d_tilde = 1.0;
  std::size_t dim = 0;
  std::optional<double> d_psi;        // sqrt((Psi(x1)-Psi*)/L)
  std::optional<double> v_star_x1;    // V(x*, x1), convex bounds
  std::optional<double> v_bar_star;   // max_u V(x*, u), bounded X only
  std::optional<double> grad_bound;   // M
  std::optional<double> mu;
};

// ---- Index law and parameter formulas ----

TerminationLaw termination_law(double alpha, double lipschitz,
                               const Vector& gammas, bool relaxed = false);

// m = ceil(min{max{1, sigma sqrt(6 budget) / (4 L D~)}, budget})
std::uint64_t rspg_batch_size(std::uint64_t oracle_budget, double sigma,
                              double lipschitz, double d_tilde);

// m = ceil(min{max{sqrt((n+4)(M^2+sigma^2) budget)/(L D~), n+4}, budget})
std::uint64_t rspgf_batch_size(std::uint64_t oracle_budget, std::size_t dim,
                               double grad_bound, double sigma,
                               double lipschitz, double d_tilde);

// Largest admissible smoothing parameter for the given budget.
double rspgf_smoothing_mu(double d_psi_or_v, std::size_t dim,
                          std::uint64_t oracle_budget, bool convex);

// Two-phase parameter formulas for an (epsilon, Lambda)-solution.
std::uint64_t two_phase_num_runs(double lambda);  // S(Lambda)
std::uint64_t two_phase_budget(double epsilon, double lipschitz, double d_psi,
                               double d_tilde, double sigma, double alpha);
std::uint64_t two_phase_post_samples(double epsilon, double lambda,
                                     double sigma, double alpha);
std::uint64_t two_phase_post_samples_light(double epsilon, double lambda,
                                           double sigma, double alpha);

// ---- Solvers ----

// Deterministic projected gradient; requires problem.sfo.true_gradient.
SolverRun pg_solve(const CompositeProblem& problem, const Geometry& geometry,
                   const SolverConfig& config, std::uint64_t n_iters);

SolverRun rspg_solve(const CompositeProblem& problem, const Geometry& geometry,
                     const SolverConfig& config);
SolverRun rspg_solve(const CompositeProblem& problem, const Geometry& geometry,
                     const SolverConfig& config, RngStream root);

// Post-optimization selection: T-sample mapping estimate per candidate,
// returns the index of the winner and fills scores.
std::size_t post_select(const std::vector<Vector>& candidates,
                        const std::vector<double>& candidate_gammas,
                        const CompositeProblem& problem,
                        const Geometry& geometry, std::uint64_t t_samples,
                        RngStream rng, Vector& scores,
                        OracleCounter* counter = nullptr);

SolverRun two_phase_rspg(const CompositeProblem& problem,
                         const Geometry& geometry, const SolverConfig& config,
                         std::uint64_t num_runs, std::uint64_t t_samples);

// Single full-length trajectory; S candidates drawn i.i.d. from the index
// law (with replacement), then the usual post-selection.
SolverRun two_phase_rspg_v(const CompositeProblem& problem,
                           const Geometry& geometry, const SolverConfig& config,
                           std::uint64_t num_candidates,
                           std::uint64_t t_samples);

SolverRun rspgf_solve(const CompositeProblem& problem, const Geometry& geometry,
                      const SolverConfig& config);
SolverRun rspgf_solve(const CompositeProblem& problem, const Geometry& geometry,
                      const SolverConfig& config, RngStream root);

TheoryBounds compute_theory_bounds(const ProblemConstants& constants,
                                   const SolverConfig& config);

}  // namespace rspg
