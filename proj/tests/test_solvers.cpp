#include <cmath>

#include <stdexcept>

#include <doctest.h>

#include "rspg/solvers.hpp"

using namespace rspg;

namespace {

// f(x) = 1/2 |x - c|^2 with optional additive gradient noise.
CompositeProblem quadratic_problem(Vector c, Vector x1, double noise_std) {
  CompositeProblem problem;
  problem.x1 = std::move(x1);
  problem.sfo.true_gradient = [c](const Vector& x) {
    Vector g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = x[j] - c[j];
    return g;
  };
  problem.sfo.query = [c, noise_std](const Vector& x, RngStream& rng) {
    Vector g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      g[j] = x[j] - c[j] + noise_std * rng.next_normal();
    }
    return g;
  };
  problem.objective_exact = [c](const Vector& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      v += 0.5 * (x[j] - c[j]) * (x[j] - c[j]);
    }
    return v;
  };
  return problem;
}

}  // namespace

TEST_CASE("batch size formula matches scripted arithmetic") {
  CHECK(rspg_batch_size(1000, 0.0, 1.0, 1.0) == 1);
  // ceil(sqrt(6000)/4) = ceil(19.3649...)
  CHECK(rspg_batch_size(1000, 1.0, 1.0, 1.0) == 20);
  CHECK(rspg_batch_size(100, 1e9, 1.0, 1.0) == 100);
}

TEST_CASE("zeroth-order batch size formula matches scripted arithmetic") {
  // ceil(max{sqrt(8 * 1 * 100), 8}) = ceil(28.28...)
  CHECK(rspgf_batch_size(100, 4, 1.0, 0.0, 1.0, 1.0) == 29);
  CHECK(rspgf_batch_size(100, 4, 0.0, 0.0, 1.0, 1.0) == 8);
  CHECK(rspgf_batch_size(5, 4, 0.0, 0.0, 1.0, 1.0) == 5);
}

TEST_CASE("smoothing parameter formula") {
  CHECK(rspgf_smoothing_mu(1.0, 6, 10, false) == doctest::Approx(0.1));
  CHECK(rspgf_smoothing_mu(1.0, 6, 1000, false) <
        rspgf_smoothing_mu(1.0, 6, 10, false));
}

TEST_CASE("two-phase parameter formulas") {
  CHECK(two_phase_num_runs(0.5) == 2);
  CHECK(two_phase_num_runs(0.9) == 2);
  CHECK_THROWS(two_phase_num_runs(2.0));
  // The light-tail sample size wins at small failure probabilities.
  const double t = static_cast<double>(two_phase_post_samples(0.1, 0.01, 1.0, 1.0));
  const double t_light =
      static_cast<double>(two_phase_post_samples_light(0.1, 0.01, 1.0, 1.0));
  CHECK(t_light <= t);
}

TEST_CASE("constant stepsize yields the uniform termination law") {
  const auto law = termination_law(1.0, 1.0, Vector(4, 0.5));
  REQUIRE(law.weights.size() == 4);
  for (double w : law.weights) CHECK(w == doctest::Approx(0.25));
}

TEST_CASE("strict law zeroes the stepsize at the cap") {
  const auto law = termination_law(1.0, 1.0, {0.5, 1.0});
  CHECK(law.weights[0] == doctest::Approx(1.0));
  CHECK(law.weights[1] == doctest::Approx(0.0));
}

TEST_CASE("relaxed law is uniform at the strict cap") {
  const auto law = termination_law(1.0, 1.0, Vector(3, 1.0), true);
  for (double w : law.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("degenerate stepsizes are rejected") {
  CHECK_THROWS(termination_law(1.0, 1.0, {1.0, 1.0}));
  CHECK_THROWS(termination_law(1.0, 1.0, {2.5}));
}

TEST_CASE("pg satisfies the deterministic mapping bound on a quadratic") {
  const Vector c = {1.0, -2.0, 0.5};
  auto problem = quadratic_problem(c, {0.0, 0.0, 0.0}, 0.0);
  const double d_psi_sq = problem.objective_exact(problem.x1);  // L = 1
  for (std::uint64_t n_iters : {1, 5, 40}) {
    SolverConfig config;
    config.lipschitz = 1.0;
    config.stepsize = StepsizePolicy::constant_step(1.0);
    const auto run = pg_solve(problem, Geometry::euclidean(), config, n_iters);
    CHECK(run.output_mapping_norm_sq <=
          2.0 * d_psi_sq / static_cast<double>(n_iters) + 1e-12);
  }
}

TEST_CASE("pg from a stationary point returns it immediately") {
  const Vector c = {0.3, 0.4};
  auto problem = quadratic_problem(c, c, 0.0);
  SolverConfig config;
  config.lipschitz = 1.0;
  config.stepsize = StepsizePolicy::constant_step(1.0);
  const auto run = pg_solve(problem, Geometry::euclidean(), config, 10);
  CHECK(run.random_index == 1);
  CHECK(run.output_x[0] == doctest::Approx(c[0]));
  CHECK(run.output_mapping_norm_sq == doctest::Approx(0.0));
}

TEST_CASE("pg decreases a 1-d nonconvex objective monotonically") {
  CompositeProblem problem;
  problem.x1 = {2.0};
  problem.sfo.true_gradient = [](const Vector& x) {
    return Vector{4.0 * x[0] * x[0] * x[0] - 2.0 * x[0]};
  };
  problem.sfo.query = [&problem](const Vector& x, RngStream&) {
    return problem.sfo.true_gradient(x);
  };
  auto psi = [](double x) { return x * x * x * x - x * x; };
  SolverConfig config;
  config.lipschitz = 46.0;  // sup |f''| on the traversed region
  config.record_trajectory = true;
  const auto run = pg_solve(problem, Geometry::euclidean(), config, 30);
  REQUIRE(run.trajectory.size() >= 2);
  for (std::size_t k = 1; k < run.trajectory.size(); ++k) {
    CHECK(psi(run.trajectory[k][0]) <= psi(run.trajectory[k - 1][0]) + 1e-12);
  }
}

TEST_CASE("pg rejects stepsizes beyond the relaxed cap") {
  auto problem = quadratic_problem({0.0}, {1.0}, 0.0);
  SolverConfig config;
  config.lipschitz = 1.0;
  config.stepsize = StepsizePolicy::constant_step(2.5);
  CHECK_THROWS(pg_solve(problem, Geometry::euclidean(), config, 5));
}

TEST_CASE("noiseless rspg counts exactly (R - 1) calls with m = 1") {
  auto problem = quadratic_problem({1.0, 1.0}, {5.0, -3.0}, 0.0);
  SolverConfig config;
  config.oracle_budget = 50;
  config.lipschitz = 1.0;
  config.sigma = 0.0;
  config.d_tilde = 1.0;
  config.master_seed = 17;
  const auto run = rspg_solve(problem, Geometry::euclidean(), config);
  CHECK(run.random_index >= 1);
  CHECK(run.random_index <= 50);
  CHECK(run.counters.sfo_calls == run.random_index - 1);
}

TEST_CASE("budget equal to the batch size forces R = 1") {
  auto problem = quadratic_problem({1.0}, {4.0}, 0.5);
  SolverConfig config;
  config.oracle_budget = 1;
  config.lipschitz = 1.0;
  config.sigma = 0.0;
  config.d_tilde = 1.0;
  config.master_seed = 3;
  const auto run = rspg_solve(problem, Geometry::euclidean(), config);
  CHECK(run.random_index == 1);
  CHECK(run.output_x[0] == doctest::Approx(4.0));
  CHECK(run.counters.sfo_calls == 0);
}

TEST_CASE("rspg is deterministic in the master seed") {
  auto problem = quadratic_problem({0.2, -0.7, 1.1}, {2.0, 2.0, 2.0}, 0.8);
  SolverConfig config;
  config.oracle_budget = 200;
  config.lipschitz = 1.0;
  config.sigma = 0.8;
  config.d_tilde = 1.0;
  config.master_seed = 123;
  const auto a = rspg_solve(problem, Geometry::euclidean(), config);
  const auto b = rspg_solve(problem, Geometry::euclidean(), config);
  CHECK(a.random_index == b.random_index);
  for (std::size_t j = 0; j < a.output_x.size(); ++j) {
    CHECK(a.output_x[j] == b.output_x[j]);
  }
}

TEST_CASE("post-selection picks the stationary candidate under exact gradients") {
  auto problem = quadratic_problem({1.0, 2.0}, {0.0, 0.0}, 0.0);
  const std::vector<Vector> candidates = {{4.0, -1.0}, {1.0, 2.0}};
  Vector scores;
  OracleCounter counter;
  const std::size_t picked =
      post_select(candidates, {0.5, 0.5}, problem, Geometry::euclidean(), 3,
                  RngStream::from_seed(9), scores, &counter);
  CHECK(picked == 1);
  CHECK(scores[1] < scores[0]);
  CHECK(counter.sfo_calls == 6);  // T per candidate
  CHECK_THROWS(post_select({}, {}, problem, Geometry::euclidean(), 3,
                           RngStream::from_seed(9), scores));
}

TEST_CASE("two-phase runs account post samples separately") {
  auto problem = quadratic_problem({0.5, 0.5}, {3.0, -3.0}, 0.4);
  SolverConfig config;
  config.oracle_budget = 60;
  config.lipschitz = 1.0;
  config.sigma = 0.4;
  config.d_tilde = 1.0;
  config.master_seed = 7;
  const auto run = two_phase_rspg(problem, Geometry::euclidean(), config, 3, 4);
  REQUIRE(run.phase_metadata.has_value());
  CHECK(run.phase_metadata->candidates.size() == 3);
  CHECK(run.phase_metadata->selected < 3);
  CHECK(run.post_counters.sfo_calls == 12);
  CHECK(run.counters.sfo_calls <= 3 * 60);
  const auto& winner =
      run.phase_metadata->candidates[run.phase_metadata->selected];
  for (std::size_t j = 0; j < winner.size(); ++j) {
    CHECK(run.output_x[j] == winner[j]);
  }
}

TEST_CASE("trajectory variant selects a point of one full run") {
  auto problem = quadratic_problem({0.0, 1.0}, {2.0, 2.0}, 0.3);
  SolverConfig config;
  config.oracle_budget = 40;
  config.lipschitz = 1.0;
  config.sigma = 0.3;
  config.d_tilde = 1.0;
  config.master_seed = 29;
  config.record_trajectory = true;
  const auto run =
      two_phase_rspg_v(problem, Geometry::euclidean(), config, 5, 4);
  REQUIRE(run.phase_metadata.has_value());
  CHECK(run.phase_metadata->candidates.size() == 5);
  CHECK(run.post_counters.sfo_calls == 20);
  bool found = false;
  for (const auto& point : run.trajectory) {
    bool equal = true;
    for (std::size_t j = 0; j < point.size(); ++j) {
      equal = equal && point[j] == run.output_x[j];
    }
    found = found || equal;
  }
  CHECK(found);
}

TEST_CASE("zeroth-order solver stays on budget and counts call pairs") {
  CompositeProblem problem;
  const Vector c = {0.4, -0.3};
  problem.x1 = {1.5, 1.5};
  problem.szo.query = [c](const Vector& x, RngStream&) {
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      v += 0.5 * (x[j] - c[j]) * (x[j] - c[j]);
    }
    return v;
  };
  problem.szo.shared_query = [&problem](const Vector& a, const Vector& b,
                                        RngStream& rng) {
    return std::make_pair(problem.szo.query(a, rng),
                          problem.szo.query(b, rng));
  };
  SolverConfig config;
  config.oracle_budget = 120;
  config.lipschitz = 1.0;
  config.sigma = 0.0;
  config.d_tilde = 1.0;
  config.grad_bound = 2.0;
  config.master_seed = 2;
  const auto run = rspgf_solve(problem, Geometry::euclidean(), config);
  CHECK(run.counters.szo_calls <= 120);
  CHECK(run.counters.sfo_calls == 0);
  CHECK(run.random_index >= 1);
}

TEST_CASE("theory bounds cover documented arithmetic cases") {
  ProblemConstants constants;
  constants.lipschitz = 1.0;
  constants.sigma = 0.0;
  constants.alpha = 1.0;
  constants.d_tilde = 1.0;
  constants.dim = 4;
  constants.d_psi = 1.0;
  SolverConfig config;
  config.oracle_budget = 16;
  config.lipschitz = 1.0;
  config.sigma = 0.0;
  config.d_tilde = 1.0;
  const auto bounds = compute_theory_bounds(constants, config);
  REQUIRE(bounds.rspg_nonconvex_b.has_value());
  CHECK(*bounds.rspg_nonconvex_b == doctest::Approx(1.0));
  // sigma~^2 = 2(n+4)(M^2 + sigma^2) when mu = 0
  ProblemConstants zo = constants;
  zo.grad_bound = 3.0;
  zo.mu = 0.0;
  const auto zo_bounds = compute_theory_bounds(zo, config);
  REQUIRE(zo_bounds.sigma_tilde_sq.has_value());
  CHECK(*zo_bounds.sigma_tilde_sq == doctest::Approx(2.0 * 8.0 * 9.0));
  // Unbounded X leaves the nonincreasing-stepsize convex bound absent.
  CHECK(!bounds.convex_nonincreasing_gap.has_value());
}
