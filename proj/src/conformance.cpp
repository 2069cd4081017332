#include "rspg/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rspg/bench.hpp"
#include "rspg/solvers.hpp"

namespace rspg {

namespace {

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term, ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(log_prefix);
  }
  // Lentz continued fraction for Q(a, x).
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double dual_norm(const Geometry& geometry, const Vector& v) {
  return geometry.kind == GeometryKind::kEntropySimplex ? norm_inf(v)
                                                        : norm2(v);
}

Vector random_normal_vec(std::size_t n, double scale, RngStream& rng) {
  Vector v(n);
  for (double& x : v) x = scale * rng.next_normal();
  return v;
}

Vector random_simplex_interior(std::size_t n, RngStream& rng) {
  Vector x(n);
  double total = 0.0;
  for (double& v : x) {
    v = std::exp(rng.next_normal());
    total += v;
  }
  for (double& v : x) v /= total;
  return x;
}

double prox_objective(const Geometry& geometry, const SimpleTerm& h,
                      const Vector& x, const Vector& g, double gamma,
                      const Vector& u) {
  return dot(g, u) + bregman_divergence(geometry, u, x) / gamma + h.value(u);
}

struct Failure {
  bool failed = false;
  std::string detail;
  std::size_t count = 0;

  void note(const std::string& msg) {
    if (!failed) detail = msg;
    failed = true;
    ++count;
  }
};

}  // namespace

double chi_square_p_value(double stat, std::uint64_t dof) {
  return 1.0 - regularized_gamma_p(static_cast<double>(dof) / 2.0, stat / 2.0);
}

// ---- 1: prox property suite + brute-force grid agreement ----

namespace {

void run_prox_properties(const Geometry& geometry, const FeasibleSet& set,
                         const SimpleTerm& h, const Vector& x, const Vector& g,
                         double gamma, RngStream& rng, Failure& fail) {
  const double tol = 1e-8;
  const double alpha = geometry.modulus_alpha();
  const ProxResult prox = prox_step(geometry, set, h, x, g, gamma);
  if (!set.contains(prox.x_plus, 1e-9)) {
    fail.note("prox left the feasible set");
    return;
  }
  const double pnorm = geometry.norm(prox.mapping);
  const double lhs1 = dot(g, prox.mapping);
  const double rhs1 =
      alpha * pnorm * pnorm + (h.value(prox.x_plus) - h.value(x)) / gamma;
  if (lhs1 < rhs1 - tol) {
    fail.note("size inequality violated by " + fmt(rhs1 - lhs1));
  }

  Vector g2 = g;
  for (double& v : g2) v += rng.next_normal();
  const ProxResult prox2 = prox_step(geometry, set, h, x, g2, gamma);
  Vector xdiff(x.size()), pdiff(x.size()), gdiff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xdiff[i] = prox2.x_plus[i] - prox.x_plus[i];
    pdiff[i] = prox2.mapping[i] - prox.mapping[i];
    gdiff[i] = g2[i] - g[i];
  }
  const double gd = dual_norm(geometry, gdiff);
  if (geometry.norm(xdiff) > gamma / alpha * gd + tol) {
    fail.note("projection Lipschitz bound violated");
  }
  if (geometry.norm(pdiff) > gd / alpha + tol) {
    fail.note("mapping Lipschitz bound violated");
  }

  Vector u;
  switch (set.kind) {
    case SetKind::kAllSpace:
      u = random_normal_vec(x.size(), 2.0, rng);
      break;
    case SetKind::kBox:
      u.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = set.lower[i] + rng.next_uniform() * (set.upper[i] - set.lower[i]);
      }
      break;
    case SetKind::kSimplex:
      u = random_simplex_interior(x.size(), rng);
      break;
  }
  const double lhs3 = dot(g, prox.x_plus) + h.value(prox.x_plus) +
                      bregman_divergence(geometry, prox.x_plus, x) / gamma;
  const double rhs3 = dot(g, u) + h.value(u) +
                      (bregman_divergence(geometry, u, x) -
                       bregman_divergence(geometry, u, prox.x_plus)) /
                          gamma;
  if (lhs3 > rhs3 + tol) {
    fail.note("three-point inequality violated by " + fmt(lhs3 - rhs3));
  }
}

void run_grid_check_euclidean(const FeasibleSet& set, const SimpleTerm& h,
                              const Vector& x, const Vector& g, double gamma,
                              Failure& fail) {
  const Geometry geometry = Geometry::euclidean();
  const ProxResult prox = prox_step(geometry, set, h, x, g, gamma);
  const std::size_t d = x.size();
  const int steps = 41;
  Vector lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (set.kind == SetKind::kBox) {
      lo[i] = set.lower[i];
      hi[i] = set.upper[i];
    } else {
      const double half = gamma * (norm_inf(g) + h.weight) + 1.0;
      lo[i] = x[i] - half;
      hi[i] = x[i] + half;
    }
  }
  double best = 1e300;
  Vector best_u(d), u(d);
  std::vector<int> idx(d, 0);
  for (;;) {
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (steps - 1);
    }
    const double val = prox_objective(geometry, h, x, g, gamma, u);
    if (val < best) {
      best = val;
      best_u = u;
    }
    std::size_t carry = 0;
    while (carry < d && ++idx[carry] == steps) {
      idx[carry] = 0;
      ++carry;
    }
    if (carry == d) break;
  }
  const double closed = prox_objective(geometry, h, x, g, gamma, prox.x_plus);
  if (closed > best + 1e-12) {
    fail.note("grid found a better point than the closed-form prox");
  }
  double max_spacing = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    max_spacing = std::max(max_spacing, (hi[i] - lo[i]) / (steps - 1));
  }
  Vector diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = best_u[i] - prox.x_plus[i];
  if (norm2(diff) > 2.0 * std::sqrt(static_cast<double>(d)) * max_spacing) {
    fail.note("grid argmin far from the closed-form prox");
  }
}

void run_grid_check_entropy(const Vector& x, const Vector& g, double gamma,
                            Failure& fail) {
  const Geometry geometry = Geometry::entropy_simplex();
  const SimpleTerm h = SimpleTerm::zero();
  const ProxResult prox =
      prox_step(geometry, FeasibleSet::simplex(), h, x, g, gamma);
  const double closed = prox_objective(geometry, h, x, g, gamma, prox.x_plus);
  double best = 1e300;
  Vector best_u;
  if (x.size() == 2) {
    const int m = 2000;
    for (int i = 1; i < m; ++i) {
      const double t = static_cast<double>(i) / m;
      const Vector u = {t, 1.0 - t};
      const double val = prox_objective(geometry, h, x, g, gamma, u);
      if (val < best) {
        best = val;
        best_u = u;
      }
    }
    Vector diff = {best_u[0] - prox.x_plus[0], best_u[1] - prox.x_plus[1]};
    if (closed > best + 1e-12) fail.note("entropy grid beat the closed form");
    if (norm1(diff) > 6.0 / m) fail.note("entropy grid argmin far from prox");
  } else {
    const int m = 120;
    for (int i = 1; i < m; ++i) {
      for (int j = 1; i + j < m; ++j) {
        const Vector u = {static_cast<double>(i) / m,
                          static_cast<double>(j) / m,
                          1.0 - static_cast<double>(i + j) / m};
        const double val = prox_objective(geometry, h, x, g, gamma, u);
        if (val < best) {
          best = val;
          best_u = u;
        }
      }
    }
    Vector diff(3);
    for (std::size_t i = 0; i < 3; ++i) diff[i] = best_u[i] - prox.x_plus[i];
    if (closed > best + 1e-12) fail.note("entropy grid beat the closed form");
    if (norm1(diff) > 8.0 / m) fail.note("entropy grid argmin far from prox");
  }
}

}  // namespace

CheckResult check_prox_properties() {
  RngStream rng = RngStream::from_seed(12021);
  Failure fail;

  RngStream euclid = rng.child(0);
  for (int trial = 0; trial < 1000; ++trial) {
    RngStream sub = euclid.child(trial);
    const std::size_t d = 1 + trial % 5;
    const int variant = trial % 4;  // set x h combination
    const Geometry geometry = Geometry::euclidean();
    FeasibleSet set = FeasibleSet::all_space();
    Vector x;
    if (variant >= 2) {
      Vector lo(d), hi(d);
      x.resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = -1.0 - sub.next_uniform();
        hi[i] = lo[i] + 0.5 + 2.0 * sub.next_uniform();
        x[i] = lo[i] + sub.next_uniform() * (hi[i] - lo[i]);
      }
      set = FeasibleSet::box(std::move(lo), std::move(hi));
    } else {
      x = random_normal_vec(d, 1.0, sub);
    }
    const SimpleTerm h = (variant % 2 == 0)
                             ? SimpleTerm::zero()
                             : SimpleTerm::l1(0.3 * sub.next_uniform());
    const Vector g = random_normal_vec(d, 2.0, sub);
    const double gamma = 0.05 + 1.95 * sub.next_uniform();
    run_prox_properties(geometry, set, h, x, g, gamma, sub, fail);
  }

  RngStream entropy = rng.child(1);
  for (int trial = 0; trial < 1000; ++trial) {
    RngStream sub = entropy.child(trial);
    const std::size_t d = 2 + trial % 4;
    const Vector x = random_simplex_interior(d, sub);
    const Vector g = random_normal_vec(d, 2.0, sub);
    const double gamma = 0.05 + 1.95 * sub.next_uniform();
    run_prox_properties(Geometry::entropy_simplex(), FeasibleSet::simplex(),
                        SimpleTerm::zero(), x, g, gamma, sub, fail);
  }

  RngStream grid = rng.child(2);
  for (int trial = 0; trial < 30; ++trial) {
    RngStream sub = grid.child(trial);
    const std::size_t d = 1 + trial % 3;
    const SimpleTerm h = (trial % 2 == 0)
                             ? SimpleTerm::zero()
                             : SimpleTerm::l1(0.3 * sub.next_uniform());
    const Vector x = random_normal_vec(d, 1.0, sub);
    const Vector g = random_normal_vec(d, 2.0, sub);
    const double gamma = 0.1 + sub.next_uniform();
    run_grid_check_euclidean(FeasibleSet::all_space(), h, x, g, gamma, fail);

    Vector lo(d), hi(d), xb(d);
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = -1.0 - sub.next_uniform();
      hi[i] = lo[i] + 0.5 + 2.0 * sub.next_uniform();
      xb[i] = lo[i] + sub.next_uniform() * (hi[i] - lo[i]);
    }
    run_grid_check_euclidean(FeasibleSet::box(lo, hi), h, xb, g, gamma, fail);
  }
  RngStream egrid = rng.child(3);
  for (int trial = 0; trial < 20; ++trial) {
    RngStream sub = egrid.child(trial);
    const std::size_t d = 2 + trial % 2;
    const Vector x = random_simplex_interior(d, sub);
    const Vector g = random_normal_vec(d, 2.0, sub);
    const double gamma = 0.1 + sub.next_uniform();
    run_grid_check_entropy(x, g, gamma, fail);
  }

  return {"prox property suite", !fail.failed,
          fail.failed ? fail.detail + " (" + std::to_string(fail.count) +
                            " failures)"
                      : "size, Lipschitz, three-point and grid checks passed"};
}

// ---- 2: exact PG bound on a convex quadratic ----

namespace {

// Diagonal quadratic f(x) = 1/2 sum q_i (x_i - c_i)^2, minimum value 0.
struct Quadratic {
  Vector q, c;

  double value(const Vector& x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c[i];
      total += 0.5 * q[i] * d * d;
    }
    return total;
  }
  Vector gradient(const Vector& x) const {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = q[i] * (x[i] - c[i]);
    return g;
  }
};

CompositeProblem quadratic_problem(const Quadratic& quad, Vector x1) {
  CompositeProblem problem;
  problem.x1 = std::move(x1);
  problem.sfo.true_gradient = [quad](const Vector& x) {
    return quad.gradient(x);
  };
  problem.sfo.query = [quad](const Vector& x, RngStream&) {
    return quad.gradient(x);
  };
  problem.objective_exact = [quad](const Vector& x) { return quad.value(x); };
  return problem;
}

}  // namespace

CheckResult check_pg_bound() {
  RngStream rng = RngStream::from_seed(22);
  const std::size_t n = 10;
  Quadratic quad;
  quad.q.resize(n);
  quad.c.resize(n);
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    quad.q[i] = 0.5 + 2.5 * rng.next_uniform();
    quad.c[i] = rng.next_normal();
    lipschitz = std::max(lipschitz, quad.q[i]);
  }
  const Vector x1 = random_normal_vec(n, 2.0, rng);
  const CompositeProblem problem = quadratic_problem(quad, x1);
  const Geometry geometry = Geometry::euclidean();
  const double d_psi_sq = quad.value(x1) / lipschitz;

  SolverConfig config;
  config.lipschitz = lipschitz;
  config.stepsize = StepsizePolicy::constant_step(1.0 / lipschitz);
  for (std::uint64_t n_iters = 1; n_iters <= 100; ++n_iters) {
    const SolverRun run = pg_solve(problem, geometry, config, n_iters);
    const double bound = 2.0 * lipschitz * lipschitz * d_psi_sq /
                         static_cast<double>(n_iters);
    if (run.output_mapping_norm_sq > bound + 1e-12) {
      return {"exact PG bound", false,
              "violated at N=" + std::to_string(n_iters) + ": " +
                  fmt(run.output_mapping_norm_sq) + " > " + fmt(bound)};
    }
  }
  return {"exact PG bound", true, "holds for every N in 1..100"};
}

// ---- 3: RSPG expectation conformance on a stochastic quadratic ----

CheckResult check_rspg_expectation() {
  const std::size_t n = 50;
  const double sigma = 1.0, lipschitz = 1.0, alpha = 1.0;
  RngStream rng = RngStream::from_seed(333);
  Vector c = random_normal_vec(n, 1.0, rng);
  const double cnorm = norm2(c);
  for (double& v : c) v /= cnorm;  // |x1 - c| = 1 with x1 = 0

  CompositeProblem problem;
  problem.x1.assign(n, 0.0);
  const double coord_sd = sigma / std::sqrt(static_cast<double>(n));
  problem.sfo.query = [c, coord_sd](const Vector& x, RngStream& r) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = x[i] - c[i] + coord_sd * r.next_normal();
    }
    return g;
  };
  problem.sfo.true_gradient = [c](const Vector& x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - c[i];
    return g;
  };
  auto psi = [c](const Vector& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c[i];
      total += 0.5 * d * d;
    }
    return total;
  };
  const Geometry geometry = Geometry::euclidean();

  const double d_psi_sq = psi(problem.x1) / lipschitz;  // = 1/2
  const double v_star = d_psi_sq;                       // V(x*, x1) = 1/2
  SolverConfig config;
  config.oracle_budget = 1000;
  config.lipschitz = lipschitz;
  config.sigma = sigma;
  config.d_tilde = std::sqrt(d_psi_sq);
  const std::uint64_t m = rspg_batch_size(config.oracle_budget, sigma,
                                          lipschitz, config.d_tilde);
  const std::uint64_t n_iters = config.oracle_budget / m;

  const int reps = 200;
  double sum_g = 0.0, sum_g2 = 0.0, sum_gap = 0.0, sum_gap2 = 0.0;
  RngStream seeds = rng.child(1);
  RngStream evals = rng.child(2);
  for (int r = 0; r < reps; ++r) {
    SolverConfig cfg = config;
    {
      RngStream s = seeds.child(r);
      cfg.master_seed = s.next_u64();
    }
    const SolverRun run = rspg_solve(problem, geometry, cfg);
    RngStream eval = evals.child(r);
    const MiniBatchResult batch =
        minibatch_mean(problem.sfo, run.output_x, m, eval);
    const double g2 = dot(batch.mean_gradient, batch.mean_gradient);
    const double gap = psi(run.output_x);  // Psi* = 0
    sum_g += g2;
    sum_g2 += g2 * g2;
    sum_gap += gap;
    sum_gap2 += gap * gap;
  }
  const double mean_g = sum_g / reps;
  const double se_g = std::sqrt(
      std::max(0.0, sum_g2 / reps - mean_g * mean_g) / (reps - 1.0));
  const double mean_gap = sum_gap / reps;
  const double se_gap = std::sqrt(
      std::max(0.0, sum_gap2 / reps - mean_gap * mean_gap) / (reps - 1.0));

  const double bound_g =
      4.0 * lipschitz * lipschitz * d_psi_sq /
          (alpha * alpha * static_cast<double>(n_iters)) +
      2.0 * sigma * sigma / (alpha * alpha * static_cast<double>(m));
  const double bound_gap =
      2.0 * lipschitz * v_star / (static_cast<double>(n_iters) * alpha) +
      sigma * sigma / (2.0 * lipschitz * static_cast<double>(m));

  const bool ok_g = mean_g <= bound_g + 3.0 * se_g;
  const bool ok_gap = mean_gap <= bound_gap + 3.0 * se_gap;
  std::ostringstream detail;
  detail << "mean |g~|^2 " << fmt(mean_g) << " vs bound " << fmt(bound_g)
         << "; mean gap " << fmt(mean_gap) << " vs bound " << fmt(bound_gap);
  return {"RSPG expectation conformance", ok_g && ok_gap, detail.str()};
}

// ---- 4: Gaussian smoothing identities ----

CheckResult check_smoothing_identities() {
  RngStream rng = RngStream::from_seed(44);

  // Quadratic trace identity via Monte Carlo.
  const std::size_t n = 6;
  Vector diag(n);
  double trace = 0.0;
  for (double& q : diag) {
    q = 0.2 + 2.0 * rng.next_uniform();
    trace += q;
  }
  const Vector x0 = random_normal_vec(n, 1.0, rng);
  const double mu = 0.1;
  auto f_quad = [&diag](const Vector& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      total += 0.5 * diag[i] * y[i] * y[i];
    }
    return total;
  };
  const std::uint64_t samples = 200000;
  RngStream mc = rng.child(0);
  double sum = 0.0, sum2 = 0.0;
  Vector y(n);
  for (std::uint64_t s = 0; s < samples; ++s) {
    RngStream sub = mc.child(s);
    for (std::size_t i = 0; i < n; ++i) y[i] = x0[i] + mu * sub.next_normal();
    const double v = f_quad(y);
    sum += v;
    sum2 += v * v;
  }
  const double mc_mean = sum / static_cast<double>(samples);
  const double mc_se = std::sqrt(
      std::max(0.0, sum2 / static_cast<double>(samples) - mc_mean * mc_mean) /
      static_cast<double>(samples - 1));
  const double target = f_quad(x0) + mu * mu / 2.0 * trace;
  if (std::fabs(mc_mean - target) > 3.0 * mc_se) {
    return {"smoothing identities", false,
            "Monte Carlo smoothed quadratic " + fmt(mc_mean) +
                " misses the trace identity " + fmt(target)};
  }

  // Closed-form smoothing of L * sum (1 - cos x_i): the shifted cosine has
  // expectation exp(-mu^2/2) cos x_i.
  const std::size_t nc = 8;
  const double lip = 2.0;
  for (double mu_c : {0.05, 0.3, 1.0}) {
    const double damp = std::exp(-mu_c * mu_c / 2.0);
    for (int trial = 0; trial < 50; ++trial) {
      RngStream sub = rng.child(100 + trial);
      const Vector x = random_normal_vec(nc, 2.0, sub);
      double value_gap = 0.0, grad_gap_sq = 0.0;
      for (std::size_t i = 0; i < nc; ++i) {
        value_gap += lip * (1.0 - damp) * std::cos(x[i]);
        const double gd = lip * (damp - 1.0) * std::sin(x[i]);
        grad_gap_sq += gd * gd;
      }
      const double value_bound = mu_c * mu_c * lip * static_cast<double>(nc) / 2.0;
      const double grad_bound =
          mu_c / 2.0 * lip * std::pow(static_cast<double>(nc) + 3.0, 1.5);
      if (std::fabs(value_gap) > value_bound + 1e-12) {
        return {"smoothing identities", false,
                "value gap bound violated at mu=" + fmt(mu_c)};
      }
      if (std::sqrt(grad_gap_sq) > grad_bound + 1e-12) {
        return {"smoothing identities", false,
                "gradient gap bound violated at mu=" + fmt(mu_c)};
      }
    }
  }
  return {"smoothing identities", true,
          "trace identity within 3 SE; C_L^{1,1} gap bounds hold"};
}

// ---- 5: zeroth-order vs first-order agreement ----

CheckResult check_zeroth_first_agreement() {
  const std::size_t n = 5;
  RngStream rng = RngStream::from_seed(55);
  Vector c = random_normal_vec(n, 1.0, rng);
  const double cnorm = norm2(c);
  for (double& v : c) v *= 0.002 / cnorm;

  CompositeProblem problem;
  problem.x1.assign(n, 0.0);
  problem.sfo.query = [c](const Vector& x, RngStream&) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - c[i];
    return g;
  };
  problem.sfo.true_gradient = [c](const Vector& x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - c[i];
    return g;
  };
  auto value = [c](const Vector& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c[i];
      total += 0.5 * d * d;
    }
    return total;
  };
  problem.szo.query = [value](const Vector& x, RngStream&) { return value(x); };
  problem.szo.shared_query = [value](const Vector& a, const Vector& b,
                                     RngStream&) {
    return std::make_pair(value(a), value(b));
  };
  const Geometry geometry = Geometry::euclidean();

  SolverConfig zo;
  zo.oracle_budget = 30000;
  zo.lipschitz = 1.0;
  zo.sigma = 0.0;
  zo.d_tilde = 1.0;
  zo.grad_bound = 3.0;
  zo.mu_override = 1e-6;
  const std::uint64_t m =
      rspgf_batch_size(zo.oracle_budget, n, zo.grad_bound, 0.0, 1.0, 1.0);
  const std::uint64_t n_iters = zo.oracle_budget / m;

  SolverConfig fo = zo;
  fo.oracle_budget = n_iters;  // sigma = 0 gives m = 1 and the same N

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const RngStream root = RngStream::from_seed(seed);
    const SolverRun run_fo = rspg_solve(problem, geometry, fo, root);
    const SolverRun run_zo = rspgf_solve(problem, geometry, zo, root);
    if (run_fo.random_index != run_zo.random_index) {
      return {"zeroth/first-order agreement", false,
              "paired runs drew different termination indices"};
    }
    const double norm_fo = norm2(problem.sfo.true_gradient(run_fo.output_x));
    const double norm_zo = norm2(problem.sfo.true_gradient(run_zo.output_x));
    if (std::fabs(norm_fo - norm_zo) > 1e-3) {
      return {"zeroth/first-order agreement", false,
              "mapping norms differ by " + fmt(std::fabs(norm_fo - norm_zo))};
    }
  }
  return {"zeroth/first-order agreement", true,
          "paired-seed runs agree within 1e-3 on five seeds"};
}

// ---- 6: termination-law chi-square ----

CheckResult check_termination_law() {
  RngStream rng = RngStream::from_seed(66);
  struct Case {
    std::string label;
    Vector gammas;
    bool relaxed;
  };
  std::vector<Case> cases;
  cases.push_back({"constant", Vector(40, 0.5), false});
  Vector sched(25);
  for (std::size_t k = 0; k < sched.size(); ++k) {
    sched[k] = 0.2 + 0.6 * static_cast<double>(k + 1) /
                         static_cast<double>(sched.size());
  }
  cases.push_back({"scheduled", sched, false});
  Vector relaxed_sched(30);
  for (std::size_t k = 0; k < relaxed_sched.size(); ++k) {
    relaxed_sched[k] = 1.0 + 0.5 * static_cast<double>(k + 1) /
                                 static_cast<double>(relaxed_sched.size());
  }
  cases.push_back({"relaxed", relaxed_sched, true});

  const std::uint64_t draws = 20000;
  int case_index = 0;
  for (const auto& test_case : cases) {
    const TerminationLaw law =
        termination_law(1.0, 1.0, test_case.gammas, test_case.relaxed);
    std::vector<std::uint64_t> counts(law.weights.size(), 0);
    RngStream stream = rng.child(case_index++);
    for (std::uint64_t i = 0; i < draws; ++i) {
      ++counts[law.sample(stream) - 1];
    }
    double stat = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double expected = law.weights[k] * static_cast<double>(draws);
      const double diff = static_cast<double>(counts[k]) - expected;
      stat += diff * diff / expected;
    }
    const double p = chi_square_p_value(stat, counts.size() - 1);
    if (!(p > 0.001)) {
      return {"termination-law distribution", false,
              test_case.label + " schedule: chi-square p = " + fmt(p)};
    }
  }
  return {"termination-law distribution", true,
          "chi-square p > 0.001 for constant, scheduled and relaxed laws"};
}

// ---- 7: parameter formulas vs independent evaluation ----

namespace {

bool integers_match(std::uint64_t got, long double raw) {
  const long double clamped_ceil = std::ceil(raw);
  const auto expected = static_cast<std::uint64_t>(clamped_ceil);
  if (got == expected) return true;
  // Ceiling boundary: accept an off-by-one when raw sits at an integer.
  const long double nearest = std::llround(raw);
  const bool boundary =
      std::fabs(static_cast<double>(raw - nearest)) <=
      1e-9 * std::max(1.0, std::fabs(static_cast<double>(raw)));
  return boundary && (got + 1 == expected || got == expected + 1);
}

}  // namespace

CheckResult check_parameter_formulas() {
  RngStream rng = RngStream::from_seed(77);
  for (int trial = 0; trial < 50; ++trial) {
    RngStream sub = rng.child(trial);
    const double sigma = 5.0 * sub.next_uniform();
    const double lip = 0.1 + 9.9 * sub.next_uniform();
    const double d_tilde = 0.1 + 9.9 * sub.next_uniform();
    const auto budget =
        1 + static_cast<std::uint64_t>(sub.next_uniform() * 1e6);
    const auto dim = 1 + static_cast<std::size_t>(sub.next_uniform() * 999);
    const double grad_bound = 10.0 * sub.next_uniform();
    const double epsilon = 1e-4 + sub.next_uniform();
    const double lambda = 0.001 + 0.499 * sub.next_uniform();
    const double d_psi = 0.1 + 4.9 * sub.next_uniform();
    const double alpha = 1.0;

    const long double budget_l = static_cast<long double>(budget);
    {
      long double raw = sigma * std::sqrt(6.0L * budget_l) /
                        (4.0L * lip * d_tilde);
      raw = std::min(std::max(raw, 1.0L), budget_l);
      if (!integers_match(rspg_batch_size(budget, sigma, lip, d_tilde), raw)) {
        return {"parameter formulas", false,
                "first-order batch size mismatch at trial " +
                    std::to_string(trial)};
      }
    }
    {
      const long double n4 = static_cast<long double>(dim) + 4.0L;
      long double raw = std::sqrt(
                            n4 * (static_cast<long double>(grad_bound) * grad_bound +
                                  static_cast<long double>(sigma) * sigma) *
                            budget_l) /
                        (lip * d_tilde);
      raw = std::min(std::max(raw, n4), budget_l);
      if (!integers_match(
              rspgf_batch_size(budget, dim, grad_bound, sigma, lip, d_tilde),
              raw)) {
        return {"parameter formulas", false,
                "zeroth-order batch size mismatch at trial " +
                    std::to_string(trial)};
      }
    }
    {
      const double n4 = static_cast<double>(dim) + 4.0;
      const double mu_nc = d_psi / std::sqrt(n4 * static_cast<double>(budget));
      const double mu_c = std::sqrt(d_psi / (n4 * static_cast<double>(budget)));
      if (std::fabs(rspgf_smoothing_mu(d_psi, dim, budget, false) - mu_nc) >
              1e-12 * mu_nc ||
          std::fabs(rspgf_smoothing_mu(d_psi, dim, budget, true) - mu_c) >
              1e-12 * mu_c) {
        return {"parameter formulas", false, "smoothing parameter mismatch"};
      }
    }
    const long double s_raw = std::log2(2.0L / static_cast<long double>(lambda));
    if (!integers_match(two_phase_num_runs(lambda), s_raw)) {
      return {"parameter formulas", false, "run-count formula mismatch"};
    }
    {
      const long double a2e = static_cast<long double>(alpha) * alpha * epsilon;
      const long double t1 = 512.0L * lip * lip * d_psi * d_psi / a2e;
      const long double inner =
          (d_tilde + static_cast<long double>(d_psi) * d_psi / d_tilde) *
          128.0L * std::sqrt(6.0L) * lip * sigma / a2e;
      const long double t3 =
          3.0L * sigma * sigma / (8.0L * lip * lip * d_tilde * d_tilde);
      const long double raw = std::max({t1, inner * inner, t3});
      if (!integers_match(
              two_phase_budget(epsilon, lip, d_psi, d_tilde, sigma, alpha),
              raw)) {
        return {"parameter formulas", false, "budget formula mismatch"};
      }
    }
    {
      const long double s =
          std::ceil(std::log2(2.0L / static_cast<long double>(lambda)));
      const long double raw = 24.0L * s * sigma * sigma /
                              (alpha * alpha * lambda * epsilon);
      if (!integers_match(two_phase_post_samples(epsilon, lambda, sigma, alpha),
                          raw)) {
        return {"parameter formulas", false, "post-sample formula mismatch"};
      }
      const long double root = std::sqrt(3.0L * std::log2(2.0L * s / lambda));
      const long double raw_light = 24.0L * sigma * sigma /
                                    (alpha * alpha * epsilon) * (1.0L + root) *
                                    (1.0L + root);
      if (!integers_match(
              two_phase_post_samples_light(epsilon, lambda, sigma, alpha),
              raw_light)) {
        return {"parameter formulas", false, "light-tail sample mismatch"};
      }
    }
  }
  return {"parameter formulas", true,
          "all seven formulas match on 50 random tuples"};
}

// ---- 8: qualitative trend reproduction ----

CheckResult check_trend_reproduction(unsigned threads) {
  ExperimentConfig config;
  config.scenario = "lsq-trend";
  config.seed = 4242;
  const ExperimentReport report = run_experiment(config, threads);
  if (!report.skipped.empty()) {
    return {"trend reproduction", false,
            "unexpected skipped cell: " + report.skipped.front().reason};
  }
  const std::vector<SummaryRow> summary = summarize(report);
  auto cell = [&](const std::string& alg,
                  std::uint64_t ns) -> const SummaryRow* {
    for (const auto& s : summary) {
      if (s.algorithm == alg && s.ns == ns) return &s;
    }
    return nullptr;
  };
  for (const auto& alg : config.algorithms) {
    double prev = 1e300;
    for (auto ns : config.budgets) {
      const SummaryRow* s = cell(alg, ns);
      if (s == nullptr) return {"trend reproduction", false, "missing cell"};
      if (s->mean_mapping > prev) {
        return {"trend reproduction", false,
                alg + " mean not non-increasing in NS (" + fmt(s->mean_mapping) +
                    " at NS=" + std::to_string(ns) + ")"};
      }
      prev = s->mean_mapping;
    }
  }
  const SummaryRow* rspg = cell("RSPG", 25000);
  const SummaryRow* two = cell("2-RSPG", 25000);
  const SummaryRow* twov = cell("2-RSPG-V", 25000);
  if (!rspg || !two || !twov || !rspg->var_mapping || !two->var_mapping) {
    return {"trend reproduction", false, "missing NS=25000 cells"};
  }
  if (*two->var_mapping > *rspg->var_mapping) {
    return {"trend reproduction", false,
            "two-phase variance " + fmt(*two->var_mapping) +
                " exceeds plain RSPG variance " + fmt(*rspg->var_mapping)};
  }
  if (twov->mean_mapping > two->mean_mapping) {
    return {"trend reproduction", false,
            "2-RSPG-V mean " + fmt(twov->mean_mapping) +
                " exceeds 2-RSPG mean " + fmt(two->mean_mapping)};
  }
  if (!twov->mean_zero || *twov->mean_zero < 0.9) {
    return {"trend reproduction", false,
            "2-RSPG-V zero-recovery ratio " +
                (twov->mean_zero ? fmt(*twov->mean_zero) : "absent") +
                " below 0.9"};
  }
  return {"trend reproduction", true,
          "monotone means, reduced two-phase variance, zero recovery " +
              fmt(*twov->mean_zero)};
}

// ---- 9: bias-box constraint maintenance ----

CheckResult check_constraint_maintenance() {
  const std::size_t n = 20;
  const double delta = 0.1;
  S3vmInstance inst = gen_s3vm(n, 0.05, delta, 1.0, 0.5, 0.5, 99);
  const double center = 2.0 * inst.positive_ratio - 1.0;
  const Geometry geometry = Geometry::euclidean();
  RngStream rng = RngStream::from_seed(990);
  const ProblemParams params =
      estimate_parameters(inst.problem, inst.problem.x1, 200, rng.child(0));

  SolverConfig config;
  config.oracle_budget = 2000;
  config.lipschitz = params.lipschitz_hat;
  config.sigma = params.sigma_hat;
  config.d_tilde = params.d_tilde;
  config.grad_bound = params.grad_bound_hat;
  config.record_trajectory = true;
  {
    RngStream s = rng.child(1);
    config.master_seed = s.next_u64();
  }

  auto feasible = [&](const Vector& z) {
    return std::fabs(z[n] - center) <= delta + 1e-12;
  };
  auto all_feasible = [&](const SolverRun& run, const std::string& alg)
      -> std::string {
    if (!feasible(run.output_x)) return alg + " output infeasible";
    for (const auto& z : run.trajectory) {
      if (!feasible(z)) return alg + " iterate infeasible";
    }
    if (run.phase_metadata) {
      for (const auto& z : run.phase_metadata->candidates) {
        if (!feasible(z)) return alg + " candidate infeasible";
      }
    }
    return "";
  };

  if (!feasible(inst.problem.x1)) {
    return {"bias-box constraint", false, "initial point infeasible"};
  }
  std::string msg = all_feasible(rspg_solve(inst.problem, geometry, config),
                                 "RSPG");
  if (msg.empty()) {
    msg = all_feasible(rspgf_solve(inst.problem, geometry, config), "RSPGF");
  }
  if (msg.empty()) {
    msg = all_feasible(
        two_phase_rspg_v(inst.problem, geometry, config, 5, 50), "2-RSPG-V");
  }
  if (msg.empty()) {
    SolverConfig two = config;
    two.oracle_budget = 400;
    msg = all_feasible(two_phase_rspg(inst.problem, geometry, two, 5, 50),
                       "2-RSPG");
  }
  if (!msg.empty()) return {"bias-box constraint", false, msg};
  return {"bias-box constraint", true,
          "all iterates keep the bias inside its box"};
}

// ---- 10: thread-count reproducibility ----

CheckResult check_reproducibility() {
  ExperimentConfig config;
  config.scenario = "repro";
  config.n = 30;
  config.algorithms = {"PG", "RSPG", "2-RSPG", "2-RSPG-V", "RSPGF"};
  config.budgets = {500, 2000};
  config.replications = 3;
  config.k_eval = 2000;
  config.n0 = 100;
  config.seed = 7;

  std::string reference_csv, reference_json;
  for (unsigned threads : {1u, 4u, 8u}) {
    const ExperimentReport report = run_experiment(config, threads);
    const std::string csv = report_to_csv(report);
    const std::string json_text = report_to_json(report);
    if (threads == 1) {
      reference_csv = csv;
      reference_json = json_text;
    } else if (csv != reference_csv || json_text != reference_json) {
      return {"thread-count reproducibility", false,
              "report differs at " + std::to_string(threads) + " threads"};
    }
  }
  return {"thread-count reproducibility", true,
          "byte-identical CSV and JSON at 1, 4 and 8 threads"};
}

std::vector<CheckResult> run_all_checks(unsigned threads) {
  std::vector<CheckResult> results;
  results.push_back(check_prox_properties());
  results.push_back(check_pg_bound());
  results.push_back(check_rspg_expectation());
  results.push_back(check_smoothing_identities());
  results.push_back(check_zeroth_first_agreement());
  results.push_back(check_termination_law());
  results.push_back(check_parameter_formulas());
  results.push_back(check_trend_reproduction(threads));
  results.push_back(check_constraint_maintenance());
  results.push_back(check_reproducibility());
  return results;
}

}  // namespace rspg
