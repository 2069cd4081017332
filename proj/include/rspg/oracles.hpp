#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "rspg/geometry.hpp"
#include "rspg/rng.hpp"

namespace rspg {

// Exact accounting of raw oracle queries. One zeroth-order call is a pair of
// function evaluations sharing the same noise realization.
struct OracleCounter {
  std::uint64_t sfo_calls = 0;
  std::uint64_t szo_calls = 0;
};

// Stochastic first-order oracle: query returns an unbiased gradient sample
// G(x, xi). true_gradient, when present, is the exact grad f used by tests
// and by the deterministic PG solver.
struct FirstOrderOracle {
  std::function<Vector(const Vector& x, RngStream& rng)> query;
  std::function<Vector(const Vector& x)> true_gradient;
  std::optional<double> sigma_bound;
};

// Stochastic zeroth-order oracle. shared_query evaluates two points under
// the SAME noise realization, as the difference estimator requires.
struct ZerothOrderOracle {
  std::function<double(const Vector& x, RngStream& rng)> query;
  std::function<std::pair<double, double>(const Vector& x1, const Vector& x2,
                                          RngStream& rng)>
      shared_query;
};

struct MiniBatchResult {
  Vector mean_gradient;
  std::uint64_t batch_size = 0;
  double sample_second_moment = 0.0;  // mean of |G_i - mean|^2
};

// Mean of m oracle samples at x; consumes exactly m SFO calls.
MiniBatchResult minibatch_mean(const FirstOrderOracle& oracle, const Vector& x,
                               std::uint64_t m, RngStream& rng,
                               OracleCounter* counter = nullptr);

// Gaussian difference-quotient gradient estimator
// [(F(x + mu v, xi) - F(x, xi)) / mu] v with v standard normal and one
// shared xi. Counts as one SZO call.
Vector gaussian_difference_gradient(const ZerothOrderOracle& oracle,
                                    const Vector& x, double mu, RngStream& rng,
                                    OracleCounter* counter = nullptr);

// Mean of m independent difference-quotient samples.
MiniBatchResult minibatch_smoothed_mean(const ZerothOrderOracle& oracle,
                                        const Vector& x, double mu,
                                        std::uint64_t m, RngStream& rng,
                                        OracleCounter* counter = nullptr);

// Monte Carlo estimate of the Gaussian-smoothed value E_v[f(x + mu v)].
double smoothed_value_mc(const std::function<double(const Vector&)>& f_eval,
                         const Vector& x, double mu, std::uint64_t samples,
                         RngStream& rng);

// Sample variance of G(x, xi) around its mean, i.e. an estimate of
// E|G - grad f|^2, from n_samples >= 2 draws.
double variance_estimate(const FirstOrderOracle& oracle, const Vector& x,
                         std::uint64_t n_samples, RngStream& rng,
                         OracleCounter* counter = nullptr);

}  // namespace rspg
