#include "rspg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rspg {

namespace {

// Fixed-order accumulation over samples drawn from child streams, so the
// result does not depend on evaluation order.
template <typename SampleFn>
MiniBatchResult batch_mean(std::size_t dim, std::uint64_t m, RngStream& rng,
                           SampleFn sample) {
  if (m == 0) throw std::invalid_argument("minibatch: batch size must be >= 1");
  MiniBatchResult result;
  result.batch_size = m;
  result.mean_gradient.assign(dim, 0.0);
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < m; ++i) {
    RngStream sub = rng.child(i);
    const Vector s = sample(sub);
    for (std::size_t j = 0; j < dim; ++j) result.mean_gradient[j] += s[j];
    sum_sq += dot(s, s);
  }
  for (std::size_t j = 0; j < dim; ++j) {
    result.mean_gradient[j] /= static_cast<double>(m);
  }
  // mean|G_i - mean|^2 = mean|G_i|^2 - |mean|^2
  const double mean_sq = dot(result.mean_gradient, result.mean_gradient);
  result.sample_second_moment =
      std::max(0.0, sum_sq / static_cast<double>(m) - mean_sq);
  return result;
}

}  // namespace

MiniBatchResult minibatch_mean(const FirstOrderOracle& oracle, const Vector& x,
                               std::uint64_t m, RngStream& rng,
                               OracleCounter* counter) {
  MiniBatchResult result = batch_mean(
      x.size(), m, rng, [&](RngStream& sub) { return oracle.query(x, sub); });
  if (counter) counter->sfo_calls += m;
  return result;
}

Vector gaussian_difference_gradient(const ZerothOrderOracle& oracle,
                                    const Vector& x, double mu, RngStream& rng,
                                    OracleCounter* counter) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("gaussian_difference_gradient: mu must be > 0");
  }
  const std::size_t n = x.size();
  Vector v(n), shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = rng.next_normal();
    shifted[i] = x[i] + mu * v[i];
  }
  const auto [f_shifted, f_base] = oracle.shared_query(shifted, x, rng);
  const double quotient = (f_shifted - f_base) / mu;
  for (std::size_t i = 0; i < n; ++i) v[i] *= quotient;
  if (counter) counter->szo_calls += 1;
  return v;
}

MiniBatchResult minibatch_smoothed_mean(const ZerothOrderOracle& oracle,
                                        const Vector& x, double mu,
                                        std::uint64_t m, RngStream& rng,
                                        OracleCounter* counter) {
  MiniBatchResult result =
      batch_mean(x.size(), m, rng, [&](RngStream& sub) {
        return gaussian_difference_gradient(oracle, x, mu, sub, nullptr);
      });
  if (counter) counter->szo_calls += m;
  return result;
}

double smoothed_value_mc(const std::function<double(const Vector&)>& f_eval,
                         const Vector& x, double mu, std::uint64_t samples,
                         RngStream& rng) {
  if (samples == 0) {
    throw std::invalid_argument("smoothed_value_mc: samples must be >= 1");
  }
  const std::size_t n = x.size();
  double total = 0.0;
  Vector y(n);
  for (std::uint64_t s = 0; s < samples; ++s) {
    RngStream sub = rng.child(s);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + mu * sub.next_normal();
    total += f_eval(y);
  }
  return total / static_cast<double>(samples);
}

double variance_estimate(const FirstOrderOracle& oracle, const Vector& x,
                         std::uint64_t n_samples, RngStream& rng,
                         OracleCounter* counter) {
  if (n_samples < 2) {
    throw std::invalid_argument("variance_estimate: need at least 2 samples");
  }
  const MiniBatchResult batch = minibatch_mean(oracle, x, n_samples, rng, counter);
  // Unbiased: sum |G_i - mean|^2 / (n - 1).
  return batch.sample_second_moment * static_cast<double>(n_samples) /
         static_cast<double>(n_samples - 1);
}

}  // namespace rspg
