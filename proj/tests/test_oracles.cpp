#include <cmath>

#include <stdexcept>

#include <doctest.h>

#include "rspg/oracles.hpp"

using namespace rspg;

namespace {

FirstOrderOracle linear_noisy_oracle(Vector c, double noise_std) {
  FirstOrderOracle oracle;
  oracle.true_gradient = [c](const Vector&) { return c; };
  oracle.query = [c, noise_std](const Vector&, RngStream& rng) {
    Vector g = c;
    for (auto& gj : g) gj += noise_std * rng.next_normal();
    return g;
  };
  return oracle;
}

}  // namespace

TEST_CASE("minibatch mean of a deterministic oracle is exact for any m") {
  const auto oracle = linear_noisy_oracle({1.0, -2.0, 0.5}, 0.0);
  RngStream rng = RngStream::from_seed(1);
  OracleCounter counter;
  const auto r = minibatch_mean(oracle, {0.0, 0.0, 0.0}, 7, rng, &counter);
  CHECK(r.batch_size == 7);
  CHECK(counter.sfo_calls == 7);
  CHECK(r.mean_gradient[0] == doctest::Approx(1.0));
  CHECK(r.mean_gradient[1] == doctest::Approx(-2.0));
  CHECK(r.mean_gradient[2] == doctest::Approx(0.5));
  CHECK(r.sample_second_moment == doctest::Approx(0.0));
}

TEST_CASE("minibatch mean with m = 1 returns the raw sample") {
  const auto oracle = linear_noisy_oracle({0.0, 0.0}, 1.0);
  RngStream a = RngStream::from_seed(5);
  const auto r = minibatch_mean(oracle, {0.0, 0.0}, 1, a);
  // Samples are drawn from per-index child streams.
  RngStream b = RngStream::from_seed(5).child(0);
  const auto raw = oracle.query({0.0, 0.0}, b);
  CHECK(r.mean_gradient[0] == raw[0]);
  CHECK(r.mean_gradient[1] == raw[1]);
}

TEST_CASE("minibatch mean rejects m = 0") {
  const auto oracle = linear_noisy_oracle({0.0}, 0.0);
  RngStream rng = RngStream::from_seed(2);
  CHECK_THROWS_AS(minibatch_mean(oracle, {0.0}, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("variance of the minibatch mean scales as 1/m") {
  const std::size_t dim = 3;
  const double s = 0.7;
  const auto oracle = linear_noisy_oracle(Vector(dim, 0.0), s);
  RngStream rng = RngStream::from_seed(7);
  double prev = 0.0;
  for (std::uint64_t m : {1, 4, 16, 64}) {
    double second_moment = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      RngStream sub = rng.child(m * 100003 + t);
      const auto r = minibatch_mean(oracle, Vector(dim, 0.0), m, sub);
      second_moment += norm2(r.mean_gradient) * norm2(r.mean_gradient);
    }
    second_moment /= trials;
    const double expected = s * s * dim / static_cast<double>(m);
    CHECK(second_moment == doctest::Approx(expected).epsilon(0.15));
    if (m > 1) CHECK(second_moment < prev);
    prev = second_moment;
  }
}

TEST_CASE("difference-quotient estimator is unbiased on a linear function") {
  const Vector c = {1.0, -0.5, 2.0};
  ZerothOrderOracle szo;
  szo.query = [c](const Vector& x, RngStream&) { return dot(c, x); };
  szo.shared_query = [c](const Vector& a, const Vector& b, RngStream&) {
    return std::make_pair(dot(c, a), dot(c, b));
  };
  RngStream rng = RngStream::from_seed(11);
  Vector mean(3, 0.0);
  const int draws = 50000;
  for (int t = 0; t < draws; ++t) {
    RngStream sub = rng.child(t);
    const auto g = gaussian_difference_gradient(szo, {0.3, 0.1, -1.0}, 0.5,
                                                sub);
    for (int j = 0; j < 3; ++j) mean[j] += g[j];
  }
  // Per-coordinate variance of <c,v> v_j is about |c|^2 + 2 c_j^2.
  for (int j = 0; j < 3; ++j) {
    mean[j] /= draws;
    const double var = dot(c, c) + 2.0 * c[j] * c[j];
    CHECK(std::fabs(mean[j] - c[j]) < 4.0 * std::sqrt(var / draws));
  }
}

TEST_CASE("difference quotient is mu-independent on linear functions") {
  const Vector c = {2.0, 1.0};
  ZerothOrderOracle szo;
  szo.query = [c](const Vector& x, RngStream&) { return dot(c, x); };
  szo.shared_query = [c](const Vector& a, const Vector& b, RngStream&) {
    return std::make_pair(dot(c, a), dot(c, b));
  };
  RngStream a = RngStream::from_seed(3), b = RngStream::from_seed(3);
  const auto g1 = gaussian_difference_gradient(szo, {0.0, 0.0}, 1e-4, a);
  const auto g2 = gaussian_difference_gradient(szo, {0.0, 0.0}, 10.0, b);
  CHECK(g1[0] == doctest::Approx(g2[0]).epsilon(1e-9));
  CHECK(g1[1] == doctest::Approx(g2[1]).epsilon(1e-9));
}

TEST_CASE("szo counter records call pairs") {
  ZerothOrderOracle szo;
  szo.query = [](const Vector&, RngStream&) { return 0.0; };
  szo.shared_query = [](const Vector&, const Vector&, RngStream&) {
    return std::make_pair(0.0, 0.0);
  };
  RngStream rng = RngStream::from_seed(4);
  OracleCounter counter;
  minibatch_smoothed_mean(szo, {0.0, 0.0}, 0.1, 13, rng, &counter);
  CHECK(counter.szo_calls == 13);
  CHECK(counter.sfo_calls == 0);
}

TEST_CASE("smoothed value of a quadratic shifts by half mu^2 trace") {
  const Vector diag = {1.0, 3.0, 0.5};
  auto f = [diag](const Vector& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) v += 0.5 * diag[j] * x[j] * x[j];
    return v;
  };
  const Vector x = {0.4, -0.2, 1.0};
  const double mu = 0.3;
  RngStream rng = RngStream::from_seed(21);
  const double estimate = smoothed_value_mc(f, x, mu, 400000, rng);
  const double trace = diag[0] + diag[1] + diag[2];
  const double exact = f(x) + 0.5 * mu * mu * trace;
  CHECK(estimate == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("variance estimate recovers additive noise and rejects tiny samples") {
  const std::size_t dim = 5;
  const double s = 0.9;
  const auto oracle = linear_noisy_oracle(Vector(dim, 1.0), s);
  RngStream rng = RngStream::from_seed(31);
  const double estimate =
      variance_estimate(oracle, Vector(dim, 0.0), 20000, rng);
  CHECK(estimate == doctest::Approx(s * s * dim).epsilon(0.1));

  const auto deterministic = linear_noisy_oracle(Vector(dim, 1.0), 0.0);
  RngStream rng2 = RngStream::from_seed(32);
  CHECK(variance_estimate(deterministic, Vector(dim, 0.0), 10, rng2) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(variance_estimate(oracle, Vector(dim, 0.0), 1, rng2),
                  std::invalid_argument);
}

TEST_CASE("streams are reproducible and children independent of draw order") {
  RngStream root = RngStream::from_seed(123);
  RngStream a = root.child(5), b = root.child(5);
  CHECK(a.next_u64() == b.next_u64());
  // Drawing from one child does not disturb a sibling.
  RngStream c = root.child(6);
  RngStream root2 = RngStream::from_seed(123);
  (void)c.next_u64();
  CHECK(root.child(7).next_u64() == root2.child(7).next_u64());
}
