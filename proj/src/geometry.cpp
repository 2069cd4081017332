#include "rspg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rspg {

namespace {

constexpr double kSimplexFloor = 1e-300;

void check_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

// Maps y to 0 when |y| <= threshold (the minimizer's limit at the kink).
double soft_threshold(double y, double threshold) {
  if (y > threshold) return y - threshold;
  if (y < -threshold) return y + threshold;
  return 0.0;
}

}  // namespace

double dot(const Vector& a, const Vector& b) {
  check_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm1(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double Geometry::omega_value(const Vector& x) const {
  switch (kind) {
    case GeometryKind::kEuclidean:
      return 0.5 * dot(x, x);
    case GeometryKind::kEntropySimplex: {
      double s = 0.0;
      for (double xi : x) {
        if (xi < 0.0) throw std::domain_error("entropy omega: negative coordinate");
        if (xi > 0.0) s += xi * std::log(xi);
      }
      return s;
    }
  }
  throw std::logic_error("unknown geometry kind");
}

Vector Geometry::omega_gradient(const Vector& x) const {
  Vector g(x.size());
  switch (kind) {
    case GeometryKind::kEuclidean:
      return x;
    case GeometryKind::kEntropySimplex:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) {
          throw std::domain_error("entropy gradient undefined on the boundary");
        }
        g[i] = 1.0 + std::log(x[i]);
      }
      return g;
  }
  throw std::logic_error("unknown geometry kind");
}

double Geometry::norm(const Vector& v) const {
  return kind == GeometryKind::kEntropySimplex ? norm1(v) : norm2(v);
}

FeasibleSet FeasibleSet::coordinate_box(std::size_t dim, std::size_t coord,
                                        double lo, double hi) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vector lower(dim, -inf), upper(dim, inf);
  lower.at(coord) = lo;
  upper.at(coord) = hi;
  return box(std::move(lower), std::move(upper));
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  switch (kind) {
    case SetKind::kAllSpace:
      return true;
    case SetKind::kBox:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
      }
      return true;
    case SetKind::kSimplex: {
      double s = 0.0;
      for (double xi : x) {
        if (xi < -tol) return false;
        s += xi;
      }
      return std::fabs(s - 1.0) <= tol * static_cast<double>(x.size() + 1);
    }
  }
  return false;
}

double SimpleTerm::value(const Vector& x) const {
  switch (kind) {
    case SimpleTermKind::kZero:
      return 0.0;
    case SimpleTermKind::kL1:
      return weight * norm1(x);
  }
  throw std::logic_error("unknown simple term kind");
}

double bregman_divergence(const Geometry& geometry, const Vector& x,
                          const Vector& z) {
  check_same_size(x, z, "bregman_divergence");
  switch (geometry.kind) {
    case GeometryKind::kEuclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        s += d * d;
      }
      return 0.5 * s;
    }
    case GeometryKind::kEntropySimplex: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (z[i] <= 0.0) {
          throw std::domain_error(
              "bregman_divergence: entropy reference point on simplex boundary");
        }
        if (x[i] < 0.0) throw std::domain_error("bregman_divergence: x < 0");
        if (x[i] > 0.0) s += x[i] * std::log(x[i] / z[i]);
        s += z[i] - x[i];  // exact identity on the simplex, sums to 0
      }
      return s;
    }
  }
  throw std::logic_error("unknown geometry kind");
}

namespace {

// KKT residual of the prox subproblem, used as a cheap certificate.
double prox_residual(const Geometry& geometry, const FeasibleSet& set,
                     const SimpleTerm& h, const Vector& x, const Vector& g,
                     double gamma, const Vector& x_plus) {
  Vector s(x.size());
  const Vector go_plus = geometry.omega_gradient(x_plus);
  const Vector go = geometry.omega_gradient(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = g[i] + (go_plus[i] - go[i]) / gamma;
  }
  if (h.kind == SimpleTermKind::kL1) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (x_plus[i] > 0.0) {
        s[i] += h.weight;
      } else if (x_plus[i] < 0.0) {
        s[i] -= h.weight;
      } else {
        s[i] = std::max(0.0, std::fabs(s[i]) - h.weight);
      }
    }
  }
  if (set.kind == SetKind::kBox) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (x_plus[i] <= set.lower[i] && s[i] > 0.0) s[i] = 0.0;
      if (x_plus[i] >= set.upper[i] && s[i] < 0.0) s[i] = 0.0;
    }
  } else if (set.kind == SetKind::kSimplex) {
    // Multiples of the all-ones vector lie in the constraint normal space.
    double mean = 0.0;
    for (double si : s) mean += si;
    mean /= static_cast<double>(s.size());
    for (double& si : s) si -= mean;
  }
  return norm2(s);
}

}  // namespace

ProxResult prox_step(const Geometry& geometry, const FeasibleSet& set,
                     const SimpleTerm& h, const Vector& x, const Vector& g,
                     double gamma) {
  check_same_size(x, g, "prox_step");
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_step: gamma must be > 0");

  const std::size_t n = x.size();
  Vector x_plus(n);

  if (geometry.kind == GeometryKind::kEuclidean &&
      set.kind == SetKind::kAllSpace) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = x[i] - gamma * g[i];
      x_plus[i] = h.kind == SimpleTermKind::kL1
                      ? soft_threshold(y, gamma * h.weight)
                      : y;
    }
  } else if (geometry.kind == GeometryKind::kEuclidean &&
             set.kind == SetKind::kBox) {
    if (set.lower.size() != n || set.upper.size() != n) {
      throw std::invalid_argument("prox_step: box bounds dimension mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
      double y = x[i] - gamma * g[i];
      if (h.kind == SimpleTermKind::kL1) y = soft_threshold(y, gamma * h.weight);
      x_plus[i] = std::clamp(y, set.lower[i], set.upper[i]);
    }
  } else if (geometry.kind == GeometryKind::kEntropySimplex &&
             set.kind == SetKind::kSimplex &&
             h.kind == SimpleTermKind::kZero) {
    // Multiplicative update in log space, shifted for overflow safety.
    Vector logit(n);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] <= 0.0) {
        throw std::domain_error("prox_step: entropy iterate on simplex boundary");
      }
      logit[i] = std::log(x[i]) - gamma * g[i];
      max_logit = std::max(max_logit, logit[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x_plus[i] = std::exp(logit[i] - max_logit);
      total += x_plus[i];
    }
    double floored_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x_plus[i] = std::max(x_plus[i] / total, kSimplexFloor);
      floored_total += x_plus[i];
    }
    for (std::size_t i = 0; i < n; ++i) x_plus[i] /= floored_total;
  } else {
    throw std::invalid_argument(
        "prox_step: unsupported (geometry, set, h) combination");
  }

  ProxResult result;
  result.mapping.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.mapping[i] = (x[i] - x_plus[i]) / gamma;
  }
  result.objective_residual =
      prox_residual(geometry, set, h, x, g, gamma, x_plus);
  result.x_plus = std::move(x_plus);
  return result;
}

Vector gradient_mapping(const Geometry& geometry, const FeasibleSet& set,
                        const SimpleTerm& h, const Vector& x, const Vector& g,
                        double gamma) {
  return prox_step(geometry, set, h, x, g, gamma).mapping;
}

}  // namespace rspg
