#pragma once

#include <limits>
#include <string>
#include <vector>

namespace rspg {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm1(const Vector& v);

enum class GeometryKind { kEuclidean, kEntropySimplex };

// Distance generating function with strong-convexity modulus alpha and its
// associated norm. Euclidean: omega(x) = |x|^2/2, alpha = 1, l2 norm.
// Entropy on the standard simplex: omega(x) = sum x_i ln x_i, alpha = 1
// under the l1 norm.
struct Geometry {
  GeometryKind kind = GeometryKind::kEuclidean;

  static Geometry euclidean() { return {GeometryKind::kEuclidean}; }
  static Geometry entropy_simplex() { return {GeometryKind::kEntropySimplex}; }

  double modulus_alpha() const { return 1.0; }
  double omega_value(const Vector& x) const;
  Vector omega_gradient(const Vector& x) const;
  double norm(const Vector& v) const;
};

enum class SetKind { kAllSpace, kBox, kSimplex };

struct FeasibleSet {
  SetKind kind = SetKind::kAllSpace;
  Vector lower;  // per-coordinate bounds, only for kBox
  Vector upper;

  static FeasibleSet all_space() { return {SetKind::kAllSpace, {}, {}}; }
  static FeasibleSet box(Vector lo, Vector hi) {
    return {SetKind::kBox, std::move(lo), std::move(hi)};
  }
  static FeasibleSet simplex() { return {SetKind::kSimplex, {}, {}}; }
  // Box on one coordinate, all other coordinates free.
  static FeasibleSet coordinate_box(std::size_t dim, std::size_t coord,
                                    double lo, double hi);

  bool contains(const Vector& x, double tol = 1e-12) const;
};

enum class SimpleTermKind { kZero, kL1 };

// The simple convex part h of the composite objective.
struct SimpleTerm {
  SimpleTermKind kind = SimpleTermKind::kZero;
  double weight = 0.0;

  static SimpleTerm zero() { return {SimpleTermKind::kZero, 0.0}; }
  static SimpleTerm l1(double w) { return {SimpleTermKind::kL1, w}; }

  double value(const Vector& x) const;
};

struct ProxResult {
  Vector x_plus;               // argmin_{u in X} <g,u> + V(u,x)/gamma + h(u)
  Vector mapping;              // (x - x_plus)/gamma
  double objective_residual;   // first-order optimality violation, diagnostic
};

// Bregman divergence V(x,z) = omega(x) - omega(z) - <grad omega(z), x-z>.
// For the entropy geometry z must have strictly positive coordinates.
double bregman_divergence(const Geometry& geometry, const Vector& x,
                          const Vector& z);

// Generalized projection step. Closed forms exist per (geometry, set, h)
// combination; any other combination throws std::invalid_argument.
ProxResult prox_step(const Geometry& geometry, const FeasibleSet& set,
                     const SimpleTerm& h, const Vector& x, const Vector& g,
                     double gamma);

// Projected gradient mapping P_X(x, g, gamma) = (x - x_plus)/gamma.
Vector gradient_mapping(const Geometry& geometry, const FeasibleSet& set,
                        const SimpleTerm& h, const Vector& x, const Vector& g,
                        double gamma);

}  // namespace rspg
