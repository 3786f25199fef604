#pragma once

#include <span>

#include "phlab/linalg.hpp"

namespace phlab {

// The torus is flat, so every tangent space is identified with R^d*.
using TangentVector = Vector;

// Reduce a real number into [0,1).
inline double reduce_unit(double x) noexcept {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.0.
  if (r >= 1.0) r = 0.0;
  return r;
}

// Reduce into [-1/2, 1/2).
inline double wrap_centered(double x) noexcept { return x - std::floor(x + 0.5); }

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(const Vector& coords);
  TorusPoint(std::initializer_list<double> coords) : TorusPoint(Vector(coords)) {}
  static TorusPoint origin(int dim) { return TorusPoint(Vector(dim)); }

  int dim() const noexcept { return c_.size(); }
  double operator[](int i) const noexcept { return c_[i]; }
  const Vector& coords() const noexcept { return c_; }

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) noexcept { return a.c_ == b.c_; }

 private:
  Vector c_;
};

// p + v, reduced.
TorusPoint translate(const TorusPoint& p, const TangentVector& v);

// The shortest lift of q - p (each component in [-1/2, 1/2)).
TangentVector lift_difference(const TorusPoint& p, const TorusPoint& q);

// Flat torus metric: minimum Euclidean distance over integer translates.
double torus_distance(const TorusPoint& p, const TorusPoint& q);

inline constexpr double kOrthonormalTolerance = 1e-10;

// A linear subspace of the tangent space, stored by an orthonormal basis (columns).
class Subspace {
 public:
  Subspace() = default;
  // Validates orthonormality to kOrthonormalTolerance; never repairs silently.
  explicit Subspace(const Matrix& orthonormal_basis);
  // Explicit Gram-Schmidt of an arbitrary spanning set.
  static Subspace orthonormalized(const Matrix& spanning);
  static Subspace coordinate(int ambient_dim, std::span<const int> axes);

  int dim() const noexcept { return b_.cols(); }
  int ambient_dim() const noexcept { return b_.rows(); }
  const Matrix& basis() const noexcept { return b_; }

 private:
  Matrix b_;
};

// |det(m restricted to span(basis))| = |m e_1 ^ ... ^ m e_d|. Computed from the R factor of
// a QR decomposition of m*basis.
double wedge_determinant(const Matrix& m, const Subspace& basis);
double wedge_determinant(const Matrix& m, const Matrix& orthonormal_basis);
double log_wedge_determinant(const Matrix& m, const Subspace& basis);

}  // namespace phlab
