#include "phlab/cone_spec.hpp"

#include <algorithm>
#include <limits>

namespace phlab {

ConeSpec::ConeSpec(const Matrix& stable, const Matrix& center, double width)
    : stable_(stable), center_(center), width_(width) {
  require(center_.cols() >= 1, ErrorCode::input, "cone center must be at least one-dimensional");
  require(stable_.rows() == center_.rows() && stable_.cols() + center_.cols() == center_.rows(),
          ErrorCode::input, "stable and center bases must split the tangent space");
  require(std::isfinite(width) && width >= 0.0, ErrorCode::input, "cone width must be non-negative");
  require(orthonormality_defect(stable_) <= kOrthonormalTolerance, ErrorCode::input,
          "stable basis is not orthonormal");
  require(orthonormality_defect(center_) <= kOrthonormalTolerance, ErrorCode::input,
          "center basis is not orthonormal");

  const Matrix chart = hstack(center_, stable_);
  chart_jacobian_ = std::abs(determinant(chart));
  require(chart_jacobian_ > 1e-9, ErrorCode::input, "stable and center bases are not transverse");
  coords_ = inverse(chart);

  const int n = ambient_dim(), d = center_dim();
  Matrix w(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = i < d ? width_ * width_ : -1.0;
  q_ = coords_.transpose() * w * coords_;

  pc_norm_ = spectral_norm(center_ * coords_.block(0, 0, d, n));
  ps_norm_ = stable_dim() ? spectral_norm(stable_ * coords_.block(d, 0, stable_dim(), n)) : 0.0;
}

ConeSpec::Components ConeSpec::split(const TangentVector& v) const {
  require(v.size() == ambient_dim(), ErrorCode::input, "tangent vector dimension mismatch");
  const Vector all = coords_ * v;
  Components c{Vector(center_dim()), Vector(stable_dim())};
  for (int i = 0; i < center_dim(); ++i) c.center[i] = all[i];
  for (int i = 0; i < stable_dim(); ++i) c.stable[i] = all[center_dim() + i];
  return c;
}

TangentVector ConeSpec::center_part(const TangentVector& v) const { return center_ * split(v).center; }

TangentVector ConeSpec::stable_part(const TangentVector& v) const {
  if (stable_dim() == 0) return Vector(ambient_dim());
  return stable_ * split(v).stable;
}

bool ConeSpec::contains(const TangentVector& v, double tol) const {
  const Components c = split(v);
  return c.stable.norm() <= width_ * c.center.norm() + tol * v.norm();
}

double ConeSpec::adapted_norm(const TangentVector& v) const {
  const Components c = split(v);
  return std::max(c.stable.norm(), c.center.norm());
}

ConeExtremum cone_min_rayleigh(const Matrix& g, const ConeSpec& cone) {
  require(g.rows() == cone.ambient_dim() && g.cols() == cone.ambient_dim(), ErrorCode::input,
          "quadratic form dimension mismatch");
  ConeExtremum out;
  if (cone.stable_dim() == 0) {
    out.value = symmetric_min_eigenvalue(g);
    out.evaluations = 1;
    return out;
  }
  if (cone.width() == 0.0) {
    const Matrix& f = cone.center();
    out.value = symmetric_min_eigenvalue(f.transpose() * g * f);
    out.evaluations = 1;
    return out;
  }

  const Matrix& q = cone.quadratic_form();
  const auto dual = [&](double nu) {
    ++out.evaluations;
    return symmetric_min_eigenvalue(g - nu * q);
  };

  // Unconstrained minimizer already inside the cone.
  const SymmetricEigen e0 = symmetric_eigen(g);
  ++out.evaluations;
  const Vector v0 = e0.vectors.column(0);
  if (v0.dot(q * v0) >= 0.0) {
    out.value = e0.values[0];
    return out;
  }

  const double scale = std::max(g.frobenius_norm(), std::numeric_limits<double>::min()) /
                       std::max(q.frobenius_norm(), std::numeric_limits<double>::min());
  double lo = 0.0, mid = 0.0, f_mid = e0.values[0];
  double hi = scale;
  double f_hi = dual(hi);
  int doublings = 0;
  while (f_hi >= f_mid) {
    if (++doublings > 200 || !std::isfinite(f_hi))
      fail(ErrorCode::numerical, "cone extremum: dual objective not bracketed (scale " +
                                     std::to_string(scale) + ", last nu " + std::to_string(hi) + ")");
    lo = mid;
    mid = hi;
    f_mid = f_hi;
    hi *= 2.0;
    f_hi = dual(hi);
  }

  // Golden-section maximization of the concave dual on [lo, hi].
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = dual(x1), f2 = dual(x2);
  double best = std::max({f_mid, f1, f2});
  double best_nu = f1 >= f2 ? x1 : x2;
  for (int it = 0; it < 200 && (b - a) > 4e-16 * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = dual(x2);
      if (f2 > best) best = f2, best_nu = x2;
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = dual(x1);
      if (f1 > best) best = f1, best_nu = x1;
    }
  }
  out.value = best;
  out.multiplier = best_nu;
  return out;
}

double restricted_inverse_norm(const Matrix& m, const ConeSpec& cone) {
  const ConeExtremum e = cone_min_rayleigh(m.transpose() * m, cone);
  if (!(e.value > 0.0)) fail(ErrorCode::singularity, "derivative annihilates a cone vector");
  return 1.0 / std::sqrt(e.value);
}

double cone_invariance_margin(const Matrix& m, const ConeSpec& from, const ConeSpec& to) {
  return cone_min_rayleigh(m.transpose() * to.quadratic_form() * m, from).value;
}

bool subspace_in_cone(const Subspace& f, const ConeSpec& cone, double tol) {
  require(f.ambient_dim() == cone.ambient_dim() && f.dim() == cone.center_dim(), ErrorCode::input,
          "subspace and cone dimensions differ");
  const Matrix& b = f.basis();
  return symmetric_min_eigenvalue(b.transpose() * cone.quadratic_form() * b) >= -tol;
}

Subspace random_cone_subspace(const ConeSpec& cone, RandomStream& rng, double fraction) {
  const int d = cone.center_dim(), k = cone.stable_dim();
  if (k == 0 || cone.width() == 0.0) return Subspace(cone.center());
  Matrix l(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) l(i, j) = rng.normal();
  const double target = cone.width() * fraction * rng.uniform();
  const double nrm = spectral_norm(l);
  if (nrm > 0.0) l = (target / nrm) * l;
  return Subspace::orthonormalized(cone.center() + cone.stable() * l);
}

}  // namespace phlab
