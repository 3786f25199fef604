#include "phlab/torus.hpp"

namespace phlab {

TorusPoint::TorusPoint(const Vector& coords) : c_(coords) {
  for (int i = 0; i < c_.size(); ++i) {
    require(std::isfinite(c_[i]), ErrorCode::input, "non-finite torus coordinate");
    c_[i] = reduce_unit(c_[i]);
  }
}

TorusPoint translate(const TorusPoint& p, const TangentVector& v) {
  require(p.dim() == v.size(), ErrorCode::input, "dimension mismatch in translate");
  return TorusPoint(p.coords() + v);
}

TangentVector lift_difference(const TorusPoint& p, const TorusPoint& q) {
  require(p.dim() == q.dim(), ErrorCode::input, "dimension mismatch between torus points");
  TangentVector d(p.dim());
  for (int i = 0; i < p.dim(); ++i) d[i] = wrap_centered(q[i] - p[i]);
  return d;
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  // For the flat metric the minimizing translate acts coordinate-wise.
  return lift_difference(p, q).norm();
}

Subspace::Subspace(const Matrix& orthonormal_basis) : b_(orthonormal_basis) {
  require(b_.cols() >= 1 && b_.cols() <= b_.rows(), ErrorCode::input, "subspace dimension out of range");
  require(orthonormality_defect(b_) <= kOrthonormalTolerance, ErrorCode::input,
          "subspace basis is not orthonormal");
}

Subspace Subspace::orthonormalized(const Matrix& spanning) { return Subspace(thin_qr(spanning).q); }

Subspace Subspace::coordinate(int ambient_dim, std::span<const int> axes) {
  Matrix b(ambient_dim, static_cast<int>(axes.size()));
  for (size_t j = 0; j < axes.size(); ++j) b(axes[j], static_cast<int>(j)) = 1.0;
  return Subspace(b);
}

double log_wedge_determinant(const Matrix& m, const Subspace& basis) {
  require(m.cols() == basis.ambient_dim() && m.rows() == m.cols(), ErrorCode::input,
          "wedge determinant shape mismatch");
  const QrResult qr = thin_qr(m * basis.basis());
  double s = 0.0;
  for (int i = 0; i < basis.dim(); ++i) s += std::log(qr.r_diag[i]);
  return s;
}

double wedge_determinant(const Matrix& m, const Subspace& basis) {
  require(m.cols() == basis.ambient_dim() && m.rows() == m.cols(), ErrorCode::input,
          "wedge determinant shape mismatch");
  QrResult qr;
  try {
    qr = thin_qr(m * basis.basis());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::singularity) return 0.0;
    throw;
  }
  double p = 1.0;
  for (int i = 0; i < basis.dim(); ++i) p *= qr.r_diag[i];
  return p;
}

double wedge_determinant(const Matrix& m, const Matrix& orthonormal_basis) {
  return wedge_determinant(m, Subspace(orthonormal_basis));
}

}  // namespace phlab
