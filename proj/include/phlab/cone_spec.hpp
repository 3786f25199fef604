#pragma once

#include "phlab/rng.hpp"
#include "phlab/torus.hpp"

namespace phlab {

// Constant cone field C = { v = v_s + v_c : |v_s| <= a |v_c| } relative to the splitting
// E^s (+) F. The splitting need not be orthogonal; components are the oblique projections.
class ConeSpec {
 public:
  ConeSpec() = default;
  // `stable` is d* x (d*-d), `center` is d* x d, both with orthonormal columns.
  // width == 0 is accepted and means the degenerate cone C = F.
  ConeSpec(const Matrix& stable, const Matrix& center, double width);

  int ambient_dim() const noexcept { return center_.rows(); }
  int center_dim() const noexcept { return center_.cols(); }
  int stable_dim() const noexcept { return stable_.cols(); }
  const Matrix& stable() const noexcept { return stable_; }
  const Matrix& center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  ConeSpec with_width(double a) const { return ConeSpec(stable_, center_, a); }

  struct Components {
    Vector center;  // coordinates in the F basis
    Vector stable;  // coordinates in the E^s basis
  };
  Components split(const TangentVector& v) const;
  TangentVector center_part(const TangentVector& v) const;
  TangentVector stable_part(const TangentVector& v) const;

  bool contains(const TangentVector& v, double tol = 0.0) const;
  // max(|v_s|, |v_c|): the norm adapted to the splitting.
  double adapted_norm(const TangentVector& v) const;

  // v^T Q v = a^2 |v_c|^2 - |v_s|^2.
  const Matrix& quadratic_form() const noexcept { return q_; }
  // Operator norms of the oblique projections onto F and E^s.
  double center_projection_norm() const noexcept { return pc_norm_; }
  double stable_projection_norm() const noexcept { return ps_norm_; }
  // |det [F | E^s]|: volume distortion of the product chart.
  double chart_jacobian() const noexcept { return chart_jacobian_; }

 private:
  Matrix stable_;
  Matrix center_;
  double width_ = 0.0;
  Matrix coords_;  // inverse of [F | E^s]
  Matrix q_;
  double pc_norm_ = 1.0;
  double ps_norm_ = 1.0;
  double chart_jacobian_ = 1.0;
};

struct ConeExtremum {
  double value = 0.0;       // min over v in C of v^T G v / v^T v
  double multiplier = 0.0;  // optimal Lagrange multiplier (0: unconstrained minimum is in C)
  int evaluations = 0;
};

// min { v^T G v / |v|^2 : v in C }. By the S-lemma this equals
// max_{nu >= 0} lambda_min(G - nu Q); the concave dual is maximized by bracketing plus
// golden-section search. Throws numerical if no bracket is found.
ConeExtremum cone_min_rayleigh(const Matrix& g, const ConeSpec& cone);

// sup_{v in C} |v| / |M v| = ||(M|_C)^{-1}||.
double restricted_inverse_norm(const Matrix& m, const ConeSpec& cone);

// min over unit v in `from` of a^2 |(Mv)_c|^2 - |(Mv)_s|^2 measured in `to`.
// Non-negative iff M(from) is contained in `to`.
double cone_invariance_margin(const Matrix& m, const ConeSpec& from, const ConeSpec& to);
inline double cone_invariance_margin(const Matrix& m, const ConeSpec& cone) {
  return cone_invariance_margin(m, cone, cone);
}

// Whether every vector of the subspace lies in the cone (up to `tol` in the quadratic form).
bool subspace_in_cone(const Subspace& f, const ConeSpec& cone, double tol = 1e-12);

// Random d-dimensional subspace graph(L) over F with ||L|| uniform in [0, fraction * a].
Subspace random_cone_subspace(const ConeSpec& cone, RandomStream& rng, double fraction = 1.0);

}  // namespace phlab
