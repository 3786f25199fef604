#include "phlab/cone.hpp"

#include <algorithm>
#include <limits>

namespace phlab {

ConeSpec default_cone(const Endomorphism& model, double width) {
  return ConeSpec(model.stable_basis(), model.center_basis(), width);
}

namespace {

struct SplitBasis {
  Matrix c;  // F coordinates, d x d
  Matrix m;  // E^s coordinates, k x d
};

SplitBasis split_basis(const Subspace& f, const ConeSpec& s) {
  require(f.ambient_dim() == s.ambient_dim() && f.dim() == s.center_dim(), ErrorCode::input,
          "subspace and splitting dimensions differ");
  SplitBasis out{Matrix(s.center_dim(), f.dim()), Matrix(s.stable_dim(), f.dim())};
  for (int j = 0; j < f.dim(); ++j) {
    const auto parts = s.split(f.basis().column(j));
    for (int i = 0; i < s.center_dim(); ++i) out.c(i, j) = parts.center[i];
    for (int i = 0; i < s.stable_dim(); ++i) out.m(i, j) = parts.stable[i];
  }
  return out;
}

// Graph of f over F along E^s, in splitting coordinates.
Matrix graph_over_center(const SplitBasis& b) {
  if (!(std::abs(determinant(b.c)) > 1e-12))
    fail(ErrorCode::degeneracy, "subspace contains a stable direction; graph is undefined");
  if (b.m.rows() == 0) return Matrix(0, b.c.cols());
  return b.m * inverse(b.c);
}

}  // namespace

GraphRepresentation graph_representation(const Subspace& f2, const Subspace& f1, const ConeSpec& splitting) {
  const SplitBasis b1 = split_basis(f1, splitting), b2 = split_basis(f2, splitting);
  const Matrix g1 = graph_over_center(b1), g2 = graph_over_center(b2);
  if (splitting.stable_dim() == 0) return {f1, Matrix(0, f1.dim())};
  return {f1, (g2 - g1) * b1.c};
}

Subspace subspace_from_graph(const GraphRepresentation& g, const ConeSpec& splitting) {
  const Matrix& b = g.reference.basis();
  if (splitting.stable_dim() == 0) return g.reference;
  return Subspace::orthonormalized(b + splitting.stable() * g.l);
}

double theta_distance(const Subspace& f1, const Subspace& f2, const ConeSpec& splitting, ThetaMetric metric) {
  const SplitBasis b1 = split_basis(f1, splitting), b2 = split_basis(f2, splitting);
  const Matrix g1 = graph_over_center(b1), g2 = graph_over_center(b2);
  if (splitting.stable_dim() == 0) return 0.0;
  const Matrix diff = g2 - g1;
  if (metric == ThetaMetric::adapted) return spectral_norm(diff);
  return std::max(spectral_norm(diff * b1.c), spectral_norm(diff * b2.c));
}

double restricted_inverse_norm(const Endomorphism& model, const TorusPoint& x, const ConeSpec& cone) {
  return restricted_inverse_norm(model.derivative(x), cone);
}

TorusPoint sample_point(const Endomorphism& model, RandomStream& rng, bool in_region) {
  const int d = model.dim();
  const auto region = model.perturbation_region();
  if (in_region && region) {
    Vector dir(d);
    double r2 = 0.0;
    do {
      for (int i = 0; i < d; ++i) dir[i] = rng.uniform(-1.0, 1.0);
      r2 = dir.squared_norm();
    } while (r2 > 1.0);
    return translate(region->center, dir * region->radius);
  }
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.uniform();
  return TorusPoint(v);
}

InvarianceReport cone_invariance_check(const Endomorphism& model, const ConeSpec& cone, int samples,
                                       uint64_t seed) {
  require(samples >= 1, ErrorCode::input, "need at least one sample");
  InvarianceReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  RandomStream rng(seed, 0);
  for (int i = 0; i < samples; ++i) {
    const TorusPoint x = sample_point(model, rng, i % 2 == 1);
    const double m = cone_invariance_margin(model.derivative(x), cone);
    if (m < rep.min_margin) {
      rep.min_margin = m;
      rep.worst_point = x;
    }
  }
  rep.samples = samples;
  rep.pass = rep.min_margin > 0.0;
  return rep;
}

namespace {

// One cocycle step: returns log|det Df|_F| and replaces `basis` by an orthonormal basis of Df F.
double push_subspace(const Matrix& df, Matrix& basis) {
  const QrResult qr = thin_qr(df * basis);
  double s = 0.0;
  for (int k = 0; k < qr.r_diag.size(); ++k) s += std::log(qr.r_diag[k]);
  basis = qr.q;
  return s;
}

}  // namespace

SubspaceTransport transport_subspace(const Endomorphism& model, const TorusPoint& x, const Subspace& f, int n) {
  require(n >= 0, ErrorCode::input, "n must be non-negative");
  require(f.ambient_dim() == model.dim(), ErrorCode::input, "subspace dimension mismatch");
  Matrix b = f.basis();
  TorusPoint y = x;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    s += push_subspace(model.derivative(y), b);
    y = advance(model, y);
  }
  return {s, Subspace(b), y};
}

double det_distortion_ratio(const Endomorphism& model, const TorusPoint& x, const Subspace& f1,
                            const Subspace& f2, int n) {
  require(n >= 1, ErrorCode::input, "n must be at least 1");
  require(f1.dim() == f2.dim(), ErrorCode::input, "subspaces of different dimension");
  Matrix b1 = f1.basis(), b2 = f2.basis();
  TorusPoint y = x;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const Matrix df = model.derivative(y);
    s += push_subspace(df, b2) - push_subspace(df, b1);
    y = advance(model, y);
  }
  return std::exp(s);
}

std::vector<double> theta_contraction_factor(const Endomorphism& model, const TorusPoint& x, const Subspace& f1,
                                             const Subspace& f2, int n, const ConeSpec& splitting,
                                             ThetaMetric metric) {
  require(n >= 0, ErrorCode::input, "n must be non-negative");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n) + 1);
  Matrix b1 = f1.basis(), b2 = f2.basis();
  out.push_back(theta_distance(f1, f2, splitting, metric));
  TorusPoint y = x;
  for (int i = 1; i <= n; ++i) {
    const Matrix df = model.derivative(y);
    push_subspace(df, b1);
    push_subspace(df, b2);
    y = advance(model, y);
    out.push_back(theta_distance(Subspace(b1), Subspace(b2), splitting, metric));
  }
  return out;
}

DominationEstimate domination_constant(const Endomorphism& model, const ConeSpec& cone, int samples,
                                       uint64_t seed) {
  require(samples >= 1, ErrorCode::input, "need at least one sample");
  DominationEstimate est;
  RandomStream rng(seed, 1);
  for (int i = 0; i < samples; ++i) {
    const TorusPoint x = sample_point(model, rng, i % 2 == 1);
    const Matrix df = model.derivative(x);
    const double s = cone.stable_dim() ? spectral_norm(df * cone.stable()) : 0.0;
    const double v = s * restricted_inverse_norm(df, cone);
    if (v > est.lambda || i == 0) {
      est.lambda = v;
      est.worst_point = x;
    }
  }
  est.samples = samples;
  return est;
}

DistortionEnvelope distortion_envelope(const Endomorphism& model, const ConeSpec& cone, int pairs, int n_max,
                                       uint64_t seed) {
  require(pairs >= 1 && n_max >= 1, ErrorCode::input, "need at least one pair and one step");
  DistortionEnvelope env;
  for (int p = 0; p < pairs; ++p) {
    RandomStream rng(seed, static_cast<uint64_t>(p));
    TorusPoint y = sample_point(model, rng, p % 2 == 1);
    Matrix b1 = random_cone_subspace(cone, rng).basis(), b2 = random_cone_subspace(cone, rng).basis();
    double s = 0.0;
    for (int j = 0; j < n_max; ++j) {
      const Matrix df = model.derivative(y);
      s += push_subspace(df, b2) - push_subspace(df, b1);
      env.max_log_ratio = std::max(env.max_log_ratio, std::abs(s));
      y = advance(model, y);
    }
  }
  env.pairs = pairs;
  env.k0 = std::exp(env.max_log_ratio);
  return env;
}

}  // namespace phlab
