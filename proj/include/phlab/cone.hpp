#pragma once

#include <cstdint>
#include <vector>

#include "phlab/cone_spec.hpp"
#include "phlab/endomorphism.hpp"

namespace phlab {

// Cone of the given width around the model's constant splitting E^s (+) F.
ConeSpec default_cone(const Endomorphism& model, double width = 0.1);

// F2 = graph(L) over the reference F1 along E^s: L maps F1-basis coordinates to E^s coordinates.
struct GraphRepresentation {
  Subspace reference;
  Matrix l;  // (d*-d) x d
};

// Throws degeneracy when F1 or F2 contains a stable direction.
GraphRepresentation graph_representation(const Subspace& f2, const Subspace& f1, const ConeSpec& splitting);
Subspace subspace_from_graph(const GraphRepresentation& g, const ConeSpec& splitting);

// How vector lengths are measured in theta.
//   adapted:   |v|_a = max(|v_s|, |v_c|) in the splitting coordinates; on a cone of width <= 1
//              this is |v_c|, and theta reduces to the spectral norm of G2 - G1 where G_i is the
//              graph of F_i over F.
//   euclidean: the ambient norm; theta = max(|(G2-G1) C1|, |(G1-G2) C2|), C_i = F-part of F_i.
enum class ThetaMetric { adapted, euclidean };

double theta_distance(const Subspace& f1, const Subspace& f2, const ConeSpec& splitting,
                      ThetaMetric metric = ThetaMetric::adapted);

double restricted_inverse_norm(const Endomorphism& model, const TorusPoint& x, const ConeSpec& cone);

struct InvarianceReport {
  double min_margin = 0.0;
  TorusPoint worst_point;
  int samples = 0;
  bool pass = false;
};

// Minimum over sampled x of the exact cone margin of Df(x). Half of the points are drawn in the
// perturbation region when the model has one.
InvarianceReport cone_invariance_check(const Endomorphism& model, const ConeSpec& cone, int samples,
                                       uint64_t seed = 1);

// log |det Df^n(x)|_F| by the wedge cocycle, re-orthonormalizing every step.
struct SubspaceTransport {
  double log_det = 0.0;
  Subspace image;
  TorusPoint end;
};
SubspaceTransport transport_subspace(const Endomorphism& model, const TorusPoint& x, const Subspace& f, int n);

// |det Df^n(x)|_{F2}| / |det Df^n(x)|_{F1}|, accumulated in the log domain.
double det_distortion_ratio(const Endomorphism& model, const TorusPoint& x, const Subspace& f1,
                            const Subspace& f2, int n);

// theta_{f^i x}(Df^i F1, Df^i F2) for i = 0..n.
std::vector<double> theta_contraction_factor(const Endomorphism& model, const TorusPoint& x, const Subspace& f1,
                                             const Subspace& f2, int n, const ConeSpec& splitting,
                                             ThetaMetric metric = ThetaMetric::adapted);

// Empirical domination constant: sup over sampled x of ||Df|_{E^s}|| * ||(Df|_C)^{-1}||.
struct DominationEstimate {
  double lambda = 0.0;
  TorusPoint worst_point;
  int samples = 0;
};
DominationEstimate domination_constant(const Endomorphism& model, const ConeSpec& cone, int samples,
                                       uint64_t seed = 1);

// sup |log det-ratio| over random x, F1, F2 in C(x) and n <= n_max; K0 = exp of it.
struct DistortionEnvelope {
  double k0 = 1.0;
  double max_log_ratio = 0.0;
  int pairs = 0;
};
DistortionEnvelope distortion_envelope(const Endomorphism& model, const ConeSpec& cone, int pairs, int n_max,
                                       uint64_t seed = 1);

// Uniform point on the torus, or uniform in the perturbation ball when `in_region` is set and the
// model has one.
TorusPoint sample_point(const Endomorphism& model, RandomStream& rng, bool in_region);

}  // namespace phlab
