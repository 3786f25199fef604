#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phlab/hyperbolic_times.hpp"
#include "phlab/measure.hpp"

namespace phlab {

// Distance used for dynamic balls B(x,n,eps) = { y : dist(f^j y, f^j x) <= eps, 0 <= j <= n }.
//   adapted:   max(|v_s|, |v_c|) in the splitting coordinates of the cone
//   euclidean: flat torus distance
enum class BallMetric { adapted, euclidean };
enum class VolumeMethod { change_of_variables, rejection };

const char* to_string(BallMetric m) noexcept;
const char* to_string(VolumeMethod m) noexcept;

struct DynBallOptions {
  double eps = 0.05;
  int samples = 100000;
  uint64_t seed = 1;
  BallMetric metric = BallMetric::adapted;
  int threads = 1;
  // Change of variables: plaque points per stable fiber.
  int plaque_points = 4;
  // When set, estimates mu(B) for the histogram measure instead of Lebesgue measure.
  const EmpiricalMeasure* density = nullptr;
};

struct DynBallEstimate {
  TorusPoint center;
  int n = 0;
  double eps = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
  VolumeMethod method = VolumeMethod::change_of_variables;
  bool valid = true;
  // Rejection with zero acceptances: value is 0 and `upper_bound` holds a 95% bound.
  bool lower_bound_only = false;
  double upper_bound = 0.0;
  int64_t accepted = 0;
  int64_t excluded = 0;        // inverse-branch failures (change of variables)
  double exclusion_rate = 0.0;
  double distortion_c1 = 1.0;  // max over fibers of max/min plaque weight
};

// Volume of the radius-eps ball of the metric.
double metric_ball_volume(const ConeSpec& splitting, BallMetric metric, double eps);
double ball_distance(const ConeSpec& splitting, BallMetric metric, const TangentVector& v);

// Stable-fiber integral of pulled-back plaque volumes: beta uniform in the stable ball, z uniform
// in an F-disk at f^n(x + beta), y = f^{-n}(z) along the orbit branch, weight |det Df^{-n}(z)|_F|.
// Inverse-branch failures are excluded; above 1% the estimate is marked invalid.
DynBallEstimate dynball_lebesgue_cov(const Endomorphism& model, const ConeSpec& splitting, const TorusPoint& x,
                                     int n, const DynBallOptions& options);

// Fraction of uniform points of B(x, eps) that stay eps-close for n steps, times the ball volume.
DynBallEstimate dynball_lebesgue_rejection(const Endomorphism& model, const ConeSpec& splitting,
                                           const TorusPoint& x, int n, const DynBallOptions& options);

struct VolumeRatioPoint {
  int n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double logdet = 0.0;  // log |det Df^n(x)|_{F1}|
  double ratio = 0.0;   // estimate * exp(logdet)
  double ratio_se = 0.0;
  bool valid = true;
};

struct CurveOptions {
  DynBallOptions ball;
  VolumeMethod method = VolumeMethod::change_of_variables;
  double k_cap = 1e3;
  double c = 0.0;  // hyperbolic-time constant; <= 0 selects default_c
  uint64_t c_seed = 1;
};

struct VolumeRatioCurve {
  TorusPoint center;
  std::vector<VolumeRatioPoint> points;
  double eps = 0.0;
  double c = 0.0;
  Subspace f1;
  std::string measure;  // "lebesgue" or "srb"
  VolumeMethod method = VolumeMethod::change_of_variables;
  double max_over_min = 1.0;
  LinearFit trend;             // weighted fit of log R_n against n
  bool bounded = false;        // max/min <= k_cap
  bool trendless = false;      // |slope| <= 2 sigma
  bool pairwise_consistent = false;  // |R_i - R_j| <= 3 sqrt(se_i^2 + se_j^2) for all pairs
  bool all_valid = false;
  bool pass = false;           // bounded && trendless && all_valid
  double k2 = 1.0;             // empirical envelope max_n max(R_n, 1/R_n)
};

// Throws input when some n is not a c-cone-hyperbolic time for x or F1 is not in C(x).
VolumeRatioCurve volume_lemma_curve(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                                    const Subspace& f1, const std::vector<int>& n_list, const CurveOptions& options);

// d^{-1} * min over sampled y of ||Df(y)^{-1}||.
double jacobian_constant(const Endomorphism& model, int samples = 20000, uint64_t seed = 1);

// (1/n) log K_n for n = 1..n_max with K_n = K2 * C^(n - n_i), n_i the last hyperbolic time <= n
// (0 before the first one). Throws input when the record has no times.
std::vector<double> weak_gibbs_sequence(const HyperbolicTimeRecord& record, int n_max, double k2, double c_const);

}  // namespace phlab
