#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "phlab/cone.hpp"
#include "phlab/stats.hpp"

namespace phlab {

// a_j = log ||(Df(f^j x)|_C)^{-1}|| along an orbit, with per-step cone invariance flags.
struct OrbitLog {
  TorusPoint origin;
  std::vector<double> a;
  std::vector<uint8_t> invariant;
  bool valid() const noexcept;
};

// Caches the last derivative, so maps that are linear on most of the torus cost one solve.
class ConeNormCache {
 public:
  explicit ConeNormCache(const ConeSpec& cone) : cone_(cone) {}
  struct Entry {
    double log_inverse_norm;
    bool invariant;
  };
  Entry operator()(const Matrix& df);
  const ConeSpec& cone() const noexcept { return cone_; }

 private:
  ConeSpec cone_;
  Matrix last_;
  Entry entry_{};
  bool has_ = false;
};

OrbitLog orbit_log(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x, int n);

struct HyperbolicTimeRecord {
  std::vector<int> times;  // increasing, each in 1..length
  std::vector<int> gaps;   // n_{i+1} - n_i
  double c = 0.0;
  int length = 0;
  double density() const noexcept { return length ? static_cast<double>(times.size()) / length : 0.0; }
  int max_gap() const noexcept;
};

// All n <= a.size() with sum_{j=n-k}^{n-1} a_j <= -c k for every 1 <= k <= n. O(N): n qualifies
// iff S_n + c n is at most the running minimum of S_m + c m over m < n.
std::vector<int> detect_times(std::span<const double> a, double c);

// Throws input when c <= 0 or the orbit left the cone field.
HyperbolicTimeRecord detect_hyperbolic_times(const OrbitLog& orbit, double c);
HyperbolicTimeRecord make_record(std::vector<int> times, double c, int length);

struct PlissResult {
  std::vector<int> indices;
  double density = 0.0;
  double theta = 0.0;          // guaranteed density floor, 0 without guarantee
  bool hypothesis_ok = false;  // mean <= -2c and bound >= sup(-a_j)
};

// Pliss: if -a_j <= bound and the mean of a_j is <= -2c, at least theta N of the n <= N are
// c-hyperbolic, with theta = c / (bound - c). Throws internal if the floor is not met.
PlissResult pliss_select(std::span<const double> a, double c, double bound);

// 0 when no hyperbolic time exists up to n_max.
int first_hyperbolic_time(const Endomorphism& model, ConeNormCache& cache, const TorusPoint& x, double c,
                          int n_max);

using PointSampler = std::function<TorusPoint(RandomStream&)>;
PointSampler lebesgue_sampler(const Endomorphism& model);

struct TailCurve {
  std::vector<double> tail;  // tail[n] = fraction of samples with n1 > n, n = 0..n_max
  std::vector<int> n1;       // per sample, 0 = none up to n_max
  LinearFit fit;             // log tail vs n on its linear range
  int fit_from = 0;
  int fit_to = 0;
  bool degenerate = false;   // slope undefined (fewer than 3 usable points)
};

// Sample i uses RandomStream(seed, i).
TailCurve first_time_tail(const Endomorphism& model, const ConeSpec& cone, double c, int n_max, int samples,
                          uint64_t seed, const PointSampler& sampler = {});

struct LacunarityReport {
  std::vector<double> ratios;  // n_{i+1} / n_i
  double tail_max = 0.0;       // max ratio over the last half
  double tolerance = 0.05;
  bool pass = false;
};

// Throws input for fewer than 10 times.
LacunarityReport nonlacunarity_check(const HyperbolicTimeRecord& record, double tolerance = 0.05);

struct DefaultC {
  double c = 0.0;
  double pilot_mean = 0.0;
  int pilot_length = 0;
};

// c = 0.45 * (-mean a_j) over a pilot orbit from a seeded uniform point.
DefaultC default_c(const Endomorphism& model, const ConeSpec& cone, uint64_t seed, int pilot_length = 10000);

}  // namespace phlab
