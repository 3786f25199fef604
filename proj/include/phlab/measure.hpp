#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "phlab/cone.hpp"

namespace phlab {

// Histogram on the uniform grid of T^dim with `resolution` bins per axis. Bin of x: floor(x_i * res).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  // Normalizes `counts` to masses. Throws input on a zero total or a size mismatch.
  EmpiricalMeasure(int dim, int resolution, const std::vector<uint64_t>& counts);
  EmpiricalMeasure(int dim, int resolution, std::vector<double> masses);

  int dim() const noexcept { return dim_; }
  int resolution() const noexcept { return res_; }
  size_t bins() const noexcept { return mass_.size(); }
  const std::vector<double>& masses() const noexcept { return mass_; }
  double bin_volume() const noexcept;

  size_t bin_index(const TorusPoint& x) const;
  // Lower corner of a bin.
  TorusPoint bin_corner(size_t index) const;
  // Mass divided by bin volume (Lebesgue density of the histogram).
  double density(const TorusPoint& x) const { return mass_[bin_index(x)] / bin_volume(); }
  double density_at_bin(size_t index) const { return mass_[index] / bin_volume(); }

  // Bin drawn by mass, then a uniform point inside it.
  TorusPoint sample(RandomStream& rng) const;

  double tv_distance(const EmpiricalMeasure& other) const;
  double tv_to_uniform() const;

  // Provenance.
  uint64_t seed = 0;
  uint64_t samples = 0;
  uint64_t burn_in = 0;
  uint64_t iterates = 0;

  // Binary layout (little-endian): "PHLSRB01", u32 dim, u32 resolution, u64 seed, u64 samples,
  // u64 burn_in, u64 iterates, then res^dim float64 masses in bin order.
  void save(const std::string& path) const;
  static EmpiricalMeasure load(const std::string& path);
  // CSV summary: key,value rows.
  void write_summary_csv(const std::string& path) const;

 private:
  void build_cdf();
  int dim_ = 0;
  int res_ = 0;
  std::vector<double> mass_;
  std::vector<double> cdf_;
};

// Coordinate disk: center + ball of `radius` in `tangent`.
struct DiskSpec {
  TorusPoint center;
  double radius = 0.0;
  Subspace tangent;
};

// Default disk for a model: centered at `center`, tangent to F.
DiskSpec default_disk(const Endomorphism& model, const TorusPoint& center, double radius);

struct SrbOptions {
  int iterates = 200;   // n: length of the Cesaro average
  int samples = 100000;
  int resolution = 64;
  int burn_in = 20;     // iterates skipped before averaging
  uint64_t seed = 1;
  int threads = 1;
};

// Histogram of (1/n) sum_{j=b}^{b+n-1} f^j_* Leb_D. Sample i uses RandomStream(seed, i); counts are
// integers, so the result does not depend on the thread count. Throws input if D is not tangent
// to the cone at its center.
EmpiricalMeasure empirical_srb(const Endomorphism& model, const ConeSpec& cone, const DiskSpec& disk,
                               const SrbOptions& options);

using Observable = std::function<double(const TorusPoint&)>;

double birkhoff_average(const Endomorphism& model, const TorusPoint& x, const Observable& phi, int n);

struct LyapunovResult {
  std::vector<double> exponents;  // descending
  double log_det_average = 0.0;   // (1/n) sum log|det Df(f^j x)|
};

// QR cocycle iteration, re-orthonormalized every `reorth` steps. Throws internal when the
// orthonormality defect after a re-orthonormalization exceeds 1e-6.
LyapunovResult lyapunov_spectrum(const Endomorphism& model, const TorusPoint& x, int n, int reorth = 10);

struct GammaEstimate {
  std::vector<double> log_gamma;   // [n] = log Gamma_n(x), n = 0..n_max
  std::vector<double> log_det_f1;  // [n] = log |det Df^n(x)|_{F1}|
  double limit = 0.0;              // (1/n_max) log Gamma_{n_max}
  double max_gap = 0.0;            // max_n (log Gamma_n - log det_F1); a lower bound for log K0
  int subspace_samples = 0;
};

// Gamma_n(x) = max over F1 and `subspace_samples` random subspaces of C(x) of |det Df^n|_G|.
// Throws input when F1 is not inside the cone.
GammaEstimate gamma_sequence(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                             const Subspace& f1, int n_max, int subspace_samples, uint64_t seed);

// log Gamma_{n+m}(x) - log Gamma_n(x) - log Gamma_m(f^n x). The subspaces used at f^n x include the
// images of those used at x, so the value is <= 0 up to rounding.
double submultiplicativity_excess(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                                  const Subspace& f1, int n, int m, int subspace_samples, uint64_t seed);

}  // namespace phlab
