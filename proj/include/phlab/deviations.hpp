#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phlab/hyperbolic_times.hpp"
#include "phlab/measure.hpp"

namespace phlab {

struct NamedObservable {
  std::string id;
  Observable fn;
};

// "cos_x1" = cos(2 pi x_1), "cos_x2", "sin_x1", "const" = 1. Throws input for unknown ids or a
// coordinate beyond the model dimension.
NamedObservable builtin_observable(const std::string& id, int dim);

struct DeviationRow {
  int n = 0;
  int64_t hits = 0;
  int64_t samples = 0;
  double p = 0.0;
  double log_rate = 0.0;  // (1/n) log P_n, NaN when censored
  bool censored = false;  // P_n = 0
  double upper = 0.0;     // Clopper-Pearson upper bound on P_n
};

struct DeviationCurve {
  std::string phi_id;
  double delta = 0.0;
  double mean = 0.0;            // mu-mean of phi used to center the deviations
  bool mean_estimated = false;  // grand mean of all sampled Birkhoff averages
  double grid_modulus = 0.0;    // sampled oscillation of phi inside one histogram bin
  std::vector<DeviationRow> rows;
  LinearFit fit;                // log P_n against n over the uncensored rows
  bool fit_ok = false;          // at least 3 uncensored rows
};

struct DeviationOptions {
  int samples = 100000;
  uint64_t seed = 1;
  int threads = 1;
  // Centering value; NaN estimates it from the samples.
  double mean = std::numeric_limits<double>::quiet_NaN();
};

// Initial points are drawn from `srb` (bin by mass, uniform inside the bin). Row k, sample i uses
// RandomStream(seed, (k << 32) | i).
DeviationCurve deviation_curve(const Endomorphism& model, const EmpiricalMeasure& srb, const NamedObservable& phi,
                               double delta, const std::vector<int>& n_list, const DeviationOptions& options);

struct RateEstimate {
  double beta = 0.0;
  double slope = 0.0;  // E_mu(beta), clamped to <= 0; -inf when censored at the floor
  double slope_se = 0.0;
  bool censored_at_floor = false;  // no sample has n1 > 1
  bool fit_ok = false;
  int points = 0;
};

struct RateBound {
  std::vector<RateEstimate> rates;
  double jacobian_c = 0.0;
  double c = 0.0;
  TailCurve tail;        // first-time tail under the sampled measure
  double inf_e = 0.0;    // inf over the grid of E_mu(beta)
  double i_proxy = 0.0;  // rate function at the mu-mean (0 by Pesin's formula)
  // inf over the grid of max{E_mu(beta), -i_proxy + beta}.
  double proxy_bound = 0.0;
};

// E_mu(beta): slope in n of log mu(n1 > beta n / (2 log C)) for n = 1..n_max, C = jacobian_constant.
RateBound e_mu_beta(const Endomorphism& model, const ConeSpec& cone, const EmpiricalMeasure& srb, double c,
                    const std::vector<double>& betas, int n_max, int samples, uint64_t seed);

struct PesinDefect {
  double gamma_integral = 0.0;  // mean of (1/n) log Gamma_n over sampled points
  double gamma_se = 0.0;
  bool entropy_available = false;
  double entropy = 0.0;  // sum of log|lambda| > 0 for linear models
  double defect = 0.0;   // gamma_integral - entropy when available
  int points = 0;
};

PesinDefect pesin_defect(const Endomorphism& model, const ConeSpec& cone, const EmpiricalMeasure& srb, int n,
                         int points, uint64_t seed, int subspace_samples = 8);

}  // namespace phlab
