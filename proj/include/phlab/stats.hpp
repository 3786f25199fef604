#pragma once

#include <cstdint>
#include <span>

namespace phlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Ordinary least squares; slope_se from the residual variance (needs >= 3 points for a finite value).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Weighted least squares with known standard deviations per point.
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma);

// Two-sided Clopper-Pearson bounds for k successes in n trials at confidence 1 - alpha.
double clopper_pearson_upper(uint64_t k, uint64_t n, double alpha = 0.05);
double clopper_pearson_lower(uint64_t k, uint64_t n, double alpha = 0.05);

}  // namespace phlab
