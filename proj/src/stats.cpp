#include "phlab/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>

#include "phlab/error.hpp"

namespace phlab {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::input, "fit: x and y lengths differ");
  require(x.size() >= 2, ErrorCode::input, "fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::degeneracy, "fit: all x values coincide");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : std::numeric_limits<double>::infinity();
  return f;
}

LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  require(x.size() == y.size() && x.size() == sigma.size(), ErrorCode::input, "fit: lengths differ");
  require(x.size() >= 2, ErrorCode::input, "fit: need at least two points");
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    require(sigma[i] > 0.0 && std::isfinite(sigma[i]), ErrorCode::input, "fit: sigma must be positive");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    mx += w * x[i];
    my += w * y[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
    syy += w * (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::degeneracy, "fit: all x values coincide");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);
  double sse = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r / (sigma[i] * sigma[i]);
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

double clopper_pearson_upper(uint64_t k, uint64_t n, double alpha) {
  require(n > 0 && k <= n, ErrorCode::input, "Clopper-Pearson: need 0 <= k <= n, n > 0");
  if (k == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(n - k), 1.0 - alpha / 2);
}

double clopper_pearson_lower(uint64_t k, uint64_t n, double alpha) {
  require(n > 0 && k <= n, ErrorCode::input, "Clopper-Pearson: need 0 <= k <= n, n > 0");
  if (k == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), alpha / 2);
}

}  // namespace phlab
