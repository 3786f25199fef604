#include "phlab/deviations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "phlab/parallel.hpp"
#include "phlab/volume.hpp"

namespace phlab {

NamedObservable builtin_observable(const std::string& id, int dim) {
  const auto coord = [&](int i) {
    require(i < dim, ErrorCode::input, "observable " + id + " needs dimension > " + std::to_string(i));
    return i;
  };
  if (id == "cos_x1" || id == "cos_x2") {
    const int i = coord(id == "cos_x1" ? 0 : 1);
    return {id, [i](const TorusPoint& x) { return std::cos(2.0 * std::numbers::pi * x[i]); }};
  }
  if (id == "sin_x1") return {id, [](const TorusPoint& x) { return std::sin(2.0 * std::numbers::pi * x[0]); }};
  if (id == "const") return {id, [](const TorusPoint&) { return 1.0; }};
  fail(ErrorCode::input, "unknown observable '" + id + "' (known: cos_x1, cos_x2, sin_x1, const)");
}

DeviationCurve deviation_curve(const Endomorphism& model, const EmpiricalMeasure& srb, const NamedObservable& phi,
                               double delta, const std::vector<int>& n_list, const DeviationOptions& o) {
  require(srb.dim() == model.dim(), ErrorCode::input, "histogram dimension mismatch");
  require(delta > 0.0, ErrorCode::input, "delta must be positive");
  require(o.samples >= 1, ErrorCode::input, "need at least one sample");
  require(!n_list.empty(), ErrorCode::input, "empty n list");
  for (int n : n_list) require(n >= 1, ErrorCode::input, "n values must be positive");
  require(static_cast<bool>(phi.fn), ErrorCode::input, "observable has no function");

  const size_t rows = n_list.size(), samples = static_cast<size_t>(o.samples);
  std::vector<double> avg(rows * samples);
  parallel_for(rows * samples, o.threads, [&](size_t begin, size_t end, int) {
    for (size_t idx = begin; idx < end; ++idx) {
      const size_t k = idx / samples, i = idx % samples;
      RandomStream rng(o.seed, (static_cast<uint64_t>(k) << 32) | i);
      avg[idx] = birkhoff_average(model, srb.sample(rng), phi.fn, n_list[k]);
    }
  });

  DeviationCurve out;
  out.phi_id = phi.id;
  out.delta = delta;
  if (std::isnan(o.mean)) {
    double s = 0.0;
    for (double a : avg) s += a;
    out.mean = s / static_cast<double>(avg.size());
    out.mean_estimated = true;
  } else {
    out.mean = o.mean;
  }

  {
    RandomStream rng(o.seed ^ 0x6d6f64ULL, 0);
    const double side = 1.0 / srb.resolution();
    for (int t = 0; t < 4096; ++t) {
      const TorusPoint u = srb.sample(rng);
      const TorusPoint corner = srb.bin_corner(srb.bin_index(u));
      Vector v(model.dim());
      for (int i = 0; i < model.dim(); ++i) v[i] = corner[i] + side * rng.uniform();
      out.grid_modulus = std::max(out.grid_modulus, std::abs(phi.fn(u) - phi.fn(TorusPoint(v))));
    }
  }

  std::vector<double> xs, ys;
  for (size_t k = 0; k < rows; ++k) {
    DeviationRow r;
    r.n = n_list[k];
    r.samples = o.samples;
    for (size_t i = 0; i < samples; ++i)
      if (std::abs(avg[k * samples + i] - out.mean) >= delta) ++r.hits;
    r.p = static_cast<double>(r.hits) / static_cast<double>(r.samples);
    r.censored = r.hits == 0;
    r.log_rate = r.censored ? std::numeric_limits<double>::quiet_NaN() : std::log(r.p) / r.n;
    r.upper = clopper_pearson_upper(static_cast<uint64_t>(r.hits), static_cast<uint64_t>(r.samples));
    if (!r.censored) {
      xs.push_back(r.n);
      ys.push_back(std::log(r.p));
    }
    out.rows.push_back(r);
  }
  out.fit_ok = xs.size() >= 3;
  if (out.fit_ok) {
    out.fit = linear_fit(xs, ys);
  } else {
    out.fit.slope = std::numeric_limits<double>::quiet_NaN();
    out.fit.points = static_cast<int>(xs.size());
  }
  return out;
}

RateBound e_mu_beta(const Endomorphism& model, const ConeSpec& cone, const EmpiricalMeasure& srb, double c,
                    const std::vector<double>& betas, int n_max, int samples, uint64_t seed) {
  require(!betas.empty(), ErrorCode::input, "empty beta grid");
  for (double b : betas) require(b > 0.0, ErrorCode::input, "beta values must be positive");
  require(n_max >= 3, ErrorCode::input, "n_max must be at least 3");
  require(srb.dim() == model.dim(), ErrorCode::input, "histogram dimension mismatch");

  RateBound out;
  out.c = c;
  out.jacobian_c = jacobian_constant(model);
  require(out.jacobian_c > 1.0, ErrorCode::degeneracy,
          "jacobian constant C = " + std::to_string(out.jacobian_c) + " <= 1: thresholds undefined");
  const double scale = 1.0 / (2.0 * std::log(out.jacobian_c));
  const double beta_max = *std::max_element(betas.begin(), betas.end());
  const int t_max = static_cast<int>(std::floor(beta_max * n_max * scale)) + 1;
  out.tail = first_time_tail(model, cone, c, std::max(t_max, 3), samples, seed,
                             [&srb](RandomStream& rng) { return srb.sample(rng); });
  const auto& tail = out.tail.tail;
  const bool empty_tail = tail.size() < 2 || tail[1] == 0.0;

  out.inf_e = std::numeric_limits<double>::infinity();
  out.proxy_bound = std::numeric_limits<double>::infinity();
  for (double beta : betas) {
    RateEstimate e;
    e.beta = beta;
    if (empty_tail) {
      e.censored_at_floor = true;
      e.slope = -std::numeric_limits<double>::infinity();
    } else {
      std::vector<double> xs, ys;
      for (int n = 1; n <= n_max; ++n) {
        const auto t = static_cast<size_t>(std::floor(beta * n * scale));
        if (t < 1 || t >= tail.size()) continue;
        if (tail[t] * samples < 10.0) break;
        xs.push_back(n);
        ys.push_back(std::log(tail[t]));
      }
      e.points = static_cast<int>(xs.size());
      e.fit_ok = xs.size() >= 3;
      if (e.fit_ok) {
        const LinearFit f = linear_fit(xs, ys);
        e.slope = std::min(0.0, f.slope);
        e.slope_se = f.slope_se;
      } else {
        e.slope = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (!std::isnan(e.slope)) {
      out.inf_e = std::min(out.inf_e, e.slope);
      out.proxy_bound = std::min(out.proxy_bound, std::max(e.slope, -out.i_proxy + beta));
    }
    out.rates.push_back(e);
  }
  return out;
}

PesinDefect pesin_defect(const Endomorphism& model, const ConeSpec& cone, const EmpiricalMeasure& srb, int n,
                         int points, uint64_t seed, int subspace_samples) {
  require(n >= 1 && points >= 2, ErrorCode::input, "need n >= 1 and at least two points");
  require(srb.dim() == model.dim(), ErrorCode::input, "histogram dimension mismatch");
  PesinDefect out;
  out.points = points;
  const Subspace f1(cone.center());
  std::vector<double> lim(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) {
    RandomStream rng(seed, static_cast<uint64_t>(i));
    lim[static_cast<size_t>(i)] =
        gamma_sequence(model, cone, srb.sample(rng), f1, n, subspace_samples, mix64(seed + static_cast<uint64_t>(i)))
            .limit;
  }
  double s = 0.0, sq = 0.0;
  for (double v : lim) s += v;
  out.gamma_integral = s / points;
  for (double v : lim) sq += (v - out.gamma_integral) * (v - out.gamma_integral);
  out.gamma_se = std::sqrt(sq / (points - 1) / points);
  if (const auto* lin = dynamic_cast<const LinearAnosov*>(&model)) {
    out.entropy_available = true;
    out.entropy = lin->eigen().unstable_log_volume;
    out.defect = out.gamma_integral - out.entropy;
  } else {
    out.defect = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace phlab
