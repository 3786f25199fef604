#include "phlab/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "phlab/parallel.hpp"

namespace phlab {

const char* to_string(BallMetric m) noexcept { return m == BallMetric::adapted ? "adapted" : "euclidean"; }

const char* to_string(VolumeMethod m) noexcept {
  return m == VolumeMethod::change_of_variables ? "cov" : "rejection";
}

namespace {

double unit_ball_volume(int k) {
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

// Uniform point of the k-ball of radius r.
Vector uniform_in_ball(RandomStream& rng, int k, double r) {
  Vector v(k);
  if (k == 0) return v;
  double nrm = 0.0;
  do {
    for (int i = 0; i < k; ++i) v[i] = rng.normal();
    nrm = v.norm();
  } while (nrm == 0.0);
  return v * (r * std::pow(rng.uniform(), 1.0 / k) / nrm);
}

void check_ball_args(const Endomorphism& model, const ConeSpec& s, const TorusPoint& x, int n,
                     const DynBallOptions& o) {
  require(s.ambient_dim() == model.dim() && x.dim() == model.dim(), ErrorCode::input, "dimension mismatch");
  require(n >= 0, ErrorCode::input, "n must be non-negative");
  require(o.eps > 0.0 && o.eps < 0.25, ErrorCode::input, "eps must lie in (0, 1/4)");
  require(o.samples >= 1, ErrorCode::input, "need at least one sample");
  if (o.density) require(o.density->dim() == model.dim(), ErrorCode::input, "density dimension mismatch");
}

// Neumaier summation; 10^6 plain additions drift by ~1e-12 relative, above the estimator noise
// for linear maps.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

std::vector<TorusPoint> exact_orbit(const Endomorphism& model, const TorusPoint& x, int n) {
  std::vector<TorusPoint> orb{x};
  orb.reserve(static_cast<size_t>(n) + 1);
  for (int j = 0; j < n; ++j) orb.push_back(model.eval(orb.back()));
  return orb;
}

// Histogram term of the variance: sum_b (l_b / vol_b)^2 var(m_b) with l_b = Leb(B cap bin b).
double histogram_variance(const EmpiricalMeasure& h, const std::map<size_t, double>& leb_per_bin) {
  const double n_eff = static_cast<double>(std::max<uint64_t>(1, h.samples * std::max<uint64_t>(1, h.iterates)));
  double v = 0.0;
  for (const auto& [bin, leb] : leb_per_bin) {
    const double m = h.masses()[bin];
    const double r = leb / h.bin_volume();
    v += r * r * m * (1.0 - m) / n_eff;
  }
  return v;
}

}  // namespace

double metric_ball_volume(const ConeSpec& s, BallMetric metric, double eps) {
  if (metric == BallMetric::euclidean) return unit_ball_volume(s.ambient_dim()) * std::pow(eps, s.ambient_dim());
  return unit_ball_volume(s.center_dim()) * unit_ball_volume(s.stable_dim()) * std::pow(eps, s.ambient_dim()) *
         s.chart_jacobian();
}

double ball_distance(const ConeSpec& s, BallMetric metric, const TangentVector& v) {
  if (metric == BallMetric::euclidean) return v.norm();
  return s.adapted_norm(v);
}

// Parameterization y(beta, w) = f^{-n}(z), z = f^n(y_s) + C (w - c), y_s = x + S beta, where c is the
// F-coordinate of f^n(y_s) - f^n(x), so plaques are centered on f^n x. The Jacobian is
// |det Df^{-n}(z)| * J * |det P_s Df^n(y_s) S|; the last factor is pushed forward in splitting
// coordinates.
DynBallEstimate dynball_lebesgue_cov(const Endomorphism& model, const ConeSpec& s, const TorusPoint& x, int n,
                                     const DynBallOptions& o) {
  check_ball_args(model, s, x, n, o);
  require(o.plaque_points >= 1, ErrorCode::input, "need at least one plaque point per fiber");
  const int d = s.center_dim(), k = s.stable_dim(), dim = s.ambient_dim();
  const bool adapted = o.metric == BallMetric::adapted;
  // Every point of B has |stable coordinate| below this radius for flat leaves; curved leaves of
  // non-linear models get a margin.
  const double fiber_radius =
      o.eps * (adapted ? 1.0 : s.stable_projection_norm()) * (model.is_linear() ? 1.0 : 1.25);
  const double center_radius = o.eps * (adapted ? 1.0 : s.center_projection_norm());
  const double fiber_volume = unit_ball_volume(k) * std::pow(fiber_radius, k);
  const std::vector<TorusPoint> xorb = exact_orbit(model, x, n);
  const Matrix chart = hstack(s.center(), s.stable());
  const Matrix coords = inverse(chart);
  std::optional<double> lin_log_det;
  if (model.is_linear()) lin_log_det = std::log(std::abs(determinant(model.homotopy_matrix())));

  const size_t fibers = static_cast<size_t>(std::max(1, o.samples / o.plaque_points));
  const size_t pts = static_cast<size_t>(o.plaque_points);
  std::vector<double> fiber_value(fibers, 0.0), fiber_c1(fibers, 1.0);
  std::vector<int> fiber_excluded(fibers, 0), fiber_accepted(fibers, 0);
  // (bin, Lebesgue contribution) per plaque point, for the histogram variance.
  std::vector<std::pair<size_t, double>> contrib(o.density ? fibers * pts : 0, {0, 0.0});

  parallel_for(fibers, o.threads, [&](size_t begin, size_t end, int) {
    std::vector<TorusPoint> yorb(static_cast<size_t>(n) + 1);
    for (size_t f = begin; f < end; ++f) {
      RandomStream rng(o.seed, f);
      const Vector beta = uniform_in_ball(rng, k, fiber_radius);
      const TorusPoint ys = k ? translate(x, s.stable() * beta) : x;
      const std::vector<TorusPoint> hint = exact_orbit(model, ys, n);
      double log_transverse = std::log(s.chart_jacobian());
      if (k) {
        Matrix frame(dim, k);
        for (int i = 0; i < k; ++i) frame(d + i, i) = 1.0;
        for (int j = 0; j < n; ++j) frame = coords * (model.derivative(hint[static_cast<size_t>(j)]) * (chart * frame));
        log_transverse += std::log(std::abs(determinant(frame.block(d, 0, k, k))));
      }
      const Vector shift = s.split(lift_difference(xorb.back(), hint.back())).center;
      const double plaque_volume = unit_ball_volume(d) * std::pow(center_radius, d);
      double sum = 0.0, wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
      for (size_t p = 0; p < pts; ++p) {
        const Vector w = uniform_in_ball(rng, d, center_radius);
        yorb[static_cast<size_t>(n)] = translate(hint.back(), s.center() * (w - shift));
        double log_w = log_transverse;
        bool ok = true;
        try {
          for (int j = n - 1; j >= 0; --j) {
            yorb[static_cast<size_t>(j)] =
                inverse_branch(model, yorb[static_cast<size_t>(j) + 1], hint[static_cast<size_t>(j)]);
            log_w -= lin_log_det ? *lin_log_det
                                 : std::log(std::abs(determinant(model.derivative(yorb[static_cast<size_t>(j)]))));
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::convergence && e.code() != ErrorCode::singularity) throw;
          ok = false;
        }
        if (!ok) {
          ++fiber_excluded[f];
          continue;
        }
        bool inside = true;
        for (int j = 0; j <= n && inside; ++j)
          inside = ball_distance(s, o.metric,
                                 lift_difference(xorb[static_cast<size_t>(j)], yorb[static_cast<size_t>(j)])) <= o.eps;
        if (!inside) continue;
        const double weight = std::exp(log_w);
        double value = weight;
        if (o.density) {
          const size_t bin = o.density->bin_index(yorb[0]);
          value *= o.density->density_at_bin(bin);
          contrib[f * pts + p] = {bin, fiber_volume * plaque_volume * weight / static_cast<double>(pts)};
        }
        ++fiber_accepted[f];
        sum += value;
        wmin = std::min(wmin, weight);
        wmax = std::max(wmax, weight);
      }
      fiber_value[f] = plaque_volume * sum / static_cast<double>(pts);
      if (wmax > 0.0) fiber_c1[f] = wmax / wmin;
    }
  });

  DynBallEstimate est;
  est.center = x;
  est.n = n;
  est.eps = o.eps;
  est.method = VolumeMethod::change_of_variables;
  CompensatedSum total;
  double sq = 0.0;
  for (size_t f = 0; f < fibers; ++f) {
    total.add(fiber_value[f]);
    est.excluded += fiber_excluded[f];
    est.accepted += fiber_accepted[f];
    est.distortion_c1 = std::max(est.distortion_c1, fiber_c1[f]);
  }
  const double mean = total.value() / static_cast<double>(fibers);
  for (double v : fiber_value) sq += (v - mean) * (v - mean);
  const double var = fibers > 1 ? sq / static_cast<double>(fibers - 1) : 0.0;
  est.value = fiber_volume * mean;
  double se2 = fiber_volume * fiber_volume * var / static_cast<double>(fibers);
  if (o.density) {
    std::map<size_t, double> leb;
    for (const auto& [bin, c] : contrib)
      if (c > 0.0) leb[bin] += c / static_cast<double>(fibers);
    se2 += histogram_variance(*o.density, leb);
  }
  est.stderr_ = std::max(std::sqrt(se2), 1e-12 * est.value);
  est.exclusion_rate = static_cast<double>(est.excluded) / static_cast<double>(fibers * pts);
  est.valid = est.exclusion_rate <= 0.01;
  return est;
}

DynBallEstimate dynball_lebesgue_rejection(const Endomorphism& model, const ConeSpec& s, const TorusPoint& x,
                                           int n, const DynBallOptions& o) {
  check_ball_args(model, s, x, n, o);
  const int d = s.center_dim(), k = s.stable_dim(), dim = s.ambient_dim();
  const std::vector<TorusPoint> xorb = exact_orbit(model, x, n);
  const double vol = metric_ball_volume(s, o.metric, o.eps);
  const size_t samples = static_cast<size_t>(o.samples);
  std::vector<double> weight(samples, 0.0);
  std::vector<size_t> bins(o.density ? samples : 0, 0);

  parallel_for(samples, o.threads, [&](size_t begin, size_t end, int) {
    for (size_t i = begin; i < end; ++i) {
      RandomStream rng(o.seed, i);
      Vector v(dim);
      if (o.metric == BallMetric::euclidean) {
        v = uniform_in_ball(rng, dim, o.eps);
      } else {
        v = s.center() * uniform_in_ball(rng, d, o.eps);
        if (k) v += s.stable() * uniform_in_ball(rng, k, o.eps);
      }
      const TorusPoint y0 = translate(x, v);
      TorusPoint y = y0;
      bool inside = ball_distance(s, o.metric, lift_difference(x, y)) <= o.eps;
      for (int j = 1; j <= n && inside; ++j) {
        y = model.eval(y);
        inside = ball_distance(s, o.metric, lift_difference(xorb[static_cast<size_t>(j)], y)) <= o.eps;
      }
      if (!inside) continue;
      weight[i] = 1.0;
      if (o.density) {
        bins[i] = o.density->bin_index(y0);
        weight[i] = o.density->density_at_bin(bins[i]);
      }
    }
  });

  DynBallEstimate est;
  est.center = x;
  est.n = n;
  est.eps = o.eps;
  est.method = VolumeMethod::rejection;
  CompensatedSum total;
  double sq = 0.0;
  for (double w : weight) {
    total.add(w);
    if (w > 0.0) ++est.accepted;
  }
  const double mean = total.value() / static_cast<double>(samples);
  for (double w : weight) sq += (w - mean) * (w - mean);
  const double var = samples > 1 ? sq / static_cast<double>(samples - 1) : 0.0;
  est.value = vol * mean;
  double se2 = vol * vol * var / static_cast<double>(samples);
  if (o.density) {
    std::map<size_t, double> leb;
    for (size_t i = 0; i < samples; ++i)
      if (weight[i] > 0.0) leb[bins[i]] += vol / static_cast<double>(samples);
    se2 += histogram_variance(*o.density, leb);
  }
  est.stderr_ = std::max(std::sqrt(se2), 1e-12 * est.value);
  if (est.accepted == 0) {
    est.lower_bound_only = true;
    est.upper_bound = vol * clopper_pearson_upper(0, samples);
  }
  est.valid = est.accepted > 0;
  return est;
}

VolumeRatioCurve volume_lemma_curve(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                                    const Subspace& f1, const std::vector<int>& n_list, const CurveOptions& o) {
  require(!n_list.empty(), ErrorCode::input, "empty n list");
  require(f1.dim() == cone.center_dim() && subspace_in_cone(f1, cone, 1e-12), ErrorCode::input,
          "F1 is not contained in C(x)");
  for (int n : n_list) require(n >= 1, ErrorCode::input, "n values must be positive");
  const int n_max = *std::max_element(n_list.begin(), n_list.end());

  VolumeRatioCurve curve;
  curve.center = x;
  curve.eps = o.ball.eps;
  curve.f1 = f1;
  curve.measure = o.ball.density ? "srb" : "lebesgue";
  curve.method = o.method;
  curve.c = o.c > 0.0 ? o.c : default_c(model, cone, o.c_seed).c;
  const auto record = detect_hyperbolic_times(orbit_log(model, cone, x, n_max), curve.c);
  for (int n : n_list)
    if (!std::binary_search(record.times.begin(), record.times.end(), n))
      fail(ErrorCode::input, "n = " + std::to_string(n) + " is not a c-cone-hyperbolic time for x (c = " +
                                 std::to_string(curve.c) + ")");

  std::vector<double> xs, ys, sig;
  curve.all_valid = true;
  for (int n : n_list) {
    const DynBallEstimate e = o.method == VolumeMethod::change_of_variables
                                  ? dynball_lebesgue_cov(model, cone, x, n, o.ball)
                                  : dynball_lebesgue_rejection(model, cone, x, n, o.ball);
    VolumeRatioPoint p;
    p.n = n;
    p.estimate = e.value;
    p.stderr_ = e.stderr_;
    p.logdet = transport_subspace(model, x, f1, n).log_det;
    p.ratio = e.value * std::exp(p.logdet);
    p.ratio_se = e.stderr_ * std::exp(p.logdet);
    p.valid = e.valid && e.value > 0.0;
    curve.all_valid = curve.all_valid && p.valid;
    curve.points.push_back(p);
    if (p.valid) {
      xs.push_back(n);
      ys.push_back(std::log(p.ratio));
      sig.push_back(p.ratio_se / p.ratio);
    }
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& p : curve.points) {
    if (!p.valid) continue;
    lo = std::min(lo, p.ratio);
    hi = std::max(hi, p.ratio);
    curve.k2 = std::max({curve.k2, p.ratio, 1.0 / p.ratio});
  }
  curve.max_over_min = hi > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  curve.bounded = curve.max_over_min <= o.k_cap;
  if (xs.size() >= 2) {
    curve.trend = weighted_fit(xs, ys, sig);
    curve.trendless = std::abs(curve.trend.slope) <= 2.0 * curve.trend.slope_se;
  } else {
    curve.trendless = true;
  }
  curve.pairwise_consistent = true;
  for (size_t i = 0; i < curve.points.size(); ++i)
    for (size_t j = i + 1; j < curve.points.size(); ++j) {
      const auto &a = curve.points[i], &b = curve.points[j];
      if (std::abs(a.ratio - b.ratio) > 3.0 * std::hypot(a.ratio_se, b.ratio_se)) curve.pairwise_consistent = false;
    }
  curve.pass = curve.bounded && curve.trendless && curve.all_valid;
  return curve;
}

double jacobian_constant(const Endomorphism& model, int samples, uint64_t seed) {
  require(samples >= 1, ErrorCode::input, "need at least one sample");
  RandomStream rng(seed, 2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const TorusPoint y = sample_point(model, rng, i % 2 == 1);
    best = std::min(best, spectral_norm(inverse(model.derivative(y))));
  }
  return best / model.center_basis().cols();
}

std::vector<double> weak_gibbs_sequence(const HyperbolicTimeRecord& record, int n_max, double k2, double c_const) {
  require(!record.times.empty(), ErrorCode::input, "no hyperbolic times: weak-Gibbs sequence undefined");
  require(n_max >= 1 && k2 > 0.0 && c_const > 0.0, ErrorCode::input, "invalid weak-Gibbs arguments");
  std::vector<double> out(static_cast<size_t>(n_max) + 1, 0.0);
  size_t idx = 0;
  int last = 0;
  for (int n = 1; n <= n_max; ++n) {
    while (idx < record.times.size() && record.times[idx] <= n) last = record.times[idx++];
    out[static_cast<size_t>(n)] = (std::log(k2) + (n - last) * std::log(c_const)) / n;
  }
  return out;
}

}  // namespace phlab
