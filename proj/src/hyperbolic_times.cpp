#include "phlab/hyperbolic_times.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phlab {

bool OrbitLog::valid() const noexcept {
  return std::all_of(invariant.begin(), invariant.end(), [](uint8_t f) { return f != 0; });
}

ConeNormCache::Entry ConeNormCache::operator()(const Matrix& df) {
  if (has_ && df == last_) return entry_;
  entry_.log_inverse_norm = std::log(restricted_inverse_norm(df, cone_));
  entry_.invariant = cone_invariance_margin(df, cone_) >= 0.0;
  last_ = df;
  has_ = true;
  return entry_;
}

OrbitLog orbit_log(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x, int n) {
  require(n >= 0, ErrorCode::input, "orbit length must be non-negative");
  OrbitLog log;
  log.origin = x;
  log.a.reserve(static_cast<size_t>(n));
  log.invariant.reserve(static_cast<size_t>(n));
  ConeNormCache cache(cone);
  TorusPoint y = x;
  for (int j = 0; j < n; ++j) {
    const auto e = cache(model.derivative(y));
    log.a.push_back(e.log_inverse_norm);
    log.invariant.push_back(e.invariant);
    y = advance(model, y);
  }
  return log;
}

int HyperbolicTimeRecord::max_gap() const noexcept {
  int g = 0;
  for (int x : gaps) g = std::max(g, x);
  return g;
}

std::vector<int> detect_times(std::span<const double> a, double c) {
  std::vector<int> out;
  double t = 0.0;     // S_n + c n
  double low = 0.0;   // min over m < n of S_m + c m
  for (size_t j = 0; j < a.size(); ++j) {
    t += a[j] + c;
    if (t <= low) {
      out.push_back(static_cast<int>(j) + 1);
      low = t;
    }
  }
  return out;
}

HyperbolicTimeRecord make_record(std::vector<int> times, double c, int length) {
  HyperbolicTimeRecord r;
  r.times = std::move(times);
  r.c = c;
  r.length = length;
  for (size_t i = 1; i < r.times.size(); ++i) r.gaps.push_back(r.times[i] - r.times[i - 1]);
  return r;
}

HyperbolicTimeRecord detect_hyperbolic_times(const OrbitLog& orbit, double c) {
  require(c > 0.0, ErrorCode::input, "c must be positive");
  for (size_t j = 0; j < orbit.invariant.size(); ++j)
    if (!orbit.invariant[j])
      fail(ErrorCode::input, "orbit invalid: cone invariance violated at step " + std::to_string(j));
  return make_record(detect_times(orbit.a, c), c, static_cast<int>(orbit.a.size()));
}

PlissResult pliss_select(std::span<const double> a, double c, double bound) {
  require(c > 0.0, ErrorCode::input, "c must be positive");
  require(!a.empty(), ErrorCode::input, "empty sequence");
  PlissResult r;
  r.indices = detect_times(a, c);
  r.density = static_cast<double>(r.indices.size()) / static_cast<double>(a.size());
  double sum = 0.0, sup_neg = -std::numeric_limits<double>::infinity();
  for (double x : a) {
    sum += x;
    sup_neg = std::max(sup_neg, -x);
  }
  const double mean = sum / static_cast<double>(a.size());
  r.hypothesis_ok = mean <= -2.0 * c && bound >= sup_neg && bound > c;
  if (r.hypothesis_ok) {
    r.theta = std::min(1.0, c / (bound - c));
    // The floor counts ceil(theta N) times; allow one ulp of slack in the product.
    if (static_cast<double>(r.indices.size()) < r.theta * static_cast<double>(a.size()) * (1.0 - 1e-12))
      fail(ErrorCode::internal, "Pliss floor violated: density " + std::to_string(r.density) + " < " +
                                    std::to_string(r.theta));
  }
  return r;
}

int first_hyperbolic_time(const Endomorphism& model, ConeNormCache& cache, const TorusPoint& x, double c,
                          int n_max) {
  double t = 0.0, low = 0.0;
  TorusPoint y = x;
  for (int j = 0; j < n_max; ++j) {
    const auto e = cache(model.derivative(y));
    if (!e.invariant) fail(ErrorCode::input, "orbit invalid: cone invariance violated");
    t += e.log_inverse_norm + c;
    if (t <= low) return j + 1;
    low = std::min(low, t);
    y = advance(model, y);
  }
  return 0;
}

PointSampler lebesgue_sampler(const Endomorphism& model) {
  const int d = model.dim();
  return [d](RandomStream& rng) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.uniform();
    return TorusPoint(v);
  };
}

TailCurve first_time_tail(const Endomorphism& model, const ConeSpec& cone, double c, int n_max, int samples,
                          uint64_t seed, const PointSampler& sampler) {
  require(c > 0.0, ErrorCode::input, "c must be positive");
  require(n_max >= 1, ErrorCode::input, "n_max must be positive");
  require(samples >= 1000, ErrorCode::input, "first_time_tail needs at least 1000 samples");
  const PointSampler draw = sampler ? sampler : lebesgue_sampler(model);
  TailCurve out;
  out.n1.resize(static_cast<size_t>(samples));
  std::vector<int64_t> hits(static_cast<size_t>(n_max) + 1, 0);  // hits[n] = #{n1 == n}, hits[0] = none found
  ConeNormCache cache(cone);
  for (int i = 0; i < samples; ++i) {
    RandomStream rng(seed, static_cast<uint64_t>(i));
    const int n1 = first_hyperbolic_time(model, cache, draw(rng), c, n_max);
    out.n1[static_cast<size_t>(i)] = n1;
    ++hits[static_cast<size_t>(n1)];
  }
  out.tail.assign(static_cast<size_t>(n_max) + 1, 0.0);
  int64_t remaining = samples;
  for (int n = 0; n <= n_max; ++n) {
    if (n >= 1) remaining -= hits[static_cast<size_t>(n)];
    out.tail[static_cast<size_t>(n)] = static_cast<double>(remaining) / samples;
  }

  // Linear range: n >= 1 while at least 10 samples remain in the tail.
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    if (out.tail[static_cast<size_t>(n)] * samples < 10.0) break;
    xs.push_back(n);
    ys.push_back(std::log(out.tail[static_cast<size_t>(n)]));
  }
  if (xs.size() < 3) {
    out.degenerate = true;
    out.fit.slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.fit = linear_fit(xs, ys);
  out.fit_from = 1;
  out.fit_to = static_cast<int>(xs.back());
  return out;
}

LacunarityReport nonlacunarity_check(const HyperbolicTimeRecord& record, double tolerance) {
  require(record.times.size() >= 10, ErrorCode::input, "non-lacunarity check needs at least 10 times");
  LacunarityReport r;
  r.tolerance = tolerance;
  for (size_t i = 0; i + 1 < record.times.size(); ++i)
    r.ratios.push_back(static_cast<double>(record.times[i + 1]) / record.times[i]);
  const size_t start = r.ratios.size() / 2;
  for (size_t i = start; i < r.ratios.size(); ++i) r.tail_max = std::max(r.tail_max, r.ratios[i]);
  r.pass = r.tail_max < 1.0 + tolerance;
  return r;
}

DefaultC default_c(const Endomorphism& model, const ConeSpec& cone, uint64_t seed, int pilot_length) {
  require(pilot_length >= 1, ErrorCode::input, "pilot length must be positive");
  RandomStream rng(seed, 0x70696c6f74ull);
  const OrbitLog log = orbit_log(model, cone, lebesgue_sampler(model)(rng), pilot_length);
  double sum = 0.0;
  for (double x : log.a) sum += x;
  DefaultC d;
  d.pilot_length = pilot_length;
  d.pilot_mean = sum / pilot_length;
  if (!(d.pilot_mean < 0.0))
    fail(ErrorCode::degeneracy, "pilot orbit shows no average cone expansion (mean " +
                                    std::to_string(d.pilot_mean) + ")");
  d.c = std::min(0.45 * -d.pilot_mean, -d.pilot_mean / 2.0);
  return d;
}

}  // namespace phlab
