#include <cmath>

#include "doctest.h"
#include "phlab/cone.hpp"
#include "phlab/deviations.hpp"

using namespace phlab;

namespace {

std::vector<int> range(int from, int to, int step) {
  std::vector<int> v;
  for (int n = from; n <= to; n += step) v.push_back(n);
  return v;
}

EmpiricalMeasure flat(int dim, int res) {
  return EmpiricalMeasure(dim, res, std::vector<uint64_t>(static_cast<size_t>(std::pow(res, dim)), 1));
}

const EmpiricalMeasure& derived_srb() {
  static const EmpiricalMeasure m = [] {
    const auto d = builtin_model("derived3");
    SrbOptions o;
    o.samples = 20000;
    o.iterates = 100;
    o.resolution = 16;
    o.seed = 5;
    return empirical_srb(*d, default_cone(*d), default_disk(*d, TorusPoint{0.3, 0.6, 0.1}, 0.05), o);
  }();
  return m;
}

}  // namespace

TEST_CASE("observables") {
  CHECK(builtin_observable("cos_x1", 2).fn(TorusPoint{0.5, 0.1}) == doctest::Approx(-1.0));
  CHECK(builtin_observable("sin_x1", 2).fn(TorusPoint{0.25, 0.1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(builtin_observable("cos_x2", 1), Error);
  CHECK_THROWS_AS(builtin_observable("nope", 2), Error);
}

TEST_CASE("impossible deviations are censored") {
  const auto cat = builtin_model("cat2");
  const auto h = flat(2, 8);
  DeviationOptions o;
  o.samples = 2000;
  const auto curve = deviation_curve(*cat, h, builtin_observable("cos_x1", 2), 2.5, {5, 10, 20}, o);
  CHECK_FALSE(curve.fit_ok);
  for (const auto& r : curve.rows) {
    CHECK(r.censored);
    CHECK(std::isnan(r.log_rate));
    CHECK(r.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 2000)));
  }
}

TEST_CASE("cat map deviations decay exponentially") {
  const auto cat = builtin_model("cat2");
  const auto h = flat(2, 64);
  DeviationOptions o;
  o.samples = 100000;
  o.seed = 1;
  o.threads = 2;
  const auto phi = builtin_observable("cos_x1", 2);
  const auto a = deviation_curve(*cat, h, phi, 0.1, range(50, 500, 50), o);
  REQUIRE(a.fit_ok);
  MESSAGE("slope " << a.fit.slope << " +- " << a.fit.slope_se << " r2 " << a.fit.r2 << " mean " << a.mean);
  CHECK(a.fit.slope + 2.0 * a.fit.slope_se < 0.0);
  CHECK(a.fit.r2 > 0.9);
  CHECK(std::abs(a.mean) < 1e-3);
  CHECK(a.grid_modulus < 2.0 * std::numbers::pi * std::sqrt(2.0) / 64);
  // cos(2 pi (A^j x)_1) are uncorrelated with variance 1/2, so A_n is nearly N(0, 1/(2n)).
  CHECK(a.rows[0].p == doctest::Approx(std::erfc(0.1 * std::sqrt(50.0))).epsilon(0.1));

  o.seed = 2;
  o.threads = 1;
  const auto b = deviation_curve(*cat, h, phi, 0.1, range(50, 500, 50), o);
  CHECK(std::abs(a.fit.slope - b.fit.slope) <= 2.0 * std::hypot(a.fit.slope_se, b.fit.slope_se));

  o.mean = 0.0;
  o.samples = 5000;
  const auto tiny = deviation_curve(*cat, h, phi, 1e-6, range(10, 100, 10), o);
  for (const auto& r : tiny.rows) CHECK(r.p > 0.99);
  CHECK(std::abs(tiny.fit.slope) < 1e-4);
}

TEST_CASE("deviation sampling is thread invariant") {
  const auto cat = builtin_model("cat2");
  const auto h = flat(2, 16);
  DeviationOptions o;
  o.samples = 3000;
  const auto phi = builtin_observable("cos_x1", 2);
  const auto a = deviation_curve(*cat, h, phi, 0.1, {10, 20}, o);
  o.threads = 3;
  const auto b = deviation_curve(*cat, h, phi, 0.1, {10, 20}, o);
  CHECK(a.mean == b.mean);
  CHECK(a.rows[1].hits == b.rows[1].hits);
}

TEST_CASE("tail rates: linear models are censored at the floor") {
  const auto cat = builtin_model("cat2");
  const auto r = e_mu_beta(*cat, default_cone(*cat), flat(2, 16), 0.3, {0.1, 0.5, 1.0}, 50, 2000, 1);
  CHECK(r.jacobian_c == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0));
  for (const auto& e : r.rates) {
    CHECK(e.censored_at_floor);
    CHECK(std::isinf(e.slope));
  }
  CHECK(std::isinf(r.inf_e));
  CHECK(r.proxy_bound == doctest::Approx(0.1));
}

TEST_CASE("tail rates of the derived model") {
  const auto d = builtin_model("derived3");
  const ConeSpec cone = default_cone(*d);
  const double c = default_c(*d, cone, 1).c;
  const std::vector<double> betas{0.1, 0.2, 0.4};
  const auto r = e_mu_beta(*d, cone, derived_srb(), c, betas, 30, 1000000, 3);
  REQUIRE_FALSE(r.tail.degenerate);
  const double scale = 1.0 / (2.0 * std::log(r.jacobian_c));
  MESSAGE("tail slope " << r.tail.fit.slope << " C " << r.jacobian_c);
  for (size_t i = 0; i < r.rates.size(); ++i) {
    const auto& e = r.rates[i];
    MESSAGE("beta " << e.beta << " E " << e.slope << " +- " << e.slope_se << " points " << e.points);
    REQUIRE(e.fit_ok);
    CHECK(e.slope < 0.0);
    if (i > 0) CHECK(e.slope <= r.rates[i - 1].slope + 2.0 * std::hypot(e.slope_se, r.rates[i - 1].slope_se));
    // E(beta) / beta against the tail exponent times 1 / (2 log C).
    const double expected = r.tail.fit.slope * scale;
    CHECK(std::abs(e.slope / e.beta - expected) <=
          3.0 * std::hypot(e.slope_se / e.beta, r.tail.fit.slope_se * scale) + 0.25 * std::abs(expected));
  }
}

TEST_CASE("Pesin defect vanishes for linear models") {
  for (const char* name : {"cat2", "paper3"}) {
    const auto m = builtin_model(name);
    const auto res = pesin_defect(*m, default_cone(*m), flat(m->dim(), 8), 300, 100, 7);
    MESSAGE(std::string(name) << " gamma integral " << res.gamma_integral << " entropy " << res.entropy);
    CHECK(res.entropy_available);
    CHECK(std::abs(res.defect) < 1e-2);
  }
  const auto d = builtin_model("derived3");
  const auto res = pesin_defect(*d, default_cone(*d), derived_srb(), 200, 20, 7);
  CHECK_FALSE(res.entropy_available);
  CHECK(std::isnan(res.defect));
  CHECK(res.gamma_integral > 0.0);
}
