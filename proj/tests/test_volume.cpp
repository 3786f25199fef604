#include <cmath>
#include <numbers>

#include "doctest.h"
#include "phlab/volume.hpp"

using namespace phlab;

namespace {

double golden() { return (3.0 + std::sqrt(5.0)) / 2.0; }

}  // namespace

TEST_CASE("ball volumes") {
  const auto cat = builtin_model("cat2");
  const ConeSpec s = default_cone(*cat);
  CHECK(metric_ball_volume(s, BallMetric::adapted, 0.05) == doctest::Approx(0.01));
  CHECK(metric_ball_volume(s, BallMetric::euclidean, 0.05) == doctest::Approx(std::numbers::pi * 0.0025));
  const auto p3 = builtin_model("paper3");
  const ConeSpec s3 = default_cone(*p3);
  CHECK(metric_ball_volume(s3, BallMetric::adapted, 0.1) == doctest::Approx(2.0 * std::numbers::pi * 1e-3));
  CHECK(metric_ball_volume(s3, BallMetric::euclidean, 0.1) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 1e-3));
}

TEST_CASE("cat dynamic balls: closed form in the adapted metric") {
  const auto cat = builtin_model("cat2");
  const ConeSpec s = default_cone(*cat);
  const TorusPoint x{0.31, 0.47};
  DynBallOptions o;
  o.eps = 0.05;
  o.samples = 20000;
  for (int n : {0, 1, 3, 6, 10}) {
    const double exact = 4.0 * o.eps * o.eps * std::pow(golden(), -n);
    const auto cov = dynball_lebesgue_cov(*cat, s, x, n, o);
    CHECK(cov.valid);
    CHECK(cov.value == doctest::Approx(exact).epsilon(1e-9));
    CHECK(cov.excluded == 0);
    if (n <= 6) {
      const auto rej = dynball_lebesgue_rejection(*cat, s, x, n, o);
      CHECK(std::abs(rej.value - exact) <= 4.0 * rej.stderr_ + 1e-15);
    }
  }
}

TEST_CASE("cov and rejection agree in both metrics") {
  for (const char* name : {"cat2", "paper3", "derived3"}) {
    const auto m = builtin_model(name);
    const ConeSpec s = default_cone(*m);
    const TorusPoint x = m->dim() == 2 ? TorusPoint{0.2, 0.7} : TorusPoint{0.01, 0.02, 0.015};
    for (BallMetric metric : {BallMetric::adapted, BallMetric::euclidean}) {
      DynBallOptions o;
      o.metric = metric;
      o.eps = 0.05;
      o.samples = 200000;
      o.seed = 9;
      double prev = std::numeric_limits<double>::infinity();
      for (int n : m->dim() == 2 ? std::vector<int>{0, 2, 4, 6, 8} : std::vector<int>{0, 2, 4}) {
        const auto cov = dynball_lebesgue_cov(*m, s, x, n, o);
        const auto rej = dynball_lebesgue_rejection(*m, s, x, n, o);
        INFO(std::string(name) << " " << std::string(to_string(metric)) << " n=" << n << " cov " << cov.value << "+-" << cov.stderr_
                  << " rej " << rej.value << "+-" << rej.stderr_);
        REQUIRE(rej.accepted > 50);
        CHECK(cov.valid);
        CHECK(std::abs(cov.value - rej.value) <= 4.0 * std::hypot(cov.stderr_, rej.stderr_));
        if (n == 0) CHECK(rej.value == doctest::Approx(metric_ball_volume(s, metric, o.eps)));
        CHECK(cov.value <= prev * (1.0 + 1e-9) + 4.0 * cov.stderr_);
        prev = cov.value;
      }
    }
  }
}

TEST_CASE("rejection reports an upper bound when nothing survives") {
  const auto cat = builtin_model("cat2");
  const ConeSpec s = default_cone(*cat);
  DynBallOptions o;
  o.samples = 1000;
  const auto r = dynball_lebesgue_rejection(*cat, s, TorusPoint{0.5, 0.5}, 25, o);
  CHECK(r.accepted == 0);
  CHECK(r.lower_bound_only);
  CHECK_FALSE(r.valid);
  CHECK(r.upper_bound == doctest::Approx(0.01 * (1.0 - std::pow(0.025, 1e-3))).epsilon(1e-9));
}

TEST_CASE("SRB-weighted balls reduce to Lebesgue for a flat histogram") {
  const auto cat = builtin_model("cat2");
  const ConeSpec s = default_cone(*cat);
  const EmpiricalMeasure flat(2, 16, std::vector<uint64_t>(256, 1));
  DynBallOptions o;
  o.samples = 20000;
  const auto leb = dynball_lebesgue_cov(*cat, s, TorusPoint{0.3, 0.4}, 5, o);
  o.density = &flat;
  const auto srb = dynball_lebesgue_cov(*cat, s, TorusPoint{0.3, 0.4}, 5, o);
  CHECK(srb.value == doctest::Approx(leb.value).epsilon(1e-9));
  CHECK(srb.stderr_ > leb.stderr_);
  const auto rej = dynball_lebesgue_rejection(*cat, s, TorusPoint{0.3, 0.4}, 5, o);
  CHECK(std::abs(rej.value - srb.value) <= 4.0 * rej.stderr_);
}

TEST_CASE("estimators are thread invariant") {
  const auto m = builtin_model("derived3");
  const ConeSpec s = default_cone(*m);
  DynBallOptions o;
  o.samples = 20000;
  const TorusPoint x{0.02, 0.01, 0.0};
  const auto a = dynball_lebesgue_cov(*m, s, x, 4, o);
  const auto r = dynball_lebesgue_rejection(*m, s, x, 4, o);
  o.threads = 3;
  CHECK(dynball_lebesgue_cov(*m, s, x, 4, o).value == a.value);
  CHECK(dynball_lebesgue_rejection(*m, s, x, 4, o).value == r.value);
}

TEST_CASE("volume lemma curves") {
  const auto cat = builtin_model("cat2");
  const ConeSpec s = default_cone(*cat);
  CurveOptions o;
  o.ball.samples = 20000;
  o.c = 0.3;
  const TorusPoint x{0.31, 0.47};
  std::vector<int> ns;
  for (int n = 2; n <= 20; ++n) ns.push_back(n);
  const auto curve = volume_lemma_curve(*cat, s, x, Subspace(s.center()), ns, o);
  CHECK(curve.pass);
  CHECK(curve.pairwise_consistent);
  for (const auto& p : curve.points) CHECK(p.ratio == doctest::Approx(0.01).epsilon(1e-6));

  // Tilted F1 changes the ratio by at most K0.
  RandomStream rng(4, 0);
  const Subspace f2 = random_cone_subspace(s, rng);
  const auto tilted = volume_lemma_curve(*cat, s, x, f2, ns, o);
  for (size_t i = 0; i < ns.size(); ++i) {
    const double q = tilted.points[i].ratio / curve.points[i].ratio;
    CHECK(q <= std::exp(distortion_envelope(*cat, s, 50, 20).max_log_ratio) * (1.0 + 1e-9));
  }

  CHECK_THROWS_AS(volume_lemma_curve(*cat, s, x, Subspace(s.stable()), ns, o), Error);
  o.c = 0.99;
  CHECK_THROWS_AS(volume_lemma_curve(*cat, s, x, Subspace(s.center()), ns, o), Error);
}

TEST_CASE("derived volume lemma curve is bounded at hyperbolic times") {
  const auto m = builtin_model("derived3");
  const ConeSpec s = default_cone(*m);
  const TorusPoint x{0.013, 0.021, 0.008};
  const double c = default_c(*m, s, 1).c;
  const auto rec = detect_hyperbolic_times(orbit_log(*m, s, x, 40), c);
  REQUIRE(rec.times.size() >= 3);
  std::vector<int> ns;
  for (int t : rec.times)
    if (t <= 12) ns.push_back(t);
  REQUIRE(ns.size() >= 2);
  CurveOptions o;
  o.ball.samples = 50000;
  o.c = c;
  const auto curve = volume_lemma_curve(*m, s, x, Subspace(s.center()), ns, o);
  MESSAGE("derived curve max/min " << curve.max_over_min << " slope " << curve.trend.slope << " +- "
                                   << curve.trend.slope_se);
  CHECK(curve.bounded);
  CHECK(curve.all_valid);
}

TEST_CASE("jacobian constant and weak Gibbs sequences") {
  CHECK(jacobian_constant(*builtin_model("cat2")) == doctest::Approx(golden()));
  const auto p3 = builtin_model("paper3");
  CHECK(jacobian_constant(*p3) == doctest::Approx(golden() / 2.0));
  const double cd = jacobian_constant(*builtin_model("derived3"));
  MESSAGE("derived C = " << cd);
  CHECK(cd > 1.0);
  CHECK(cd <= golden() / 2.0 + 1e-12);

  // Every time hyperbolic: (1/n) log K_n = log(K2)/n -> 0.
  std::vector<int> all;
  for (int i = 1; i <= 1000; ++i) all.push_back(i);
  const auto lin = weak_gibbs_sequence(make_record(all, 0.1, 1000), 1000, 2.0, 1.3);
  CHECK(lin[1000] == doctest::Approx(std::log(2.0) / 1000));

  // Lacunar times 2^i: the exponent stays away from zero.
  std::vector<int> lac;
  for (int t = 1; t <= 1000; t *= 2) lac.push_back(t);
  const auto bad = weak_gibbs_sequence(make_record(lac, 0.1, 1000), 1000, 2.0, 1.3);
  CHECK(bad[1000] > 0.01);
  double peak = 0.0;
  for (int n = 500; n <= 1000; ++n) peak = std::max(peak, bad[static_cast<size_t>(n)]);
  CHECK(peak > 0.1);
  CHECK_THROWS_AS(weak_gibbs_sequence(make_record({}, 0.1, 10), 10, 2.0, 1.3), Error);
}
