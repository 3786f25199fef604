#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "phlab/cone.hpp"

using namespace phlab;

namespace {

// min of v^T G v / |v|^2 over a dense grid of the cone: v = F c + a t S, c on the unit sphere of F,
// |t| <= 1. Only for d* <= 3 with a one-dimensional stable direction.
double dense_cone_min(const Matrix& g, const ConeSpec& cone, int grid) {
  const int d = cone.center_dim();
  double best = 1e300;
  const auto eval = [&](const Vector& c, double t) {
    Vector v = cone.center() * c + (cone.width() * t) * cone.stable().column(0);
    best = std::min(best, v.dot(g * v) / v.squared_norm());
  };
  for (int i = 0; i <= grid; ++i) {
    const double t = -1.0 + 2.0 * i / grid;
    if (d == 1) {
      eval(Vector{1.0}, t);
    } else {
      for (int k = 0; k < grid; ++k) {
        const double phi = std::numbers::pi * k / grid;
        eval(Vector{std::cos(phi), std::sin(phi)}, t);
      }
    }
  }
  return best;
}

Matrix random_matrix(RandomStream& rng, int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("cone membership and quadratic form") {
  const ConeSpec c(Matrix{{0}, {1}}, Matrix{{1}, {0}}, 0.5);
  CHECK(c.contains(Vector{1, 0.5}));
  CHECK(c.contains(Vector{-1, -0.4}));
  CHECK_FALSE(c.contains(Vector{1, 0.6}));
  const Vector v{2, 0.3};
  CHECK(v.dot(c.quadratic_form() * v) == doctest::Approx(0.25 * 4 - 0.09));
  CHECK_THROWS_AS(ConeSpec(Matrix{{1}, {0}}, Matrix{{1}, {0}}, 0.1), Error);
  CHECK_THROWS_AS(ConeSpec(Matrix{{0}, {1}}, Matrix{{1}, {0}}, -0.1), Error);
}

TEST_CASE("cone extremum agrees with dense sampling") {
  RandomStream rng(31, 0);
  for (int t = 0; t < 40; ++t) {
    const int n = t % 2 ? 3 : 2;
    const Subspace all = Subspace::orthonormalized(random_matrix(rng, n));
    Matrix s(n, 1), f(n, n - 1);
    for (int i = 0; i < n; ++i) {
      s(i, 0) = all.basis()(i, 0);
      for (int j = 1; j < n; ++j) f(i, j - 1) = all.basis()(i, j);
    }
    const ConeSpec cone(s, f, rng.uniform(0.05, 0.8));
    const Matrix m = random_matrix(rng, n);
    const Matrix g = m.transpose() * m;
    const double exact = cone_min_rayleigh(g, cone).value;
    const double dense = dense_cone_min(g, cone, n == 2 ? 200000 : 600);
    CHECK(exact <= dense + 1e-12 * std::max(1.0, std::abs(dense)));
    CHECK(dense - exact <= (n == 2 ? 1e-9 : 1e-4) * std::max(1.0, std::abs(dense)));
  }
}

TEST_CASE("restricted inverse norm") {
  const Matrix diag{{0.5, 0}, {0, 3}};
  const ConeSpec zero(Matrix{{1}, {0}}, Matrix{{0}, {1}}, 0.0);
  CHECK(restricted_inverse_norm(diag, zero) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  const double small = restricted_inverse_norm(diag, zero.with_width(0.01));
  CHECK(small > 1.0 / 3);
  CHECK(small < 1.0 / 3 * 1.001);

  const auto cat = builtin_model("cat2");
  const ConeSpec cone = default_cone(*cat, 0.1);
  const double r = restricted_inverse_norm(*cat, TorusPoint{0.1, 0.2}, cone);
  CHECK(r > 1.0 / 2.618);
  CHECK(r < 1.0);
  const Matrix a = cat->derivative(TorusPoint{0, 0});
  const Vector u = cone.center().column(0), s = cone.stable().column(0);
  double oracle = 0.0;
  const int grid = 1000000;
  for (int i = 0; i <= grid; ++i) {
    const Vector v = u + (0.1 * (-1.0 + 2.0 * i / grid)) * s;
    oracle = std::max(oracle, v.norm() / (a * v).norm());
  }
  CHECK(std::abs(r - oracle) < 1e-6);
  CHECK(restricted_inverse_norm(*cat, TorusPoint{0.7, 0.9}, cone) == r);
}

TEST_CASE("graph representation and theta") {
  const ConeSpec split(Matrix{{0}, {1}}, Matrix{{1}, {0}}, 0.5);
  const Subspace f1(Matrix{{1}, {0}});
  const Subspace f2 = Subspace::orthonormalized(Matrix{{1}, {0.3}});
  const auto g = graph_representation(f2, f1, split);
  CHECK(g.l(0, 0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(theta_distance(f1, f2, split, ThetaMetric::euclidean) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(theta_distance(f2, f1, split, ThetaMetric::euclidean) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(graph_representation(f1, f2, split).l(0, 0) == doctest::Approx(-0.3 / std::sqrt(1.09)).epsilon(1e-14));
  CHECK(theta_distance(f1, f2, split) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(theta_distance(f1, f1, split) == 0.0);
  CHECK_THROWS_AS(theta_distance(f1, Subspace(Matrix{{0}, {1}}), split), Error);

  const auto p3 = builtin_model("paper3");
  const ConeSpec cone = default_cone(*p3, 0.3);
  RandomStream rng(32, 0);
  for (int t = 0; t < 1000; ++t) {
    const Subspace a = random_cone_subspace(cone, rng), b = random_cone_subspace(cone, rng);
    const Subspace back = subspace_from_graph(graph_representation(b, a, cone), cone);
    const Matrix p = back.basis() * back.basis().transpose() - b.basis() * b.basis().transpose();
    CHECK(p.frobenius_norm() < 1e-10);
    for (auto metric : {ThetaMetric::adapted, ThetaMetric::euclidean}) {
      CHECK(theta_distance(a, b, cone, metric) == theta_distance(b, a, cone, metric));
    }
    // With an orthogonal splitting the euclidean value never exceeds the adapted one.
    CHECK(theta_distance(a, b, cone, ThetaMetric::euclidean) <= theta_distance(a, b, cone) + 1e-15);
  }
}

TEST_CASE("cone invariance check") {
  const auto cat = builtin_model("cat2");
  const ConeSpec cone = default_cone(*cat, 0.1);
  const auto rep = cone_invariance_check(*cat, cone, 100);
  CHECK(rep.pass);
  // Exact margin for the linear map: min over the cone boundary of a^2|lu v_c|^2 - |ls v_s|^2.
  const double lu = (3 + std::sqrt(5.0)) / 2, ls = 1 / lu;
  CHECK(rep.min_margin == doctest::Approx(0.01 * (lu * lu - ls * ls) / 1.01).epsilon(1e-9));

  const ConeSpec wrong(cat->center_basis(), cat->stable_basis(), 0.1);
  CHECK_FALSE(cone_invariance_check(*cat, wrong, 10).pass);

  const auto g = builtin_model("derived3");
  CHECK(cone_invariance_check(*g, default_cone(*g, 0.1), 100000).pass);
}

TEST_CASE("theta contraction for linear models") {
  for (const char* name : {"cat2", "paper3"}) {
    const auto m = builtin_model(name);
    const auto& lin = dynamic_cast<const LinearAnosov&>(*m);
    const double kappa = lin.eigen().stable_max / lin.eigen().unstable_min;
    const ConeSpec cone = default_cone(*m, 0.1);
    RandomStream rng(33, 0);
    double worst_adapted = 0.0, worst_euclid = 0.0;
    for (int p = 0; p < 1000; ++p) {
      const TorusPoint x = sample_point(*m, rng, false);
      const Subspace f1 = random_cone_subspace(cone, rng), f2 = random_cone_subspace(cone, rng);
      const auto th = theta_contraction_factor(*m, x, f1, f2, 30, cone);
      const auto te = theta_contraction_factor(*m, x, f1, f2, 30, cone, ThetaMetric::euclidean);
      for (int i = 0; i <= 30; ++i) {
        worst_adapted = std::max(worst_adapted, th[i] - std::pow(kappa, i) * th[0]);
        worst_euclid = std::max(worst_euclid, te[i] - std::pow(kappa, i) * te[0]);
      }
    }
    CHECK(worst_adapted <= 1e-9);
    MESSAGE(std::string(name) << ": largest euclidean excess over kappa^i theta_0 = " << worst_euclid);
  }
}

TEST_CASE("determinant distortion bounds") {
  const auto p3 = builtin_model("paper3");
  const ConeSpec cone = default_cone(*p3, 0.1);
  RandomStream rng(34, 0);
  const int d = 2;
  const double q = d * d - 1;
  int tested = 0;
  for (int p = 0; p < 1000; ++p) {
    const TorusPoint x = sample_point(*p3, rng, false);
    const Subspace f1 = random_cone_subspace(cone, rng), f2 = random_cone_subspace(cone, rng);
    const double th = theta_distance(f1, f2, cone);
    if (th >= 1.0 / q) continue;
    ++tested;
    for (int n = 1; n <= 30; ++n) {
      const double r = det_distortion_ratio(*p3, x, f1, f2, n);
      CHECK(std::abs(r - 1) <= 2 * q * th / (1 - q * th) + 1e-9);
    }
    CHECK(det_distortion_ratio(*p3, x, f1, f1, 5) == 1.0);
  }
  CHECK(tested == 1000);

  const auto cat = builtin_model("cat2");
  const ConeSpec c2 = default_cone(*cat, 0.3);
  for (int p = 0; p < 300; ++p) {
    const TorusPoint x = sample_point(*cat, rng, false);
    const Subspace f1 = random_cone_subspace(c2, rng), f2 = random_cone_subspace(c2, rng);
    const auto th = theta_contraction_factor(*cat, x, f1, f2, 20, c2, ThetaMetric::euclidean);
    for (int n = 1; n <= 20; ++n) {
      const double r = det_distortion_ratio(*cat, x, f1, f2, n);
      CHECK(r <= (1 + th[n]) / (1 - th[0]) + 1e-12);
      CHECK(r >= (1 - th[n]) / (1 + th[0]) - 1e-12);
    }
  }
}

TEST_CASE("derived model domination and theta decay") {
  const auto g = builtin_model("derived3");
  const ConeSpec cone = default_cone(*g, 0.1);
  const auto dom = domination_constant(*g, cone, 20000);
  CHECK(dom.lambda > 0.0);
  CHECK(dom.lambda < 1.0);
  MESSAGE("measured domination constant " << dom.lambda);
  RandomStream rng(35, 0);
  double worst = 0.0;
  for (int p = 0; p < 1000; ++p) {
    const TorusPoint x = sample_point(*g, rng, p % 2 == 1);
    const Subspace f1 = random_cone_subspace(cone, rng), f2 = random_cone_subspace(cone, rng);
    const auto th = theta_contraction_factor(*g, x, f1, f2, 20, cone);
    for (int i = 0; i <= 20; ++i) worst = std::max(worst, th[i] - std::pow(dom.lambda, i) * th[0]);
  }
  MESSAGE("derived: largest excess over lambda^i theta_0 = " << worst);
  CHECK(worst <= 1e-9);

  const auto env = distortion_envelope(*g, cone, 2000, 50);
  CHECK(std::isfinite(env.k0));
  MESSAGE("derived K0 envelope " << env.k0);
}
