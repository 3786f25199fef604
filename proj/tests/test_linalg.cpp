#include <cmath>

#include "doctest.h"
#include "phlab/linalg.hpp"
#include "phlab/rng.hpp"
#include "phlab/torus.hpp"

using namespace phlab;

namespace {

Matrix random_matrix(RandomStream& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// sqrt(det(B^T M^T M B)) by explicit Gram matrix, independent of the QR path.
double gram_oracle(const Matrix& m, const Matrix& b) {
  const Matrix img = m * b;
  return std::sqrt(std::abs(determinant(img.transpose() * img)));
}

}  // namespace

TEST_CASE("philox known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random streams are reproducible and distinct") {
  RandomStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RandomStream u(1, 0);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) s += u.uniform();
  CHECK(std::abs(s / 100000 - 0.5) < 0.005);
}

TEST_CASE("determinant and inverse") {
  CHECK(determinant(Matrix{{2, 0}, {0, 3}}) == 6.0);
  const Matrix a{{2, 1, 0}, {1, 1, 0}, {0, 0, 2}};
  CHECK(determinant(a) == doctest::Approx(2.0));
  const Matrix p = a * inverse(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(p(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  CHECK_THROWS_AS(inverse(Matrix{{1, 2}, {2, 4}}), Error);

  RandomStream rng(11, 0);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = random_matrix(rng, 4, 4);
    const Matrix q = m * inverse(m);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(q(i, j) - (i == j)) < 1e-9);
  }
}

TEST_CASE("symmetric eigen and singular values") {
  const SymmetricEigen e = symmetric_eigen(Matrix{{2, 1}, {1, 1}});
  CHECK(e.values[0] == doctest::Approx((3 - std::sqrt(5.0)) / 2));
  CHECK(e.values[1] == doctest::Approx((3 + std::sqrt(5.0)) / 2));
  RandomStream rng(5, 0);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = random_matrix(rng, 3, 3);
    const Matrix s = m.transpose() * m;
    const SymmetricEigen se = symmetric_eigen(s);
    for (int k = 0; k < 3; ++k) {
      const Vector v = se.vectors.column(k);
      const Vector r = s * v - se.values[k] * v;
      CHECK(r.norm() < 1e-10 * (1 + std::abs(se.values[k])));
    }
    CHECK(symmetric_min_eigenvalue(s) == doctest::Approx(se.values[0]).epsilon(1e-10));
    const Vector sv = singular_values(m);
    CHECK(sv[0] * sv[1] * sv[2] == doctest::Approx(std::abs(determinant(m))).epsilon(1e-9));
  }
}

TEST_CASE("torus distance") {
  CHECK(torus_distance(TorusPoint{0.3, 0.7}, TorusPoint{0.3, 0.7}) == 0.0);
  CHECK(torus_distance(TorusPoint{0.0, 0.0}, TorusPoint{0.9, 0.0}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(torus_distance(TorusPoint{0.1}, TorusPoint{0.1, 0.2}), Error);
  CHECK(TorusPoint{1.0, -0.25}[0] == 0.0);
  CHECK(TorusPoint{1.0, -0.25}[1] == 0.75);

  RandomStream rng(3, 0);
  for (int t = 0; t < 2000; ++t) {
    const TorusPoint p{rng.uniform(), rng.uniform(), rng.uniform()};
    const TorusPoint q{rng.uniform(), rng.uniform(), rng.uniform()};
    double best = 1e9;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          const double dx = q[0] + i - p[0], dy = q[1] + j - p[1], dz = q[2] + k - p[2];
          best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    const double d = torus_distance(p, q);
    CHECK(std::abs(d - best) < 1e-15);
    CHECK(d == torus_distance(q, p));
    CHECK(d <= std::sqrt(3.0) / 2);
    const TorusPoint r{rng.uniform(), rng.uniform(), rng.uniform()};
    CHECK(torus_distance(p, r) <= d + torus_distance(q, r) + 1e-15);
  }
}

TEST_CASE("subspace validation") {
  CHECK_THROWS_AS(Subspace(Matrix{{1, 0}, {0, 1.001}}), Error);
  const Subspace s = Subspace::orthonormalized(Matrix{{1, 1}, {0, 1}, {0, 0}});
  CHECK(orthonormality_defect(s.basis()) < 1e-14);
}

TEST_CASE("wedge determinant") {
  const Subspace full(Matrix::identity(2));
  CHECK(wedge_determinant(Matrix{{2, 0}, {0, 3}}, full) == doctest::Approx(6.0));

  RandomStream rng(9, 0);
  for (int t = 0; t < 500; ++t) {
    const Matrix m1 = random_matrix(rng, 3, 3), m2 = random_matrix(rng, 3, 3);
    const Subspace f = Subspace::orthonormalized(random_matrix(rng, 3, 2));
    CHECK(wedge_determinant(Matrix::identity(3), f) == doctest::Approx(1.0).epsilon(1e-14));
    const double w = wedge_determinant(m1, f);
    CHECK(std::abs(w - gram_oracle(m1, f.basis())) <= 1e-12 * std::max(1.0, w));

    // Another orthonormal basis of the same plane.
    const double ang = rng.uniform(0, 6.28);
    const Matrix rot{{std::cos(ang), -std::sin(ang)}, {std::sin(ang), std::cos(ang)}};
    const Subspace g(f.basis() * rot);
    CHECK(std::abs(wedge_determinant(m1, g) - w) <= 1e-10 * std::max(1.0, w));

    const Subspace image = Subspace::orthonormalized(m1 * f.basis());
    const double lhs = wedge_determinant(m2 * m1, f);
    const double rhs = wedge_determinant(m2, image) * w;
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, lhs));
  }
}
