#include "phlab/linalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <utility>

namespace phlab {

Vector::Vector(std::initializer_list<double> values) : n_(static_cast<int>(values.size())) {
  require(n_ <= kMaxDim, ErrorCode::input, "vector dimension out of range");
  std::copy(values.begin(), values.end(), a_.begin());
}

Vector Vector::from_span(std::span<const double> values) {
  Vector v(static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), v.a_.begin());
  return v;
}

double Vector::norm() const noexcept {
  // Scaled accumulation keeps tiny/huge tangent vectors finite.
  double scale = 0.0;
  for (int i = 0; i < n_; ++i) scale = std::max(scale, std::abs(a_[i]));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double t = a_[i] / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : r_(static_cast<int>(rows.size())), c_(rows.size() ? static_cast<int>(rows.begin()->size()) : 0) {
  require(r_ <= kMaxDim && c_ <= kMaxDim, ErrorCode::input, "matrix shape out of range");
  int i = 0;
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == c_, ErrorCode::input, "ragged matrix literal");
    int j = 0;
    for (double x : row) (*this)(i, j++) = x;
    ++i;
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (int i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_columns(std::span<const Vector> cols) {
  require(!cols.empty(), ErrorCode::input, "no columns");
  Matrix m(cols[0].size(), static_cast<int>(cols.size()));
  for (int j = 0; j < m.c_; ++j) {
    require(cols[static_cast<size_t>(j)].size() == m.r_, ErrorCode::input, "column length mismatch");
    m.set_column(j, cols[static_cast<size_t>(j)]);
  }
  return m;
}

Matrix Matrix::from_row_major(int rows, int cols, std::span<const double> values) {
  require(static_cast<int>(values.size()) == rows * cols, ErrorCode::input, "matrix data size mismatch");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = values[static_cast<size_t>(i * cols + j)];
  return m;
}

Vector Matrix::column(int j) const noexcept {
  Vector v(r_);
  for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
  return v;
}

Vector Matrix::row(int i) const noexcept {
  Vector v(c_);
  for (int j = 0; j < c_; ++j) v[j] = (*this)(i, j);
  return v;
}

void Matrix::set_column(int j, const Vector& v) noexcept {
  for (int i = 0; i < r_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transpose() const noexcept {
  Matrix t(c_, r_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(int row0, int col0, int rows, int cols) const {
  require(row0 >= 0 && col0 >= 0 && row0 + rows <= r_ && col0 + cols <= c_, ErrorCode::input,
          "block out of range");
  Matrix b(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
  return b;
}

double Matrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.c_ == b.r_, ErrorCode::input, "matrix product shape mismatch");
  Matrix p(a.r_, b.c_);
  for (int i = 0; i < a.r_; ++i)
    for (int j = 0; j < b.c_; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.c_; ++k) s += a(i, k) * b(k, j);
      p(i, j) = s;
    }
  return p;
}

Vector operator*(const Matrix& a, const Vector& v) {
  require(a.c_ == v.size(), ErrorCode::input, "matrix-vector shape mismatch");
  Vector out(a.r_);
  for (int i = 0; i < a.r_; ++i) {
    double s = 0.0;
    for (int k = 0; k < a.c_; ++k) s += a(i, k) * v[k];
    out[i] = s;
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.r_ == b.r_ && a.c_ == b.c_, ErrorCode::input, "matrix sum shape mismatch");
  Matrix s = a;
  for (size_t k = 0; k < s.a_.size(); ++k) s.a_[k] += b.a_[k];
  return s;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.r_ == b.r_ && a.c_ == b.c_, ErrorCode::input, "matrix difference shape mismatch");
  Matrix s = a;
  for (size_t k = 0; k < s.a_.size(); ++k) s.a_[k] -= b.a_[k];
  return s;
}

Matrix operator*(double s, Matrix a) noexcept {
  for (auto& x : a.a_) x *= s;
  return a;
}

bool operator==(const Matrix& a, const Matrix& b) noexcept {
  if (a.r_ != b.r_ || a.c_ != b.c_) return false;
  for (int i = 0; i < a.r_; ++i)
    for (int j = 0; j < a.c_; ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorCode::input, "hstack row mismatch");
  Matrix m(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) m(i, a.cols() + j) = b(i, j);
  }
  return m;
}

namespace {

double det3(const Matrix& m, int r0, int r1, int r2, int c0, int c1, int c2) {
  return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
         m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
         m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
}

}  // namespace

double determinant(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::input, "determinant of non-square matrix");
  switch (m.rows()) {
    case 0:
      return 1.0;
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return det3(m, 0, 1, 2, 0, 1, 2);
    default: {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) {
        int cols[3];
        for (int k = 0, t = 0; k < 4; ++k)
          if (k != j) cols[t++] = k;
        const double minor = det3(m, 1, 2, 3, cols[0], cols[1], cols[2]);
        s += ((j % 2) ? -1.0 : 1.0) * m(0, j) * minor;
      }
      return s;
    }
  }
}

Matrix inverse(const Matrix& m, double tiny) {
  require(m.rows() == m.cols(), ErrorCode::input, "inverse of non-square matrix");
  const int n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (!(std::abs(a(piv, col)) > tiny)) fail(ErrorCode::singularity, "matrix is singular");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    const double d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

Vector solve(const Matrix& m, const Vector& b) { return inverse(m) * b; }

SymmetricEigen symmetric_eigen(const Matrix& s) {
  require(s.rows() == s.cols(), ErrorCode::input, "eigenproblem of non-square matrix");
  const int n = s.rows();
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off <= 1e-34 * diag || off == 0.0) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
  }

  std::array<int, kMaxDim> order{};
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.begin() + n, [&](int x, int y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<size_t>(k)];
    out.values[k] = a(src, src);
    out.vectors.set_column(k, v.column(src));
  }
  return out;
}

double symmetric_min_eigenvalue(const Matrix& s) {
  if (s.rows() == 1) return s(0, 0);
  if (s.rows() == 2) {
    const double a = s(0, 0), d = s(1, 1), b = 0.5 * (s(0, 1) + s(1, 0));
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), b);
    // Stable form of the smaller root.
    const double hi = mean + rad;
    const double prod = a * d - b * b;
    if (mean > 0 && hi != 0.0) return prod / hi;
    return mean - rad;
  }
  return symmetric_eigen(s).values[0];
}

Vector singular_values(const Matrix& m) {
  const Matrix g = m.transpose() * m;
  const SymmetricEigen e = symmetric_eigen(g);
  const int n = g.rows();
  Vector out(n);
  for (int k = 0; k < n; ++k) out[k] = std::sqrt(std::max(0.0, e.values[n - 1 - k]));
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.cols() == 1) return m.column(0).norm();
  if (m.rows() == 1) return m.row(0).norm();
  return singular_values(m)[0];
}

QrResult thin_qr(const Matrix& a) {
  const int n = a.rows(), k = a.cols();
  QrResult out{Matrix(n, k), Vector(k)};
  for (int j = 0; j < k; ++j) {
    Vector v = a.column(j);
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) {
        const Vector qi = out.q.column(i);
        v -= qi.dot(v) * qi;
      }
    const double r = v.norm();
    if (!(r > 1e-13 * original) || !(r > 0.0) || !std::isfinite(r))
      fail(ErrorCode::singularity, "columns are linearly dependent");
    out.r_diag[j] = r;
    out.q.set_column(j, v * (1.0 / r));
  }
  return out;
}

double orthonormality_defect(const Matrix& q) noexcept {
  double worst = 0.0;
  for (int i = 0; i < q.cols(); ++i)
    for (int j = i; j < q.cols(); ++j) {
      double s = 0.0;
      for (int r = 0; r < q.rows(); ++r) s += q(r, i) * q(r, j);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace phlab
