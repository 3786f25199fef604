#pragma once

// Fixed-capacity dense linear algebra for ambient dimensions 1..4.
// Everything lives on the stack; the hot loops of the orbit code never allocate.

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>

#include "phlab/error.hpp"

namespace phlab {

inline constexpr int kMaxDim = 4;

class Vector {
 public:
  Vector() = default;
  explicit Vector(int n) : n_(n) {
    require(n >= 0 && n <= kMaxDim, ErrorCode::input, "vector dimension out of range");
  }
  Vector(std::initializer_list<double> values);

  static Vector from_span(std::span<const double> values);
  static Vector unit(int n, int i) {
    Vector v(n);
    v[i] = 1.0;
    return v;
  }

  int size() const noexcept { return n_; }
  double& operator[](int i) noexcept { return a_[static_cast<size_t>(i)]; }
  double operator[](int i) const noexcept { return a_[static_cast<size_t>(i)]; }
  std::span<const double> values() const noexcept { return {a_.data(), static_cast<size_t>(n_)}; }
  double* data() noexcept { return a_.data(); }
  const double* data() const noexcept { return a_.data(); }

  double dot(const Vector& o) const noexcept {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += a_[i] * o.a_[i];
    return s;
  }
  double squared_norm() const noexcept { return dot(*this); }
  double norm() const noexcept;

  Vector& operator+=(const Vector& o) noexcept {
    for (int i = 0; i < n_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) noexcept {
    for (int i = 0; i < n_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Vector& operator*=(double s) noexcept {
    for (int i = 0; i < n_; ++i) a_[i] *= s;
    return *this;
  }
  friend Vector operator+(Vector a, const Vector& b) noexcept { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) noexcept { return a -= b; }
  friend Vector operator*(Vector a, double s) noexcept { return a *= s; }
  friend Vector operator*(double s, Vector a) noexcept { return a *= s; }
  friend Vector operator-(Vector a) noexcept { return a *= -1.0; }
  friend bool operator==(const Vector& a, const Vector& b) noexcept {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.a_[i] != b.a_[i]) return false;
    return true;
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim> a_{};
};

// Row-major dense matrix with at most 4 rows and 4 columns.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : r_(rows), c_(cols) {
    require(rows >= 0 && rows <= kMaxDim && cols >= 0 && cols <= kMaxDim, ErrorCode::input,
            "matrix shape out of range");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);
  static Matrix diagonal(const Vector& d);
  static Matrix from_columns(std::span<const Vector> cols);
  static Matrix from_row_major(int rows, int cols, std::span<const double> values);

  int rows() const noexcept { return r_; }
  int cols() const noexcept { return c_; }
  double& operator()(int i, int j) noexcept { return a_[static_cast<size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const noexcept { return a_[static_cast<size_t>(i * kMaxDim + j)]; }

  Vector column(int j) const noexcept;
  Vector row(int i) const noexcept;
  void set_column(int j, const Vector& v) noexcept;
  Matrix transpose() const noexcept;
  Matrix block(int row0, int col0, int rows, int cols) const;
  double frobenius_norm() const noexcept;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Vector operator*(const Matrix& a, const Vector& v);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, Matrix a) noexcept;
  friend bool operator==(const Matrix& a, const Matrix& b) noexcept;

 private:
  int r_ = 0;
  int c_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

// Horizontal concatenation [a | b].
Matrix hstack(const Matrix& a, const Matrix& b);

// Determinant by cofactor expansion; exact formula for n <= 4.
double determinant(const Matrix& m);

// Gauss-Jordan with partial pivoting. Throws singularity when a pivot falls below `tiny`.
Matrix inverse(const Matrix& m, double tiny = 1e-300);
Vector solve(const Matrix& m, const Vector& b);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k is the unit eigenvector of values[k]
};

// Cyclic Jacobi; the input is symmetrized first.
SymmetricEigen symmetric_eigen(const Matrix& s);
double symmetric_min_eigenvalue(const Matrix& s);

// Singular values in descending order (via the symmetric eigenproblem of A^T A).
Vector singular_values(const Matrix& m);
double spectral_norm(const Matrix& m);

struct QrResult {
  Matrix q;         // rows x cols, orthonormal columns
  Vector r_diag;    // diagonal of R, positive
};

// Thin QR by modified Gram-Schmidt with one reorthogonalization pass.
// Throws singularity when the columns are (numerically) dependent.
QrResult thin_qr(const Matrix& a);

// Largest |Q^T Q - I| entry.
double orthonormality_defect(const Matrix& q) noexcept;

}  // namespace phlab
