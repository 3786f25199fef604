#include "phlab/endomorphism.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <numbers>

namespace phlab {

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long long>> rows)
    : n_(static_cast<int>(rows.size())) {
  require(n_ >= 1 && n_ <= kMaxDim, ErrorCode::input, "integer matrix dimension out of range");
  int i = 0;
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == n_, ErrorCode::input, "integer matrix must be square");
    int j = 0;
    for (long long x : row) (*this)(i, j++) = x;
    ++i;
  }
}

IntMatrix IntMatrix::from_row_major(int n, std::span<const long long> entries) {
  require(n >= 1 && n <= kMaxDim, ErrorCode::input, "integer matrix dimension out of range");
  require(static_cast<int>(entries.size()) == n * n, ErrorCode::input, "integer matrix needs n*n entries");
  IntMatrix m;
  m.n_ = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = entries[static_cast<size_t>(i * n + j)];
  return m;
}

Matrix IntMatrix::to_real() const {
  Matrix m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = static_cast<double>((*this)(i, j));
  return m;
}

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// Real basis of the invariant subspace for eigenvalues selected by `pick`.
Matrix real_invariant_basis(const Eigen::EigenSolver<Eigen::MatrixXd>& es, int n, bool stable) {
  std::vector<Vector> cols;
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  for (int k = 0; k < n; ++k) {
    const double mod = std::abs(vals[k]);
    if ((mod < 1.0) != stable) continue;
    if (vals[k].imag() < 0.0) continue;  // conjugate handled with its partner
    Vector re(n), im(n);
    for (int i = 0; i < n; ++i) {
      re[i] = vecs(i, k).real();
      im[i] = vecs(i, k).imag();
    }
    cols.push_back(re);
    if (vals[k].imag() > 0.0) cols.push_back(im);
  }
  if (cols.empty()) return Matrix(n, 0);
  return thin_qr(Matrix::from_columns(cols)).q;
}

}  // namespace

LinearAnosov::LinearAnosov(const IntMatrix& a, std::string name)
    : name_(std::move(name)), int_a_(a), a_(a.to_real()) {
  const int n = a.dim();
  require(n >= 1, ErrorCode::input, "empty matrix");
  const double det = determinant(a_);
  require(std::abs(det) >= 0.5, ErrorCode::input, "matrix is singular (|det A| < 1)");
  degree_ = static_cast<int>(std::llround(std::abs(det)));
  a_inv_ = inverse(a_);

  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(a_));
  require(es.info() == Eigen::Success, ErrorCode::numerical, "eigen-decomposition failed");
  for (int k = 0; k < n; ++k) {
    const std::complex<double> ev = es.eigenvalues()[k];
    if (std::abs(std::abs(ev) - 1.0) <= kUnitCircleTolerance)
      fail(ErrorCode::input, "matrix is not hyperbolic: eigenvalue of modulus " +
                                 std::to_string(std::abs(ev)) + " on the unit circle");
    eigen_.values.push_back(ev);
  }
  std::sort(eigen_.values.begin(), eigen_.values.end(),
            [](auto x, auto y) { return std::abs(x) > std::abs(y); });
  eigen_.unstable_min = std::numeric_limits<double>::infinity();
  for (auto ev : eigen_.values) {
    const double mod = std::abs(ev);
    if (mod > 1.0) {
      ++eigen_.unstable_dim;
      eigen_.unstable_min = std::min(eigen_.unstable_min, mod);
      eigen_.unstable_log_volume += std::log(mod);
    } else {
      eigen_.stable_max = std::max(eigen_.stable_max, mod);
    }
  }
  require(eigen_.unstable_dim >= 1, ErrorCode::input, "matrix has no expanding direction");
  eigen_.stable_basis = real_invariant_basis(es, n, true);
  eigen_.unstable_basis = real_invariant_basis(es, n, false);
}

TorusPoint LinearAnosov::eval(const TorusPoint& x) const {
  require(x.dim() == dim(), ErrorCode::input, "point dimension mismatch");
  return TorusPoint(a_ * x.coords());
}

double LinearAnosov::c_max(double width) const {
  const ConeSpec cone(stable_basis(), center_basis(), width);
  return -std::log(restricted_inverse_norm(a_, cone));
}

LinearAnosov make_linear_anosov(const IntMatrix& a, std::string name) { return LinearAnosov(a, std::move(name)); }

RhoConditions check_rho_conditions(double lambda1, double lambda2, double rho) {
  RhoConditions c;
  c.domination = std::abs(lambda1 / rho);
  c.expansion = std::abs(lambda2 * rho);
  c.domination_ok = c.domination < 1.0;
  c.expansion_ok = c.expansion > 1.0;
  return c;
}

DerivedAnosov::DerivedAnosov(const LinearAnosov& base, const DerivedParams& params)
    : base_(base), params_(params) {
  require(base.dim() == 3, ErrorCode::input, "derived model needs a 3x3 base matrix");
  require(params.t >= 0.0 && params.t <= 1.0, ErrorCode::input, "isotopy parameter t must lie in [0,1]");
  require(params.radius > 0.0, ErrorCode::input, "perturbation radius must be positive");
  require(params.radius < 0.25, ErrorCode::input,
          "delta too large: perturbation ball must have radius < 1/4 to stay embedded");
  require(std::isfinite(params.rho) && params.rho != 0.0, ErrorCode::input, "rho must be finite and non-zero");

  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(base.matrix()));
  require(es.info() == Eigen::Success, ErrorCode::numerical, "eigen-decomposition failed");
  struct Pair {
    double value;
    Vector vec;
  };
  std::vector<Pair> pairs;
  for (int k = 0; k < 3; ++k) {
    const auto ev = es.eigenvalues()[k];
    require(std::abs(ev.imag()) <= 1e-12 * std::max(1.0, std::abs(ev)), ErrorCode::input,
            "derived model needs a base with real eigenvalues");
    Vector v(3);
    for (int i = 0; i < 3; ++i) v[i] = es.eigenvectors()(i, k).real();
    pairs.push_back({ev.real(), v * (1.0 / v.norm())});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return std::abs(x.value) < std::abs(y.value); });
  require(std::abs(pairs[0].value) < 1.0 && std::abs(pairs[1].value) > 1.0, ErrorCode::input,
          "derived model needs one stable and two unstable eigenvalues");
  require(std::abs(pairs[2].value) > std::abs(pairs[1].value) + 1e-9, ErrorCode::input,
          "derived model needs distinct unstable eigenvalues");
  lambda_ = {pairs[0].value, pairs[2].value, pairs[1].value};
  const Vector cols[3] = {pairs[0].vec, pairs[2].vec, pairs[1].vec};
  basis_ = Matrix::from_columns(cols);
  basis_inv_ = inverse(basis_);
  weak_vector_ = pairs[1].vec;
  weak_dual_ = basis_inv_.row(2);

  const RhoConditions rc = check_rho_conditions(lambda_[0], lambda_[1], params.rho);
  std::string violated;
  if (!rc.domination_ok) violated += "|lambda1/rho| < 1 (domination, value " + std::to_string(rc.domination) + ")";
  if (!rc.expansion_ok)
    violated += std::string(violated.empty() ? "" : "; ") + "|lambda2*rho| > 1 (volume expansion, value " +
                std::to_string(rc.expansion) + ")";
  if (!violated.empty()) fail(ErrorCode::input, "rho violates " + violated);

  center_ = params.center.value_or(TorusPoint::origin(3));
  require(center_.dim() == 3, ErrorCode::input, "perturbation center must be a point of T^3");
  require(torus_distance(base_.eval(center_), center_) <= 1e-12, ErrorCode::input,
          "perturbation center is not a fixed point of the base map");

  kappa_ = params.t * (params.rho - lambda_[2]);
  holder_ = {1.0, 16.0 * std::abs(kappa_) * weak_vector_.norm() * weak_dual_.norm() / params.radius};

  // Cone invariance inside the perturbation ball (outside it the map is the hyperbolic base).
  const ConeSpec cone(stable_basis(), center_basis(), params.cone_width);
  RandomStream rng(0x9d2c5680a1b3e7f1ull, 0);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < params.invariance_samples; ++s) {
    Vector dir(3);
    for (int i = 0; i < 3; ++i) dir[i] = rng.normal();
    // Every fourth sample sits just inside the boundary sphere; the rest fill the ball.
    const double r = (s % 4 == 3) ? params.radius * (1.0 - 1e-9) : params.radius * std::cbrt(rng.uniform());
    const TorusPoint x = translate(center_, dir * (r / dir.norm()));
    const Matrix m = derivative(x);
    require(std::abs(determinant(m)) > 1e-12, ErrorCode::input, "delta too large: derivative degenerates");
    worst = std::min(worst, cone_invariance_margin(m, cone));
  }
  construction_margin_ = worst;
  if (!(worst > 0.0))
    fail(ErrorCode::input, "delta too large: cone invariance fails at sampled points (margin " +
                               std::to_string(worst) + ")");
}

double DerivedAnosov::bump(double r) const noexcept {
  if (r >= params_.radius) return 0.0;
  const double q = 1.0 - (r / params_.radius) * (r / params_.radius);
  return q * q;
}

TorusPoint DerivedAnosov::eval(const TorusPoint& x) const {
  const TangentVector d = lift_difference(center_, x);
  const double r = d.norm();
  if (r >= params_.radius || kappa_ == 0.0) return base_.eval(x);
  Vector y = base_.matrix() * x.coords();
  y += (kappa_ * bump(r) * weak_dual_.dot(d)) * weak_vector_;
  return TorusPoint(y);
}

Matrix DerivedAnosov::derivative(const TorusPoint& x) const {
  const TangentVector d = lift_difference(center_, x);
  const double r = d.norm();
  if (r >= params_.radius || kappa_ == 0.0) return base_.matrix();
  const double delta2 = params_.radius * params_.radius;
  const double q = 1.0 - r * r / delta2;
  const double s = q * q;
  const double w = weak_dual_.dot(d);
  const Vector grad = d * (-4.0 * q / delta2);
  Matrix m = base_.matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) += kappa_ * weak_vector_[i] * (s * weak_dual_[j] + w * grad[j]);
  return m;
}

DerivedAnosov make_derived_anosov(const LinearAnosov& base, double delta, double t, double rho) {
  DerivedParams p;
  p.radius = delta;
  p.t = t;
  p.rho = rho;
  return DerivedAnosov(base, p);
}

std::shared_ptr<const Endomorphism> builtin_model(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Endomorphism>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  std::shared_ptr<const Endomorphism> m;
  if (name == "cat2") {
    m = std::make_shared<LinearAnosov>(IntMatrix{{2, 1}, {1, 1}}, "cat2");
  } else if (name == "paper3") {
    m = std::make_shared<LinearAnosov>(IntMatrix{{2, 1, 0}, {1, 1, 0}, {0, 0, 2}}, "paper3");
  } else if (name == "derived3") {
    const LinearAnosov base(IntMatrix{{2, 1, 0}, {1, 1, 0}, {0, 0, 2}}, "paper3");
    m = std::make_shared<DerivedAnosov>(base, DerivedParams{});
  } else {
    fail(ErrorCode::input, "unknown built-in model '" + name + "' (expected cat2, paper3 or derived3)");
  }
  cache.emplace(name, m);
  return m;
}

TorusPoint inverse_branch(const Endomorphism& model, const TorusPoint& target, const TorusPoint& hint,
                          double tol) {
  require(target.dim() == model.dim() && hint.dim() == model.dim(), ErrorCode::input,
          "inverse branch dimension mismatch");
  TorusPoint y = hint;
  const auto* lin = model.is_linear() ? dynamic_cast<const LinearAnosov*>(&model) : nullptr;
  for (int step = 0; step <= 50; ++step) {
    const TangentVector residual = lift_difference(target, model.eval(y));
    if (residual.norm() <= tol) return y;
    if (step == 50) break;
    if (lin) {
      y = translate(y, -(lin->inverse_matrix() * residual));
      continue;
    }
    const Matrix j = model.derivative(y);
    if (!(std::abs(determinant(j)) > 1e-12)) fail(ErrorCode::singularity, "singular Jacobian in inverse branch");
    y = translate(y, -solve(j, residual));
  }
  fail(ErrorCode::convergence, "inverse branch: Newton did not converge in 50 steps");
}

std::vector<TorusPoint> enumerate_preimages(const Endomorphism& model, const TorusPoint& target) {
  const int n = model.dim();
  require(target.dim() == n, ErrorCode::input, "target dimension mismatch");
  const Matrix& lin = model.homotopy_matrix();
  const Matrix lin_inv = inverse(lin);
  const int deg = model.degree();

  // A^{-1} Z^n / Z^n has exactly |det A| elements; adj(A) is integral, so k mod |det A| suffices.
  std::vector<TorusPoint> kernel;
  std::array<int, kMaxDim> k{};
  for (;;) {
    Vector kv(n);
    for (int i = 0; i < n; ++i) kv[i] = k[static_cast<size_t>(i)];
    const TorusPoint cand(lin_inv * kv);
    bool seen = false;
    for (const auto& p : kernel)
      if (torus_distance(p, cand) < 1e-9) {
        seen = true;
        break;
      }
    if (!seen) kernel.push_back(cand);
    int i = 0;
    while (i < n && ++k[static_cast<size_t>(i)] == deg) k[static_cast<size_t>(i++)] = 0;
    if (i == n) break;
  }
  if (static_cast<int>(kernel.size()) != deg)
    fail(ErrorCode::internal, "lattice preimage count " + std::to_string(kernel.size()) +
                                  " differs from degree " + std::to_string(deg));

  const Vector base = lin_inv * target.coords();
  std::vector<TorusPoint> out;
  out.reserve(kernel.size());
  for (const auto& kp : kernel) {
    const TorusPoint guess(base + kp.coords());
    out.push_back(inverse_branch(model, target, guess, 1e-13));
  }
  for (const auto& p : out)
    if (torus_distance(model.eval(p), target) > 1e-10)
      fail(ErrorCode::internal, "preimage does not map to target");
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t j = i + 1; j < out.size(); ++j)
      if (torus_distance(out[i], out[j]) < 1e-8)
        fail(ErrorCode::internal, "duplicate preimages: degree miscount");
  return out;
}

TorusPoint advance(const Endomorphism& model, const TorusPoint& x) {
  TorusPoint y = model.eval(x);
  if (model.degree() == 1) return y;
  uint64_t h = 0x51ed270b27a3c8e5ull;
  for (int i = 0; i < x.dim(); ++i) h = mix64(h ^ std::bit_cast<uint64_t>(x[i]));
  Vector c = y.coords();
  for (int i = 0; i < c.size(); ++i) {
    const double u = static_cast<double>(mix64(h + static_cast<uint64_t>(i) + 1) >> 11) * 0x1.0p-53;
    c[i] += c[i] * (u - 0.5) * 0x1.0p-50;
  }
  return TorusPoint(c);
}

}  // namespace phlab
