#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phlab/cone_spec.hpp"
#include "phlab/torus.hpp"

namespace phlab {

struct HolderData {
  double exponent = 1.0;
  double constant = 0.0;
};

// A ball where a model differs from its linear part; used for stratified sampling.
struct PerturbationRegion {
  TorusPoint center;
  double radius = 0.0;
};

// Non-singular C^{1+alpha} self-map of the torus T^{d*}.
class Endomorphism {
 public:
  virtual ~Endomorphism() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual TorusPoint eval(const TorusPoint& x) const = 0;
  virtual Matrix derivative(const TorusPoint& x) const = 0;
  // Number of preimages of every point (= |det| of the induced action on the lattice).
  virtual int degree() const = 0;
  virtual HolderData holder() const = 0;
  virtual bool is_linear() const { return false; }
  // Integer matrix of the induced map on the fundamental group.
  virtual const Matrix& homotopy_matrix() const = 0;
  // Constant splitting E^s (+) F used to build the default cone field.
  virtual const Matrix& stable_basis() const = 0;
  virtual const Matrix& center_basis() const = 0;
  virtual std::optional<PerturbationRegion> perturbation_region() const { return std::nullopt; }
};

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows);
  static IntMatrix from_row_major(int n, std::span<const long long> entries);

  int dim() const noexcept { return n_; }
  long long operator()(int i, int j) const noexcept { return a_[static_cast<size_t>(i * kMaxDim + j)]; }
  long long& operator()(int i, int j) noexcept { return a_[static_cast<size_t>(i * kMaxDim + j)]; }
  Matrix to_real() const;

 private:
  int n_ = 0;
  std::array<long long, kMaxDim * kMaxDim> a_{};
};

struct EigenData {
  std::vector<std::complex<double>> values;  // sorted by decreasing modulus
  double stable_max = 0.0;     // largest |lambda| with |lambda| < 1
  double unstable_min = 0.0;   // smallest |lambda| with |lambda| > 1
  int unstable_dim = 0;
  Matrix stable_basis;         // orthonormal basis of E^s
  Matrix unstable_basis;       // orthonormal basis of E^u
  // Sum of log|lambda| over expanding eigenvalues: the entropy of Haar measure.
  double unstable_log_volume = 0.0;
};

// Torus endomorphism x -> A x (mod 1) for a hyperbolic integer matrix A.
class LinearAnosov final : public Endomorphism {
 public:
  static constexpr double kUnitCircleTolerance = 1e-9;

  // Throws input when A is singular or has an eigenvalue within 1e-9 of the unit circle.
  explicit LinearAnosov(const IntMatrix& a, std::string name = "linear");

  std::string name() const override { return name_; }
  int dim() const override { return a_.rows(); }
  TorusPoint eval(const TorusPoint& x) const override;
  Matrix derivative(const TorusPoint&) const override { return a_; }
  int degree() const override { return degree_; }
  HolderData holder() const override { return {1.0, 0.0}; }
  bool is_linear() const override { return true; }
  const Matrix& homotopy_matrix() const override { return a_; }
  const Matrix& stable_basis() const override { return eigen_.stable_basis; }
  const Matrix& center_basis() const override { return eigen_.unstable_basis; }

  const IntMatrix& integer_matrix() const noexcept { return int_a_; }
  const Matrix& matrix() const noexcept { return a_; }
  const Matrix& inverse_matrix() const noexcept { return a_inv_; }
  const EigenData& eigen() const noexcept { return eigen_; }
  // Largest c for which every time is c-cone-hyperbolic for the default cone of width `width`.
  double c_max(double width = 0.1) const;

 private:
  std::string name_;
  IntMatrix int_a_;
  Matrix a_;
  Matrix a_inv_;
  int degree_ = 1;
  EigenData eigen_;
};

LinearAnosov make_linear_anosov(const IntMatrix& a, std::string name = "linear");

struct DerivedParams {
  double radius = 0.05;  // delta: support radius of the perturbation
  double t = 1.0;        // isotopy parameter
  double rho = 0.6;      // target weak eigenvalue at the fixed point
  std::optional<TorusPoint> center;  // fixed point p; origin by default
  double cone_width = 0.1;
  int invariance_samples = 20000;
};

// g_t(x) = A x + t (rho - lambda_3) s(|x-p|) <pi_w, x-p> e_w  (mod 1), where e_w is the weak
// unstable eigenvector, pi_w its dual row and s(r) = (1 - (r/delta)^2)^2 on r < delta.
class DerivedAnosov final : public Endomorphism {
 public:
  // Throws input naming the violated condition.
  DerivedAnosov(const LinearAnosov& base, const DerivedParams& params);

  std::string name() const override { return "derived"; }
  int dim() const override { return 3; }
  TorusPoint eval(const TorusPoint& x) const override;
  Matrix derivative(const TorusPoint& x) const override;
  int degree() const override { return base_.degree(); }
  HolderData holder() const override { return holder_; }
  const Matrix& homotopy_matrix() const override { return base_.matrix(); }
  const Matrix& stable_basis() const override { return base_.stable_basis(); }
  const Matrix& center_basis() const override { return base_.center_basis(); }
  std::optional<PerturbationRegion> perturbation_region() const override {
    return PerturbationRegion{center_, params_.radius};
  }

  const LinearAnosov& base() const noexcept { return base_; }
  const DerivedParams& params() const noexcept { return params_; }
  const TorusPoint& center() const noexcept { return center_; }
  // (lambda_1, lambda_2, lambda_3): stable, strong unstable, weak unstable eigenvalues of the base.
  const std::array<double, 3>& base_eigenvalues() const noexcept { return lambda_; }
  // Eigen-coordinates at p (columns: stable, strong, weak) and its inverse.
  const Matrix& eigenbasis() const noexcept { return basis_; }
  const Matrix& eigenbasis_inverse() const noexcept { return basis_inv_; }
  // Minimum sampled cone-invariance margin found at construction.
  double construction_margin() const noexcept { return construction_margin_; }

  // Bump profile and its radial derivative.
  double bump(double r) const noexcept;

 private:
  LinearAnosov base_;
  DerivedParams params_;
  TorusPoint center_;
  std::array<double, 3> lambda_{};
  Matrix basis_;
  Matrix basis_inv_;
  Vector weak_vector_;  // e_w
  Vector weak_dual_;    // pi_w
  double kappa_ = 0.0;  // t (rho - lambda_3)
  HolderData holder_;
  double construction_margin_ = 0.0;
};

struct RhoConditions {
  double domination = 0.0;  // |lambda_1 / rho|, must be < 1
  double expansion = 0.0;   // |lambda_2 * rho|, must be > 1
  bool domination_ok = false;
  bool expansion_ok = false;
};
RhoConditions check_rho_conditions(double lambda1, double lambda2, double rho);

DerivedAnosov make_derived_anosov(const LinearAnosov& base, double delta, double t, double rho);

// Built-in models: "cat2" = [[2,1],[1,1]], "paper3" = [[2,1,0],[1,1,0],[0,0,2]],
// "derived3" = derived model over paper3 with default parameters.
std::shared_ptr<const Endomorphism> builtin_model(const std::string& name);

// Local inverse branch by Newton iteration seeded at `hint`.
// Throws convergence after 50 steps, singularity on a degenerate Jacobian.
TorusPoint inverse_branch(const Endomorphism& model, const TorusPoint& target, const TorusPoint& hint,
                          double tol = 1e-12);

// All `degree()` preimages of `target`. Throws internal if two preimages coincide.
std::vector<TorusPoint> enumerate_preimages(const Endomorphism& model, const TorusPoint& target);

// One step of a numerical orbit. Identical to eval() for degree-1 maps. For degree > 1 the
// trailing mantissa bits discarded by the expansion are refilled from a hash of the input
// (relative amplitude 2^-50), otherwise every double-precision orbit of an expanding factor
// collapses onto a dyadic cycle within ~53 steps. Zero coordinates stay zero, so fixed points
// such as the origin are preserved. Deterministic and pure.
TorusPoint advance(const Endomorphism& model, const TorusPoint& x);

}  // namespace phlab
