#include "phlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "phlab/parallel.hpp"

namespace phlab {

namespace {

size_t grid_size(int dim, int res) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::input, "histogram dimension out of range");
  require(res >= 1 && res <= 4096, ErrorCode::input, "histogram resolution out of range");
  size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<size_t>(res);
  require(n <= (size_t{1} << 28), ErrorCode::input, "histogram grid too large");
  return n;
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& is, int bytes) {
  unsigned char b[8] = {};
  is.read(reinterpret_cast<char*>(b), bytes);
  if (!is) fail(ErrorCode::io, "truncated measure file");
  uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= uint64_t{b[i]} << (8 * i);
  return v;
}

constexpr char kMagic[8] = {'P', 'H', 'L', 'S', 'R', 'B', '0', '1'};

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(int dim, int resolution, const std::vector<uint64_t>& counts)
    : dim_(dim), res_(resolution) {
  require(counts.size() == grid_size(dim, resolution), ErrorCode::input, "histogram size mismatch");
  const uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
  require(total > 0, ErrorCode::input, "empty histogram");
  mass_.resize(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) mass_[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  build_cdf();
}

EmpiricalMeasure::EmpiricalMeasure(int dim, int resolution, std::vector<double> masses)
    : dim_(dim), res_(resolution), mass_(std::move(masses)) {
  require(mass_.size() == grid_size(dim, resolution), ErrorCode::input, "histogram size mismatch");
  double total = 0.0;
  for (double m : mass_) {
    require(m >= 0.0 && std::isfinite(m), ErrorCode::input, "histogram masses must be non-negative");
    total += m;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::input, "histogram masses must sum to 1");
  build_cdf();
}

void EmpiricalMeasure::build_cdf() {
  cdf_.resize(mass_.size());
  std::partial_sum(mass_.begin(), mass_.end(), cdf_.begin());
}

double EmpiricalMeasure::bin_volume() const noexcept { return std::pow(1.0 / res_, dim_); }

size_t EmpiricalMeasure::bin_index(const TorusPoint& x) const {
  require(x.dim() == dim_, ErrorCode::input, "point dimension differs from histogram");
  size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    const int k = std::min(res_ - 1, static_cast<int>(x[i] * res_));
    idx = idx * static_cast<size_t>(res_) + static_cast<size_t>(k);
  }
  return idx;
}

TorusPoint EmpiricalMeasure::bin_corner(size_t index) const {
  Vector v(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    v[i] = static_cast<double>(index % static_cast<size_t>(res_)) / res_;
    index /= static_cast<size_t>(res_);
  }
  return TorusPoint(v);
}

TorusPoint EmpiricalMeasure::sample(RandomStream& rng) const {
  const double u = rng.uniform() * cdf_.back();
  size_t idx = static_cast<size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  idx = std::min(idx, cdf_.size() - 1);
  while (mass_[idx] == 0.0 && idx > 0) --idx;  // u landed on a flat stretch of the cdf
  Vector v = bin_corner(idx).coords();
  for (int i = 0; i < dim_; ++i) v[i] += rng.uniform() / res_;
  return TorusPoint(v);
}

double EmpiricalMeasure::tv_distance(const EmpiricalMeasure& other) const {
  require(dim_ == other.dim_ && res_ == other.res_, ErrorCode::input, "histograms on different grids");
  double s = 0.0;
  for (size_t i = 0; i < mass_.size(); ++i) s += std::abs(mass_[i] - other.mass_[i]);
  return 0.5 * s;
}

double EmpiricalMeasure::tv_to_uniform() const {
  const double u = 1.0 / static_cast<double>(mass_.size());
  double s = 0.0;
  for (double m : mass_) s += std::abs(m - u);
  return 0.5 * s;
}

void EmpiricalMeasure::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  put_u32(os, static_cast<uint32_t>(dim_));
  put_u32(os, static_cast<uint32_t>(res_));
  put_u64(os, seed);
  put_u64(os, samples);
  put_u64(os, burn_in);
  put_u64(os, iterates);
  for (double m : mass_) {
    uint64_t bits;
    std::memcpy(&bits, &m, 8);
    put_u64(os, bits);
  }
  if (!os) fail(ErrorCode::io, "write failed for '" + path + "'");
}

EmpiricalMeasure EmpiricalMeasure::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorCode::io, "'" + path + "' is not a measure file");
  const int dim = static_cast<int>(get_u64(is, 4));
  const int res = static_cast<int>(get_u64(is, 4));
  if (dim < 1 || dim > kMaxDim || res < 1 || res > 4096) fail(ErrorCode::io, "corrupt measure header");
  const uint64_t seed = get_u64(is, 8), samples = get_u64(is, 8), burn = get_u64(is, 8), iters = get_u64(is, 8);
  std::vector<double> masses(grid_size(dim, res));
  for (auto& m : masses) {
    const uint64_t bits = get_u64(is, 8);
    std::memcpy(&m, &bits, 8);
  }
  EmpiricalMeasure out;
  try {
    out = EmpiricalMeasure(dim, res, std::move(masses));
  } catch (const Error& e) {
    fail(ErrorCode::io, "corrupt measure file '" + path + "': " + e.what());
  }
  out.seed = seed;
  out.samples = samples;
  out.burn_in = burn;
  out.iterates = iters;
  return out;
}

void EmpiricalMeasure::write_summary_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  double lo = 1e300, hi = 0.0;
  for (double m : mass_) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "key,value\n";
  os << "dim," << dim_ << "\n";
  os << "resolution," << res_ << "\n";
  os << "seed," << seed << "\n";
  os << "samples," << samples << "\n";
  os << "burn_in," << burn_in << "\n";
  os << "iterates," << iterates << "\n";
  os << "tv_to_uniform," << num(tv_to_uniform()) << "\n";
  os << "min_density," << num(lo / bin_volume()) << "\n";
  os << "max_density," << num(hi / bin_volume()) << "\n";
  if (!os) fail(ErrorCode::io, "write failed for '" + path + "'");
}

DiskSpec default_disk(const Endomorphism& model, const TorusPoint& center, double radius) {
  return {center, radius, Subspace(model.center_basis())};
}

EmpiricalMeasure empirical_srb(const Endomorphism& model, const ConeSpec& cone, const DiskSpec& disk,
                               const SrbOptions& o) {
  require(o.iterates >= 1 && o.samples >= 1 && o.burn_in >= 0, ErrorCode::input, "invalid SRB options");
  require(disk.radius >= 0.0, ErrorCode::input, "disk radius must be non-negative");
  require(disk.center.dim() == model.dim(), ErrorCode::input, "disk center dimension mismatch");
  require(disk.tangent.dim() == cone.center_dim() && subspace_in_cone(disk.tangent, cone, 1e-12), ErrorCode::input,
          "disk is not tangent to the cone at its center");
  const size_t nbins = grid_size(model.dim(), o.resolution);
  EmpiricalMeasure shape(model.dim(), o.resolution, std::vector<uint64_t>(nbins, 1));
  const int workers = std::max(1, o.threads);
  std::vector<std::vector<uint64_t>> partial(static_cast<size_t>(workers), std::vector<uint64_t>(nbins, 0));
  const int d = disk.tangent.dim();
  parallel_for(static_cast<size_t>(o.samples), workers, [&](size_t begin, size_t end, int w) {
    auto& counts = partial[static_cast<size_t>(w)];
    for (size_t i = begin; i < end; ++i) {
      RandomStream rng(o.seed, i);
      Vector u(d);
      do {
        for (int k = 0; k < d; ++k) u[k] = rng.uniform(-1.0, 1.0);
      } while (u.squared_norm() > 1.0);
      TorusPoint x = translate(disk.center, disk.tangent.basis() * (u * disk.radius));
      for (int j = 0; j < o.burn_in + o.iterates; ++j) {
        if (j >= o.burn_in) ++counts[shape.bin_index(x)];
        x = advance(model, x);
      }
    }
  });
  std::vector<uint64_t> total(nbins, 0);
  for (const auto& p : partial)
    for (size_t b = 0; b < nbins; ++b) total[b] += p[b];
  EmpiricalMeasure out(model.dim(), o.resolution, total);
  out.seed = o.seed;
  out.samples = static_cast<uint64_t>(o.samples);
  out.burn_in = static_cast<uint64_t>(o.burn_in);
  out.iterates = static_cast<uint64_t>(o.iterates);
  return out;
}

double birkhoff_average(const Endomorphism& model, const TorusPoint& x, const Observable& phi, int n) {
  require(n >= 1, ErrorCode::input, "n must be positive");
  double s = 0.0;
  TorusPoint y = x;
  for (int j = 0; j < n; ++j) {
    s += phi(y);
    y = advance(model, y);
  }
  return s / n;
}

LyapunovResult lyapunov_spectrum(const Endomorphism& model, const TorusPoint& x, int n, int reorth) {
  require(n >= 1000, ErrorCode::input, "lyapunov_spectrum needs n >= 1000");
  require(reorth >= 1, ErrorCode::input, "re-orthonormalization period must be positive");
  const int d = model.dim();
  Matrix q = Matrix::identity(d);
  std::vector<double> sums(static_cast<size_t>(d), 0.0);
  double logdet = 0.0;
  TorusPoint y = x;
  for (int j = 1; j <= n; ++j) {
    const Matrix df = model.derivative(y);
    logdet += std::log(std::abs(determinant(df)));
    q = df * q;
    y = advance(model, y);
    if (j % reorth == 0 || j == n) {
      const QrResult qr = thin_qr(q);
      const double defect = orthonormality_defect(qr.q);
      if (defect > 1e-6)
        fail(ErrorCode::internal, "orthogonality lost in cocycle iteration (defect " + std::to_string(defect) + ")");
      for (int k = 0; k < d; ++k) sums[static_cast<size_t>(k)] += std::log(qr.r_diag[k]);
      q = qr.q;
    }
  }
  LyapunovResult r;
  for (double s : sums) r.exponents.push_back(s / n);
  std::sort(r.exponents.begin(), r.exponents.end(), std::greater<>());
  r.log_det_average = logdet / n;
  return r;
}

namespace {

struct SubspaceBundle {
  std::vector<Matrix> bases;
  std::vector<double> logs;
};

SubspaceBundle cone_bundle(const ConeSpec& cone, const Subspace& f1, int samples, uint64_t seed, uint64_t tag) {
  SubspaceBundle b;
  b.bases.push_back(f1.basis());
  for (int k = 0; k < samples; ++k) {
    RandomStream rng(seed, tag + static_cast<uint64_t>(k));
    b.bases.push_back(random_cone_subspace(cone, rng).basis());
  }
  b.logs.assign(b.bases.size(), 0.0);
  return b;
}

double push_bundle(SubspaceBundle& b, const Matrix& df) {
  double best = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < b.bases.size(); ++k) {
    const QrResult qr = thin_qr(df * b.bases[k]);
    for (int i = 0; i < qr.r_diag.size(); ++i) b.logs[k] += std::log(qr.r_diag[i]);
    b.bases[k] = qr.q;
    best = std::max(best, b.logs[k]);
  }
  return best;
}

void require_in_cone(const Subspace& f1, const ConeSpec& cone) {
  require(f1.dim() == cone.center_dim() && subspace_in_cone(f1, cone, 1e-12), ErrorCode::input,
          "F1 is not contained in the cone");
}

}  // namespace

GammaEstimate gamma_sequence(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                             const Subspace& f1, int n_max, int subspace_samples, uint64_t seed) {
  require(n_max >= 1 && subspace_samples >= 0, ErrorCode::input, "invalid gamma_sequence arguments");
  require_in_cone(f1, cone);
  SubspaceBundle b = cone_bundle(cone, f1, subspace_samples, seed, 0);
  GammaEstimate g;
  g.subspace_samples = subspace_samples;
  g.log_gamma.assign(static_cast<size_t>(n_max) + 1, 0.0);
  g.log_det_f1.assign(static_cast<size_t>(n_max) + 1, 0.0);
  TorusPoint y = x;
  for (int n = 1; n <= n_max; ++n) {
    g.log_gamma[static_cast<size_t>(n)] = push_bundle(b, model.derivative(y));
    g.log_det_f1[static_cast<size_t>(n)] = b.logs[0];
    g.max_gap = std::max(g.max_gap, g.log_gamma[static_cast<size_t>(n)] - b.logs[0]);
    y = advance(model, y);
  }
  g.limit = g.log_gamma.back() / n_max;
  return g;
}

double submultiplicativity_excess(const Endomorphism& model, const ConeSpec& cone, const TorusPoint& x,
                                  const Subspace& f1, int n, int m, int subspace_samples, uint64_t seed) {
  require(n >= 1 && m >= 1, ErrorCode::input, "split lengths must be positive");
  require_in_cone(f1, cone);
  SubspaceBundle from_x = cone_bundle(cone, f1, subspace_samples, seed, 0);
  TorusPoint y = x;
  double gamma_n = 0.0;
  for (int j = 0; j < n; ++j) {
    gamma_n = push_bundle(from_x, model.derivative(y));
    y = advance(model, y);
  }
  // Subspaces at f^n x: the images of those at x plus fresh cone samples.
  SubspaceBundle at_y = cone_bundle(cone, f1, subspace_samples, seed, 1u << 20);
  at_y.bases.insert(at_y.bases.end(), from_x.bases.begin(), from_x.bases.end());
  at_y.logs.assign(at_y.bases.size(), 0.0);
  double gamma_nm = 0.0, gamma_m = 0.0;
  TorusPoint z = y;
  for (int j = 0; j < m; ++j) {
    const Matrix df = model.derivative(z);
    gamma_nm = push_bundle(from_x, df);
    gamma_m = push_bundle(at_y, df);
    z = advance(model, z);
  }
  return gamma_nm - gamma_n - gamma_m;
}

}  // namespace phlab
