#include "phlab/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "phlab/deviations.hpp"
#include "phlab/parallel.hpp"
#include "phlab/volume.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace phlab {

namespace {

constexpr const char* kVersion = "0.3.0";

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"seed", "out", "format", "threads", "budget", "model", "cone", "hyptimes", "volume_lemma", "srb",
            "lyapunov", "ldp", "validate"}},
      {"budget", {"max_steps"}},
      {"model", {"kind", "name", "matrix", "delta", "t", "rho", "center", "invariance_samples"}},
      {"cone", {"width"}},
      {"hyptimes", {"c", "length", "orbits", "tail_samples", "tail_n_max", "lacunarity_tolerance", "k2"}},
      {"volume_lemma",
       {"eps", "n", "samples", "method", "metric", "measure", "center", "c", "k_cap", "plaque_points"}},
      {"srb", {"samples", "iterates", "resolution", "burn_in", "disk_center", "disk_radius", "tv_tolerance"}},
      {"lyapunov", {"n", "reorth", "x0", "tolerance"}},
      {"ldp",
       {"observable", "delta", "n", "samples", "betas", "rate_n_max", "rate_samples", "pesin_n", "pesin_points",
        "c"}},
      {"validate", {"samples", "nonsingular_samples"}},
  };
  return s;
}

std::string where(const YAML::Node& n) {
  if (!n.IsDefined() || n.Mark().is_null()) return "";
  return " (line " + std::to_string(n.Mark().line + 1) + ")";
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson json_number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return fmt_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<bool>(c) ? "true" : "false";
}

ojson cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return json_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<bool>(c);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io, "cannot write " + path.string());
  f << text;
  if (!f) fail(ErrorCode::io, "write failed: " + path.string());
}

struct Output {
  fs::path dir;
  std::string format;
  std::vector<std::string> files;

  void table(const std::string& name, const Table& t) {
    std::string text;
    if (format == "csv") {
      for (size_t i = 0; i < t.columns.size(); ++i) text += (i ? "," : "") + t.columns[i];
      text += '\n';
      for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell_text(row[i]);
        text += '\n';
      }
    } else {
      ojson arr = ojson::array();
      for (const auto& row : t.rows) {
        ojson o = ojson::object();
        for (size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = cell_json(row[i]);
        arr.push_back(std::move(o));
      }
      text = arr.dump(2) + "\n";
    }
    const std::string file = name + (format == "csv" ? ".csv" : ".json");
    write_text(dir / file, text);
    files.push_back(file);
  }
};

ojson point_json(const TorusPoint& x) {
  ojson a = ojson::array();
  for (int i = 0; i < x.dim(); ++i) a.push_back(x[i]);
  return a;
}

}  // namespace

std::vector<int> parse_range(const std::string& text) {
  const auto bad = [&] { fail(ErrorCode::config, "malformed range '" + text + "' (expected a:b:s, a:b or n)"); };
  std::vector<long long> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      bad();
    }
    if (pos != item.size()) bad();
    parts.push_back(v);
  }
  if (parts.empty() || parts.size() > 3) bad();
  if (parts.size() == 1) return {static_cast<int>(parts[0])};
  const long long step = parts.size() == 3 ? parts[2] : 1;
  if (step <= 0 || parts[1] < parts[0] || (parts[1] - parts[0]) / step > 1000000) bad();
  std::vector<int> out;
  for (long long n = parts[0]; n <= parts[1]; n += step) out.push_back(static_cast<int>(n));
  return out;
}

struct Experiment::Impl {
  YAML::Node root = YAML::Node(YAML::NodeType::Map);

  // --- config access ---------------------------------------------------------------------------

  static std::string field(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  YAML::Node node(const std::string& section, const std::string& key) const {
    const YAML::Node& r = root;
    if (section.empty()) return r[key];
    const YAML::Node s = r[section];
    if (!s.IsDefined() || !s.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return s[key];
  }

  bool has(const std::string& section, const std::string& key) const {
    const YAML::Node n = node(section, key);
    return n.IsDefined() && !n.IsNull();
  }

  template <class T>
  T value(const std::string& section, const std::string& key, T def) const {
    const YAML::Node n = node(section, key);
    if (!n.IsDefined() || n.IsNull()) return def;
    try {
      if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::config, "config field " + field(section, key) + where(n) + ": cannot read '" +
                                  (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) + "' as " +
                                  (std::is_same_v<T, std::string> ? "text" : "a number"));
    }
  }

  int positive(const std::string& section, const std::string& key, int def) const {
    const long long v = value<long long>(section, key, def);
    if (v < 1 || v > std::numeric_limits<int>::max())
      fail(ErrorCode::config, "config field " + field(section, key) + where(node(section, key)) +
                                  ": must be a positive integer");
    return static_cast<int>(v);
  }

  double positive_real(const std::string& section, const std::string& key, double def) const {
    const double v = value<double>(section, key, def);
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::config, "config field " + field(section, key) + where(node(section, key)) + ": must be positive");
    return v;
  }

  std::string choice(const std::string& section, const std::string& key, const std::string& def,
                     const std::set<std::string>& allowed) const {
    const std::string v = value<std::string>(section, key, def);
    if (!allowed.count(v)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(ErrorCode::config, "config field " + field(section, key) + where(node(section, key)) + ": '" + v +
                                  "' is not one of " + list);
    }
    return v;
  }

  std::vector<double> reals(const std::string& section, const std::string& key, std::vector<double> def) const {
    const YAML::Node n = node(section, key);
    if (!n.IsDefined() || n.IsNull()) return def;
    std::vector<double> out;
    try {
      if (n.IsScalar()) return {n.as<double>()};
      if (!n.IsSequence()) throw YAML::BadConversion(n.Mark());
      for (const auto& e : n) out.push_back(e.as<double>());
    } catch (const YAML::Exception&) {
      fail(ErrorCode::config, "config field " + field(section, key) + where(n) + ": expected a list of numbers");
    }
    return out;
  }

  std::vector<int> n_list(const std::string& section, const std::string& key, const std::string& def) const {
    const YAML::Node n = node(section, key);
    std::vector<int> out;
    try {
      if (!n.IsDefined() || n.IsNull()) {
        out = parse_range(def);
      } else if (n.IsSequence()) {
        for (const auto& e : n) out.push_back(e.as<int>());
      } else if (n.IsScalar()) {
        out = parse_range(n.Scalar());
      } else {
        throw YAML::BadConversion(n.Mark());
      }
    } catch (const YAML::Exception&) {
      fail(ErrorCode::config, "config field " + field(section, key) + where(n) + ": expected a list or a:b:s range");
    } catch (const Error& e) {
      fail(ErrorCode::config, "config field " + field(section, key) + where(n) + ": " + e.what());
    }
    for (int v : out)
      if (v < 1) fail(ErrorCode::config, "config field " + field(section, key) + where(n) + ": values must be >= 1");
    return out;
  }

  std::optional<TorusPoint> point(const std::string& section, const std::string& key, int dim) const {
    if (!has(section, key)) return std::nullopt;
    const std::vector<double> v = reals(section, key, {});
    if (static_cast<int>(v.size()) != dim)
      fail(ErrorCode::config, "config field " + field(section, key) + where(node(section, key)) + ": expected " +
                                  std::to_string(dim) + " coordinates");
    Vector p(dim);
    for (int i = 0; i < dim; ++i) p[i] = v[static_cast<size_t>(i)] - std::floor(v[static_cast<size_t>(i)]);
    return TorusPoint(p);
  }

  void validate() const {
    if (!root.IsMap()) fail(ErrorCode::config, "config root must be a mapping" + where(root));
    const auto& sch = schema();
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      if (!sch.at("").count(key)) fail(ErrorCode::config, "unknown config key '" + key + "'" + where(kv.first));
      const auto sec = sch.find(key);
      if (sec == sch.end()) continue;
      if (!kv.second.IsMap()) fail(ErrorCode::config, "config section '" + key + "' must be a mapping" + where(kv.second));
      for (const auto& sub : kv.second) {
        const std::string k = sub.first.as<std::string>();
        if (!sec->second.count(k))
          fail(ErrorCode::config, "unknown config key '" + key + "." + k + "'" + where(sub.first));
      }
    }
  }

  uint64_t seed() const {
    if (!has("", "seed")) fail(ErrorCode::config, "seed is required (there is no default seed)");
    const YAML::Node n = node("", "seed");
    try {
      const std::string s = n.Scalar();
      if (s.empty() || s[0] == '-') throw YAML::BadConversion(n.Mark());
      return n.as<uint64_t>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::config, "config field seed" + where(n) + ": expected an unsigned 64-bit integer");
    }
  }

  uint64_t seed_for(const std::string& tag) const { return mix64(seed() ^ fnv1a(tag)); }
  int threads() const { return positive("", "threads", 1); }

  // --- model -----------------------------------------------------------------------------------

  IntMatrix matrix(const IntMatrix& def) const {
    const YAML::Node n = node("model", "matrix");
    if (!n.IsDefined() || n.IsNull()) return def;
    const auto bad = [&] {
      fail(ErrorCode::config, "config field model.matrix" + where(n) + ": expected a square list of integer rows (dim 1-4)");
    };
    if (!n.IsSequence()) bad();
    const int dim = static_cast<int>(n.size());
    if (dim < 1 || dim > kMaxDim) bad();
    std::vector<long long> entries;
    try {
      for (const auto& row : n) {
        if (!row.IsSequence() || static_cast<int>(row.size()) != dim) bad();
        for (const auto& e : row) entries.push_back(e.as<long long>());
      }
    } catch (const YAML::Exception&) {
      bad();
    }
    return IntMatrix::from_row_major(dim, entries);
  }

  std::shared_ptr<const Endomorphism> model() const {
    const std::string kind = choice("model", "kind", "builtin", {"builtin", "linear", "derived"});
    if (kind != "derived")
      for (const char* k : {"delta", "t", "rho", "center", "invariance_samples"})
        if (has("model", k))
          fail(ErrorCode::config, std::string("config field model.") + k + where(node("model", k)) +
                                      " only applies to kind: derived");
    if (kind == "builtin") {
      if (has("model", "matrix"))
        fail(ErrorCode::config, "config field model.matrix" + where(node("model", "matrix")) +
                                    " needs kind: linear or kind: derived");
      return builtin_model(value<std::string>("model", "name", "derived3"));
    }
    if (kind == "linear") {
      if (!has("model", "matrix")) fail(ErrorCode::config, "kind: linear requires model.matrix");
      return std::make_shared<LinearAnosov>(matrix({}), value<std::string>("model", "name", "linear"));
    }
    const LinearAnosov base(matrix({{2, 1, 0}, {1, 1, 0}, {0, 0, 2}}), "derived-base");
    DerivedParams p;
    p.radius = value("model", "delta", p.radius);
    p.t = value("model", "t", p.t);
    p.rho = value("model", "rho", p.rho);
    p.center = point("model", "center", base.dim());
    p.cone_width = value("cone", "width", p.cone_width);
    p.invariance_samples = positive("model", "invariance_samples", p.invariance_samples);
    return std::make_shared<DerivedAnosov>(base, p);
  }

  ConeSpec cone(const Endomorphism& m) const { return default_cone(m, positive_real("cone", "width", 0.1)); }

  TorusPoint seeded_point(const std::string& tag, int dim) const {
    RandomStream rng(seed_for(tag), 0);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform();
    return TorusPoint(v);
  }

  // --- budget ----------------------------------------------------------------------------------

  void charge(double projected) const {
    const double cap = positive_real("budget", "max_steps", 2e10);
    if (projected > cap) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "projected cost %.3g orbit steps exceeds budget.max_steps = %.3g", projected, cap);
      fail(ErrorCode::budget, buf);
    }
  }

  // --- shared pieces ---------------------------------------------------------------------------

  SrbOptions srb_options(int dim) const {
    SrbOptions o;
    o.samples = positive("srb", "samples", o.samples);
    o.iterates = positive("srb", "iterates", o.iterates);
    o.resolution = positive("srb", "resolution", dim == 2 ? 64 : 16);
    o.burn_in = static_cast<int>(value<long long>("srb", "burn_in", o.burn_in));
    if (o.burn_in < 0) fail(ErrorCode::config, "config field srb.burn_in" + where(node("srb", "burn_in")) + ": must be >= 0");
    o.seed = seed_for("srb");
    o.threads = threads();
    return o;
  }

  double srb_cost(int dim) const {
    const SrbOptions o = srb_options(dim);
    return static_cast<double>(o.samples) * (o.iterates + o.burn_in);
  }

  EmpiricalMeasure srb(const Endomorphism& m, const ConeSpec& c) const {
    const TorusPoint center = point("srb", "disk_center", m.dim()).value_or(seeded_point("disk", m.dim()));
    const DiskSpec disk = default_disk(m, center, positive_real("srb", "disk_radius", 0.05));
    return empirical_srb(m, c, disk, srb_options(m.dim()));
  }

  double c_value(const std::string& section, const Endomorphism& m, const ConeSpec& cone, ojson& derived) const {
    double c = value<double>(section, "c", 0.0);
    if (c <= 0.0) {
      const DefaultC d = default_c(m, cone, seed_for("c"));
      c = d.c;
      derived["c_pilot_mean"] = d.pilot_mean;
    }
    derived["c"] = c;
    return c;
  }

  // --- runners ---------------------------------------------------------------------------------

  RunResult run_hyptimes(const Endomorphism& m, const ConeSpec& cone, Output& out, ojson& summary, ojson& derived) const {
    const int length = positive("hyptimes", "length", 10000);
    const int orbits = positive("hyptimes", "orbits", 100);
    const int tail_samples = positive("hyptimes", "tail_samples", 100000);
    const int tail_n_max = positive("hyptimes", "tail_n_max", 30);
    const double tol = positive_real("hyptimes", "lacunarity_tolerance", 0.05);
    const double k2 = positive_real("hyptimes", "k2", 10.0);
    if (tail_samples < 1000) fail(ErrorCode::config, "config field hyptimes.tail_samples: must be at least 1000");
    charge(static_cast<double>(orbits) * length + static_cast<double>(tail_samples) * tail_n_max);
    const double c = c_value("hyptimes", m, cone, derived);
    const double jc = jacobian_constant(m, 20000, seed_for("jacobian"));
    derived["jacobian_c"] = jc;

    struct Row {
      TorusPoint x;
      HyperbolicTimeRecord rec;
      double theta = 0.0;
      bool pliss_ok = true, nonlacunar = false;
      double weak_gibbs = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows(static_cast<size_t>(orbits));
    const uint64_t orbit_seed = seed_for("orbits");
    parallel_for(rows.size(), threads(), [&](size_t begin, size_t end, int) {
      for (size_t i = begin; i < end; ++i) {
        Row& r = rows[i];
        RandomStream rng(orbit_seed, i);
        r.x = sample_point(m, rng, false);
        const OrbitLog log = orbit_log(m, cone, r.x, length);
        r.rec = detect_hyperbolic_times(log, c);
        double bound = -std::numeric_limits<double>::infinity();
        for (double a : log.a) bound = std::max(bound, -a);
        try {
          r.theta = pliss_select(log.a, c, bound).theta;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::internal) throw;
          r.pliss_ok = false;
        }
        if (r.rec.times.size() >= 10) r.nonlacunar = nonlacunarity_check(r.rec, tol).pass;
        if (!r.rec.times.empty()) r.weak_gibbs = weak_gibbs_sequence(r.rec, length, k2, jc).back();
      }
    });

    Table t{{"orbit"}, {}};
    for (int i = 0; i < m.dim(); ++i) t.columns.push_back("x" + std::to_string(i + 1));
    for (const char* col : {"times", "density", "max_gap", "pliss_theta", "pliss_ok", "nonlacunar", "weak_gibbs"})
      t.columns.push_back(col);
    int pliss_fail = 0, nonlac = 0, gibbs_ok = 0;
    double dmin = std::numeric_limits<double>::infinity(), dsum = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      std::vector<Cell> row{static_cast<long long>(i)};
      for (int k = 0; k < m.dim(); ++k) row.push_back(r.x[k]);
      row.push_back(static_cast<long long>(r.rec.times.size()));
      row.push_back(r.rec.density());
      row.push_back(static_cast<long long>(r.rec.max_gap()));
      row.push_back(r.theta);
      row.push_back(r.pliss_ok);
      row.push_back(r.nonlacunar);
      row.push_back(r.weak_gibbs);
      t.rows.push_back(std::move(row));
      pliss_fail += !r.pliss_ok;
      nonlac += r.nonlacunar;
      gibbs_ok += r.weak_gibbs < 0.01;
      dmin = std::min(dmin, r.rec.density());
      dsum += r.rec.density();
    }
    out.table("hyptimes_orbits", t);

    const TailCurve tail = first_time_tail(m, cone, c, tail_n_max, tail_samples, seed_for("tail"));
    Table tt{{"n", "tail"}, {}};
    for (size_t n = 0; n < tail.tail.size(); ++n) tt.rows.push_back({static_cast<long long>(n), tail.tail[n]});
    out.table("hyptimes_tail", tt);

    const double frac = static_cast<double>(nonlac) / orbits;
    summary["c"] = c;
    summary["orbits"] = orbits;
    summary["length"] = length;
    summary["density_min"] = dmin;
    summary["density_mean"] = dsum / orbits;
    summary["pliss_failures"] = pliss_fail;
    summary["nonlacunar_fraction"] = frac;
    summary["weak_gibbs_fraction_below_0.01"] = static_cast<double>(gibbs_ok) / orbits;
    summary["tail_degenerate"] = tail.degenerate;
    summary["tail_slope"] = json_number(tail.fit.slope);
    summary["tail_slope_se"] = json_number(tail.degenerate ? std::nan("") : tail.fit.slope_se);
    summary["tail_r2"] = json_number(tail.degenerate ? std::nan("") : tail.fit.r2);
    RunResult res;
    res.pass = pliss_fail == 0 && frac >= 0.9;
    res.verdict = res.pass ? "Pliss floors met, non-lacunar on " + fmt_double(frac) + " of orbits"
                           : "Pliss failures " + std::to_string(pliss_fail) + ", non-lacunar fraction " + fmt_double(frac);
    return res;
  }

  RunResult run_volume(const Endomorphism& m, const ConeSpec& cone, Output& out, ojson& summary, ojson& derived) const {
    CurveOptions o;
    o.ball.eps = positive_real("volume_lemma", "eps", 0.05);
    o.ball.samples = positive("volume_lemma", "samples", 100000);
    o.ball.seed = seed_for("volume");
    o.ball.threads = threads();
    o.ball.plaque_points = positive("volume_lemma", "plaque_points", 4);
    o.ball.metric = choice("volume_lemma", "metric", "adapted", {"adapted", "euclidean"}) == "adapted"
                        ? BallMetric::adapted
                        : BallMetric::euclidean;
    o.method = choice("volume_lemma", "method", "cov", {"cov", "rejection"}) == "cov" ? VolumeMethod::change_of_variables
                                                                                      : VolumeMethod::rejection;
    o.k_cap = positive_real("volume_lemma", "k_cap", 1e3);
    const bool use_srb = choice("volume_lemma", "measure", "lebesgue", {"lebesgue", "srb"}) == "srb";
    const std::vector<int> ns = n_list("volume_lemma", "n", "2:20:2");
    const int n_max = *std::max_element(ns.begin(), ns.end());
    charge(static_cast<double>(o.ball.samples) * n_max * static_cast<double>(ns.size()) + n_max +
           (use_srb ? srb_cost(m.dim()) : 0.0));
    const TorusPoint x = point("volume_lemma", "center", m.dim()).value_or(seeded_point("center", m.dim()));
    o.c = c_value("volume_lemma", m, cone, derived);

    const HyperbolicTimeRecord rec = detect_hyperbolic_times(orbit_log(m, cone, x, n_max), o.c);
    std::vector<int> usable, skipped;
    for (int n : ns)
      (std::binary_search(rec.times.begin(), rec.times.end(), n) ? usable : skipped).push_back(n);
    if (usable.size() < 2)
      fail(ErrorCode::input, "fewer than two requested n are c-cone-hyperbolic times of the center point");

    EmpiricalMeasure h;
    if (use_srb) {
      h = srb(m, cone);
      o.ball.density = &h;
    }
    const VolumeRatioCurve curve = volume_lemma_curve(m, cone, x, Subspace(cone.center()), usable, o);
    Table t{{"n", "estimate", "stderr", "logdet", "ratio", "ratio_se", "valid"}, {}};
    for (const auto& p : curve.points)
      t.rows.push_back({static_cast<long long>(p.n), p.estimate, p.stderr_, p.logdet, p.ratio, p.ratio_se, p.valid});
    out.table("volume_lemma", t);

    summary["center"] = point_json(x);
    summary["eps"] = o.ball.eps;
    summary["measure"] = curve.measure;
    summary["method"] = to_string(o.method);
    summary["metric"] = to_string(o.ball.metric);
    summary["c"] = curve.c;
    summary["skipped_n"] = skipped;
    summary["max_over_min"] = json_number(curve.max_over_min);
    summary["trend_slope"] = json_number(curve.trend.slope);
    summary["trend_slope_se"] = json_number(curve.trend.slope_se);
    summary["bounded"] = curve.bounded;
    summary["trendless"] = curve.trendless;
    summary["pairwise_consistent"] = curve.pairwise_consistent;
    summary["all_valid"] = curve.all_valid;
    summary["k2"] = curve.k2;
    derived["k2"] = curve.k2;
    RunResult res;
    res.pass = curve.pass;
    res.verdict = curve.pass ? "volume ratio bounded and trendless (max/min " + fmt_double(curve.max_over_min) + ")"
                             : std::string("volume ratio check failed:") + (curve.bounded ? "" : " unbounded") +
                                   (curve.trendless ? "" : " trend") + (curve.all_valid ? "" : " invalid estimates");
    return res;
  }

  RunResult run_srb(const Endomorphism& m, const ConeSpec& cone, Output& out, ojson& summary) const {
    charge(srb_cost(m.dim()));
    const double tol = positive_real("srb", "tv_tolerance", 0.02);
    const EmpiricalMeasure h = srb(m, cone);
    h.save((out.dir / "srb.bin").string());
    out.files.push_back("srb.bin");
    const double tv = h.tv_to_uniform();
    const auto [lo, hi] = std::minmax_element(h.masses().begin(), h.masses().end());
    Table t{{"key", "value"}, {}};
    t.rows.push_back({std::string("dim"), static_cast<double>(h.dim())});
    t.rows.push_back({std::string("resolution"), static_cast<double>(h.resolution())});
    t.rows.push_back({std::string("samples"), static_cast<double>(h.samples)});
    t.rows.push_back({std::string("iterates"), static_cast<double>(h.iterates)});
    t.rows.push_back({std::string("burn_in"), static_cast<double>(h.burn_in)});
    t.rows.push_back({std::string("tv_to_uniform"), tv});
    t.rows.push_back({std::string("min_mass"), *lo});
    t.rows.push_back({std::string("max_mass"), *hi});
    out.table("srb_summary", t);
    summary["tv_to_uniform"] = tv;
    summary["bins"] = h.bins();
    RunResult res;
    if (m.is_linear()) {
      summary["tv_tolerance"] = tol;
      res.pass = tv <= tol;
      res.verdict = "TV to Haar " + fmt_double(tv) + (res.pass ? " <= " : " > ") + fmt_double(tol);
    } else {
      res.pass = true;
      res.verdict = "histogram built (no closed-form SRB to compare against)";
    }
    return res;
  }

  RunResult run_lyapunov(const Endomorphism& m, Output& out, ojson& summary) const {
    const int n = positive("lyapunov", "n", 10000);
    const int reorth = positive("lyapunov", "reorth", 10);
    const double tol = positive_real("lyapunov", "tolerance", 1e-3);
    charge(static_cast<double>(n));
    const TorusPoint x = point("lyapunov", "x0", m.dim()).value_or(seeded_point("x0", m.dim()));
    const LyapunovResult r = lyapunov_spectrum(m, x, n, reorth);
    std::vector<double> ref(r.exponents.size(), std::numeric_limits<double>::quiet_NaN());
    const auto* lin = dynamic_cast<const LinearAnosov*>(&m);
    if (lin)
      for (size_t i = 0; i < ref.size(); ++i) ref[i] = std::log(std::abs(lin->eigen().values[i]));
    Table t{{"index", "exponent", "reference", "abs_error"}, {}};
    double worst = 0.0, sum = 0.0;
    for (size_t i = 0; i < r.exponents.size(); ++i) {
      const double err = std::abs(r.exponents[i] - ref[i]);
      if (lin) worst = std::max(worst, err);
      sum += r.exponents[i];
      t.rows.push_back({static_cast<long long>(i + 1), r.exponents[i], ref[i], err});
    }
    out.table("lyapunov", t);
    const double identity = std::abs(sum - r.log_det_average);
    summary["x0"] = point_json(x);
    summary["n"] = n;
    summary["log_det_average"] = r.log_det_average;
    summary["sum_identity_error"] = identity;
    RunResult res;
    if (lin) {
      summary["max_abs_error"] = worst;
      res.pass = worst <= tol;
      res.verdict = "max |exponent - log|eigenvalue|| = " + fmt_double(worst);
    } else {
      res.pass = identity <= 1e-8;
      res.verdict = "sum of exponents vs mean log|det|: " + fmt_double(identity);
    }
    return res;
  }

  RunResult run_ldp(const Endomorphism& m, const ConeSpec& cone, Output& out, ojson& summary, ojson& derived) const {
    const NamedObservable phi = builtin_observable(value<std::string>("ldp", "observable", "cos_x1"), m.dim());
    const double delta = positive_real("ldp", "delta", 0.1);
    const std::vector<int> ns = n_list("ldp", "n", "50:500:50");
    DeviationOptions o;
    o.samples = positive("ldp", "samples", 100000);
    o.seed = seed_for("ldp");
    o.threads = threads();
    const std::vector<double> betas = reals("ldp", "betas", {0.1, 0.2, 0.4});
    const int rate_n_max = positive("ldp", "rate_n_max", 30);
    const int rate_samples = positive("ldp", "rate_samples", 100000);
    const int pesin_n = positive("ldp", "pesin_n", 200);
    const int pesin_points = positive("ldp", "pesin_points", 100);
    double steps = 0.0;
    for (int n : ns) steps += n;
    charge(steps * o.samples + srb_cost(m.dim()) + static_cast<double>(rate_samples) * rate_n_max +
           8.0 * pesin_n * pesin_points);

    const double c = c_value("ldp", m, cone, derived);
    const EmpiricalMeasure h = srb(m, cone);
    const DeviationCurve curve = deviation_curve(m, h, phi, delta, ns, o);
    Table t{{"phi_id", "delta", "n", "P_n", "log_rate", "censored", "hits", "samples", "upper"}, {}};
    for (const auto& r : curve.rows)
      t.rows.push_back({curve.phi_id, curve.delta, static_cast<long long>(r.n), r.p, r.log_rate, r.censored,
                        static_cast<long long>(r.hits), static_cast<long long>(r.samples), r.upper});
    out.table("ldp_deviations", t);

    const RateBound rb = e_mu_beta(m, cone, h, c, betas, rate_n_max, rate_samples, seed_for("rates"));
    Table rt{{"beta", "E", "stderr", "censored", "fit_ok", "points"}, {}};
    for (const auto& e : rb.rates)
      rt.rows.push_back({e.beta, e.slope, e.slope_se, e.censored_at_floor, e.fit_ok, static_cast<long long>(e.points)});
    out.table("ldp_rates", rt);

    const PesinDefect pd = pesin_defect(m, cone, h, pesin_n, pesin_points, seed_for("pesin"));
    const bool negative = curve.fit_ok && curve.fit.slope + 2.0 * curve.fit.slope_se < 0.0;
    const bool bound_ok = curve.fit_ok && curve.fit.slope <= rb.proxy_bound + 2.0 * curve.fit.slope_se;
    summary["observable"] = curve.phi_id;
    summary["delta"] = delta;
    summary["mean"] = curve.mean;
    summary["grid_modulus"] = curve.grid_modulus;
    summary["fit_ok"] = curve.fit_ok;
    summary["slope"] = json_number(curve.fit.slope);
    summary["slope_se"] = json_number(curve.fit_ok ? curve.fit.slope_se : std::nan(""));
    summary["r2"] = json_number(curve.fit_ok ? curve.fit.r2 : std::nan(""));
    summary["jacobian_c"] = rb.jacobian_c;
    summary["tail_slope"] = json_number(rb.tail.degenerate ? std::nan("") : rb.tail.fit.slope);
    summary["inf_e"] = json_number(rb.inf_e);
    summary["i_proxy"] = rb.i_proxy;
    summary["proxy_bound"] = json_number(rb.proxy_bound);
    summary["bound_ok"] = bound_ok;
    summary["gamma_integral"] = pd.gamma_integral;
    summary["gamma_se"] = pd.gamma_se;
    summary["entropy_available"] = pd.entropy_available;
    summary["entropy"] = pd.entropy_available ? json_number(pd.entropy) : ojson(nullptr);
    summary["pesin_defect"] = pd.entropy_available ? json_number(pd.defect) : ojson(nullptr);
    RunResult res;
    const bool pesin_ok = !pd.entropy_available || std::abs(pd.defect) < 1e-2;
    res.pass = negative && pesin_ok;
    res.verdict = !curve.fit_ok ? "deviation fit refused (fewer than 3 uncensored n)"
                  : !negative   ? "deviation slope not negative at 2 sigma"
                  : !pesin_ok   ? "Pesin defect above 1e-2"
                                : "deviation slope " + fmt_double(curve.fit.slope) + " negative at 2 sigma";
    return res;
  }

  RunResult run_validate(const Endomorphism& m, const ConeSpec& cone, Output& out, ojson& summary) const {
    const int samples = positive("validate", "samples", 100000);
    const int ns = positive("validate", "nonsingular_samples", 1000000);
    charge(static_cast<double>(samples) + ns);
    Table t{{"check", "value", "threshold", "relation", "pass"}, {}};
    bool all = true;
    const auto row = [&](const std::string& name, double v, double thr, const std::string& rel) {
      const bool ok = rel == "<" ? v < thr : rel == "<=" ? v <= thr : v > thr;
      all = all && ok;
      t.rows.push_back({name, v, thr, rel, ok});
    };
    if (const auto* d = dynamic_cast<const DerivedAnosov*>(&m)) {
      const auto& l = d->base_eigenvalues();
      const RhoConditions rc = check_rho_conditions(l[0], l[1], d->params().rho);
      row("rho_domination", rc.domination, 1.0, "<");
      row("rho_volume_expansion", rc.expansion, 1.0, ">");
      row("fixed_point_error", torus_distance(m.eval(d->center()), d->center()), 1e-12, "<=");
    }
    const InvarianceReport inv = cone_invariance_check(m, cone, samples, seed_for("invariance"));
    row("cone_invariance_margin", inv.min_margin, 0.0, ">");
    double min_det = std::numeric_limits<double>::infinity();
    {
      RandomStream rng(seed_for("nonsingular"), 0);
      for (int i = 0; i < ns; ++i)
        min_det = std::min(min_det, std::abs(determinant(m.derivative(sample_point(m, rng, i % 2 == 1)))));
    }
    row("min_abs_det", min_det, 1e-12, ">");
    const DominationEstimate dom = domination_constant(m, cone, std::min(samples, 20000), seed_for("domination"));
    row("domination_lambda", dom.lambda, 1.0, "<");
    const auto pre = enumerate_preimages(m, seeded_point("preimage", m.dim()));
    row("preimage_count_minus_degree", std::abs(static_cast<double>(pre.size()) - m.degree()), 0.0, "<=");
    out.table("validate", t);
    summary["checks"] = t.rows.size();
    summary["all_pass"] = all;
    RunResult res;
    res.pass = all;
    res.verdict = all ? "all model checks pass" : "some model checks fail";
    return res;
  }
};

Experiment::Experiment() : impl_(std::make_unique<Impl>()) {}
Experiment::~Experiment() = default;

void Experiment::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  load_string(ss.str());
}

void Experiment::load_string(const std::string& text) {
  YAML::Node n;
  try {
    n = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::config, "malformed config (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
  }
  if (n.IsNull()) n = YAML::Node(YAML::NodeType::Map);
  Impl next;
  next.root = n;
  next.validate();
  impl_->root = n;
}

void Experiment::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
  const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  const auto& sch = schema();
  const auto sec = sch.find(section);
  if (sec == sch.end() || !sec->second.count(leaf) || (section.empty() && sch.count(leaf)) ||
      leaf.find('.') != std::string::npos)
    fail(ErrorCode::config, "unknown config key '" + key + "'");
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::config, "malformed value for " + key + ": " + e.msg);
  }
  YAML::Node clone = YAML::Clone(impl_->root);
  if (section.empty()) {
    clone[leaf] = v;
  } else {
    if (!clone[section].IsDefined() || clone[section].IsNull()) clone[section] = YAML::Node(YAML::NodeType::Map);
    clone[section][leaf] = v;
  }
  impl_->root = clone;
}

std::string Experiment::get(const std::string& key) const {
  const auto dot = key.find('.');
  const YAML::Node n = dot == std::string::npos ? impl_->node("", key) : impl_->node(key.substr(0, dot), key.substr(dot + 1));
  if (!n.IsDefined() || n.IsNull()) return "";
  YAML::Emitter e;
  e << YAML::Flow << n;
  return e.c_str();
}

const std::vector<std::string>& Experiment::subcommands() {
  static const std::vector<std::string> s{"hyptimes", "volume-lemma", "srb", "lyapunov", "ldp", "validate-model"};
  return s;
}

std::string Experiment::library_version() { return kVersion; }

RunResult Experiment::run(const std::string& sub) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), sub) == subs.end())
    fail(ErrorCode::input, "unknown subcommand '" + sub + "'");
  const Impl& im = *impl_;
  im.validate();
  const uint64_t seed = im.seed();
  const std::string started = utc_now();
  const std::string format = im.choice("", "format", "csv", {"csv", "json"});
  const fs::path dir = fs::path(im.value<std::string>("", "out", "phlab_out")) / sub;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  fs::remove(dir / "manifest.json", ec);

  const auto model = im.model();
  const ConeSpec cone = im.cone(*model);
  Output out{dir, format, {}};
  ojson summary = ojson::object();
  ojson derived = ojson::object();
  summary["subcommand"] = sub;
  summary["model"] = model->name();
  summary["seed"] = seed;

  RunResult res;
  if (sub == "hyptimes") res = im.run_hyptimes(*model, cone, out, summary, derived);
  else if (sub == "volume-lemma") res = im.run_volume(*model, cone, out, summary, derived);
  else if (sub == "srb") res = im.run_srb(*model, cone, out, summary);
  else if (sub == "lyapunov") res = im.run_lyapunov(*model, out, summary);
  else if (sub == "ldp") res = im.run_ldp(*model, cone, out, summary, derived);
  else res = im.run_validate(*model, cone, out, summary);

  summary["pass"] = res.pass;
  summary["verdict"] = res.verdict;
  res.summary_json = summary.dump(2);
  write_text(dir / "summary.json", res.summary_json + "\n");
  out.files.push_back("summary.json");

  derived["measured_lambda"] = domination_constant(*model, cone, 2000, im.seed_for("lambda")).lambda;
  derived["k0_envelope"] = distortion_envelope(*model, cone, 100, 10, im.seed_for("k0")).k0;
  YAML::Emitter cfg;
  cfg << im.root;
  ojson manifest = ojson::object();
  manifest["library"] = "phlab";
  manifest["version"] = kVersion;
  manifest["subcommand"] = sub;
  manifest["seed"] = seed;
  manifest["config"] = std::string(cfg.c_str());
  manifest["started"] = started;
  manifest["finished"] = utc_now();
  manifest["files"] = out.files;
  manifest["derived"] = derived;
  manifest["pass"] = res.pass;
  manifest["verdict"] = res.verdict;
  const fs::path tmp = dir / "manifest.json.tmp";
  write_text(tmp, manifest.dump(2) + "\n");
  fs::rename(tmp, dir / "manifest.json", ec);
  if (ec) fail(ErrorCode::io, "cannot finalize manifest: " + ec.message());

  res.directory = dir.string();
  res.files = out.files;
  return res;
}

}  // namespace phlab
