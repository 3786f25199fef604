#include "phlab/phlab.h"

#include <memory>
#include <string>

#include "phlab/experiment.hpp"
#include "phlab/measure.hpp"

struct phlab_model {
  std::shared_ptr<const phlab::Endomorphism> impl;
};

struct phlab_experiment {
  phlab::Experiment impl;
  phlab::RunResult last;
};

namespace {

thread_local std::string g_last_error;

template <class F>
phlab_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PHLAB_OK;
  } catch (const phlab::Error& e) {
    g_last_error = e.what();
    return static_cast<phlab_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PHLAB_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown exception";
    return PHLAB_ERR_UNKNOWN;
  }
}

phlab_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return PHLAB_ERR_NULL;
}

phlab::TorusPoint to_point(const phlab_model* m, const double* x) {
  phlab::Vector v(m->impl->dim());
  for (int i = 0; i < v.size(); ++i) v[i] = x[i];
  return phlab::TorusPoint(v);
}

phlab::IntMatrix int_matrix(int dim, const int64_t* entries) {
  std::vector<long long> e(entries, entries + dim * dim);
  return phlab::IntMatrix::from_row_major(dim, e);
}

}  // namespace

extern "C" {

const char* phlab_version(void) {
  static const std::string v = phlab::Experiment::library_version();
  return v.c_str();
}

const char* phlab_status_name(phlab_status s) {
  switch (s) {
    case PHLAB_OK: return "ok";
    case PHLAB_ERR_NULL: return "null_argument";
    case PHLAB_ERR_UNKNOWN: return "unknown";
    default:
      if (s >= PHLAB_ERR_INPUT && s <= PHLAB_ERR_BUDGET)
        return phlab::error_code_name(static_cast<phlab::ErrorCode>(static_cast<int>(s)));
      return "invalid_status";
  }
}

const char* phlab_last_error(void) { return g_last_error.c_str(); }

phlab_status phlab_model_builtin(const char* name, phlab_model** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phlab_model{phlab::builtin_model(name)}; });
}

phlab_status phlab_model_linear(int dim, const int64_t* entries, phlab_model** out) {
  if (!entries) return null_arg("entries");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    phlab::require(dim >= 1 && dim <= phlab::kMaxDim, phlab::ErrorCode::input, "dimension must be 1..4");
    *out = new phlab_model{std::make_shared<phlab::LinearAnosov>(int_matrix(dim, entries))};
  });
}

phlab_status phlab_model_derived(const int64_t* entries, double delta, double t, double rho, phlab_model** out) {
  if (!entries) return null_arg("entries");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    phlab::DerivedParams p;
    p.radius = delta;
    p.t = t;
    p.rho = rho;
    *out = new phlab_model{
        std::make_shared<phlab::DerivedAnosov>(phlab::LinearAnosov(int_matrix(3, entries)), p)};
  });
}

void phlab_model_free(phlab_model* m) { delete m; }

int phlab_model_dim(const phlab_model* m) { return m ? m->impl->dim() : 0; }
int phlab_model_degree(const phlab_model* m) { return m ? m->impl->degree() : 0; }

phlab_status phlab_model_eval(const phlab_model* m, const double* x, double* out) {
  if (!m) return null_arg("model");
  if (!x || !out) return null_arg("x/out");
  return guarded([&] {
    const phlab::TorusPoint y = m->impl->eval(to_point(m, x));
    for (int i = 0; i < y.dim(); ++i) out[i] = y[i];
  });
}

phlab_status phlab_model_derivative(const phlab_model* m, const double* x, double* out) {
  if (!m) return null_arg("model");
  if (!x || !out) return null_arg("x/out");
  return guarded([&] {
    const phlab::Matrix d = m->impl->derivative(to_point(m, x));
    const int n = d.rows();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = d(i, j);
  });
}

phlab_status phlab_model_lyapunov(const phlab_model* m, const double* x, int n, double* out) {
  if (!m) return null_arg("model");
  if (!x || !out) return null_arg("x/out");
  return guarded([&] {
    const auto r = phlab::lyapunov_spectrum(*m->impl, to_point(m, x), n);
    for (size_t i = 0; i < r.exponents.size(); ++i) out[i] = r.exponents[i];
  });
}

phlab_status phlab_experiment_create(phlab_experiment** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phlab_experiment(); });
}

void phlab_experiment_free(phlab_experiment* e) { delete e; }

phlab_status phlab_experiment_load_config(phlab_experiment* e, const char* path) {
  if (!e) return null_arg("experiment");
  if (!path) return null_arg("path");
  return guarded([&] { e->impl.load_file(path); });
}

phlab_status phlab_experiment_load_config_string(phlab_experiment* e, const char* yaml) {
  if (!e) return null_arg("experiment");
  if (!yaml) return null_arg("yaml");
  return guarded([&] { e->impl.load_string(yaml); });
}

phlab_status phlab_experiment_set(phlab_experiment* e, const char* key, const char* value) {
  if (!e) return null_arg("experiment");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { e->impl.set(key, value); });
}

phlab_status phlab_experiment_run(phlab_experiment* e, const char* sub, int* pass) {
  if (!e) return null_arg("experiment");
  if (!sub) return null_arg("subcommand");
  return guarded([&] {
    e->last = phlab::RunResult{};
    e->last = e->impl.run(sub);
    if (pass) *pass = e->last.pass ? 1 : 0;
  });
}

const char* phlab_experiment_verdict(const phlab_experiment* e) { return e ? e->last.verdict.c_str() : ""; }
const char* phlab_experiment_summary_json(const phlab_experiment* e) { return e ? e->last.summary_json.c_str() : ""; }
const char* phlab_experiment_output_dir(const phlab_experiment* e) { return e ? e->last.directory.c_str() : ""; }

}  // extern "C"
