// phlab command-line front end. Links only the C API.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phlab/phlab.h"

namespace {

std::string yaml_quote(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') q += '\\';
    q += ch;
  }
  return q + "\"";
}

struct Override {
  std::string key;
  std::string value;
  bool quote = false;
};

// Subcommand flag -> config key. Text values are quoted before being handed to the YAML parser.
struct Flag {
  const char* name;
  const char* key;
  const char* help;
  bool text = false;
};

const std::map<std::string, std::vector<Flag>>& flags() {
  static const std::map<std::string, std::vector<Flag>> f{
      {"hyptimes",
       {{"--c", "hyptimes.c", "hyperbolic-time constant (<= 0: automatic)"},
        {"--length", "hyptimes.length", "orbit length"},
        {"--orbits", "hyptimes.orbits", "number of orbits"},
        {"--tail-samples", "hyptimes.tail_samples", "samples for the first-time tail"},
        {"--tail-n-max", "hyptimes.tail_n_max", "largest n in the first-time tail"}}},
      {"volume-lemma",
       {{"--eps", "volume_lemma.eps", "ball radius"},
        {"--n", "volume_lemma.n", "times, a:b:s or a single n", true},
        {"--samples", "volume_lemma.samples", "Monte Carlo samples per n"},
        {"--method", "volume_lemma.method", "cov | rejection", true},
        {"--metric", "volume_lemma.metric", "adapted | euclidean", true},
        {"--measure", "volume_lemma.measure", "lebesgue | srb", true},
        {"--c", "volume_lemma.c", "hyperbolic-time constant (<= 0: automatic)"}}},
      {"srb",
       {{"--samples", "srb.samples", "disk samples"},
        {"--iterates", "srb.iterates", "Cesaro length"},
        {"--resolution", "srb.resolution", "histogram bins per axis"},
        {"--burn-in", "srb.burn_in", "skipped iterates"}}},
      {"lyapunov",
       {{"--n", "lyapunov.n", "orbit length"}, {"--reorth", "lyapunov.reorth", "QR period"}}},
      {"ldp",
       {{"--observable", "ldp.observable", "cos_x1 | cos_x2 | sin_x1 | const", true},
        {"--delta", "ldp.delta", "deviation threshold"},
        {"--n", "ldp.n", "times, a:b:s", true},
        {"--samples", "ldp.samples", "samples per n"}}},
      {"validate-model",
       {{"--samples", "validate.samples", "cone-invariance samples"},
        {"--nonsingular-samples", "validate.nonsingular_samples", "determinant samples"}}},
  };
  return f;
}

const std::map<std::string, std::string> descriptions{
    {"hyptimes", "hyperbolic times along orbits, first-time tail, weak Gibbs constants"},
    {"volume-lemma", "dynamic-ball volume ratios at hyperbolic times"},
    {"srb", "empirical SRB histogram from a disk tangent to the cone"},
    {"lyapunov", "Lyapunov spectrum by QR iteration"},
    {"ldp", "Birkhoff deviation probabilities, tail rates, Pesin defect"},
    {"validate-model", "model checks: rho conditions, cone invariance, domination, degree"},
};

int report(phlab_status s, const char* what) {
  std::fprintf(stderr, "phlab: %s failed [%s]: %s\n", what, phlab_status_name(s), phlab_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for partially hyperbolic torus endomorphisms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("phlab ") + phlab_version());

  std::string config, out, format, model;
  std::string seed;
  int threads = 0;
  std::vector<std::string> sets;
  app.add_option("--config", config, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (unsigned 64-bit)")->required();
  app.add_option("--out", out, "output directory (default phlab_out)")->envname("PHLAB_OUT");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--model", model, "built-in model: cat2 | paper3 | derived3");
  app.add_option("--set", sets, "config override key=value (repeatable)");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fl] : flags()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->fallthrough();
    subs[name] = sub;
    for (const Flag& f : fl) sub->add_option(f.name, values[name][f.key], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string chosen;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) chosen = name;

  std::vector<Override> ov;
  ov.push_back({"seed", seed});
  if (!out.empty()) ov.push_back({"out", out, true});
  if (!format.empty()) ov.push_back({"format", format, true});
  if (threads > 0) ov.push_back({"threads", std::to_string(threads)});
  if (!model.empty()) {
    ov.push_back({"model.kind", "builtin", true});
    ov.push_back({"model.name", model, true});
  }
  for (const Flag& f : flags().at(chosen)) {
    const std::string& v = values[chosen][f.key];
    if (subs[chosen]->count(f.name)) ov.push_back({f.key, v, f.text});
  }
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "phlab: --set expects key=value, got '%s'\n", kv.c_str());
      return 1;
    }
    ov.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
  }

  phlab_experiment* exp = nullptr;
  if (phlab_status s = phlab_experiment_create(&exp)) return report(s, "create");
  int rc = 1;
  do {
    if (!config.empty())
      if (phlab_status s = phlab_experiment_load_config(exp, config.c_str())) {
        rc = report(s, "config");
        break;
      }
    bool ok = true;
    for (const Override& o : ov) {
      const std::string v = o.quote ? yaml_quote(o.value) : o.value;
      if (phlab_status s = phlab_experiment_set(exp, o.key.c_str(), v.c_str())) {
        rc = report(s, ("option " + o.key).c_str());
        ok = false;
        break;
      }
    }
    if (!ok) break;
    int pass = 0;
    if (phlab_status s = phlab_experiment_run(exp, chosen.c_str(), &pass)) {
      rc = report(s, chosen.c_str());
      break;
    }
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", chosen.c_str(), phlab_experiment_verdict(exp));
    std::printf("results in %s\n", phlab_experiment_output_dir(exp));
    rc = pass ? 0 : 2;
  } while (false);
  phlab_experiment_free(exp);
  return rc;
}
