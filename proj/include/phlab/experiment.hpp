#pragma once

#include <memory>
#include <string>
#include <vector>

namespace phlab {

struct RunResult {
  bool pass = false;
  std::string verdict;              // one-line reason
  std::string directory;            // <out>/<subcommand>
  std::vector<std::string> files;   // result files, relative to `directory`
  std::string summary_json;
};

// Config-driven front end shared by the C API and the CLI. The config is YAML; unknown keys are
// errors. Results go to <out>/<subcommand>/ followed by an atomically written manifest.json.
class Experiment {
 public:
  Experiment();
  ~Experiment();
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  void load_file(const std::string& path);
  void load_string(const std::string& text);
  // Dotted key, e.g. "volume_lemma.eps"; the value is parsed as YAML ("0.05", "[1, 2]", "2:20:2").
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  RunResult run(const std::string& subcommand);

  static const std::vector<std::string>& subcommands();
  static std::string library_version();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "a:b:s" (inclusive), "a:b" (step 1) or a single integer.
std::vector<int> parse_range(const std::string& text);

}  // namespace phlab
