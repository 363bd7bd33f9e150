#pragma once

// Experiment configuration: a flat INI file with one [experiment] section for
// the shared settings and one section named after the experiment for its
// parameters. Every run echoes the fully resolved config.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nhlaw/block.hpp"
#include "nhlaw/ensemble.hpp"

namespace nhlaw {

/// Spectral-parameter rule. Text forms: "0.01" (absolute), "inv:c" (c/n),
/// "pow:c,a" (c n^{-a}), "fluct:c" (c eta_f(z)).
struct EtaRule {
  enum class Kind { Absolute, Inverse, Power, Fluctuation };
  Kind kind = Kind::Absolute;
  double c = 0.0;
  double a = 0.0;

  double resolve(int n, cd z) const;
  std::string str() const;
  static EtaRule parse(const std::string& text);
};

struct ExperimentConfig {
  std::string experiment;
  Field field = Field::Complex;
  Distribution distribution = Distribution::Gaussian;
  std::uint64_t seed = 1;
  int trials = 0;           // 0 = experiment default
  std::vector<int> n_list;  // empty = experiment default
  int threads = 0;  // 0 = hardware concurrency; never affects results
  std::map<std::string, std::string> params;

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  cd get_complex(const std::string& key) const;
  EtaRule get_eta(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  bool has(const std::string& key) const { return params.count(key) != 0; }

  EnsembleSpec ensemble(int n) const;

  /// Canonical INI text; parse_config(to_ini()) reproduces the config.
  /// Reports omit the thread count so they do not depend on it.
  std::string to_ini(bool with_threads = true) const;
};

/// Complex numbers are written "re" or "re,im".
cd parse_complex(const std::string& text);
std::string format_complex(cd z);
std::string format_double(double x);
std::vector<int> parse_int_list(const std::string& text);
std::string format_int_list(const std::vector<int>& v);

/// Parses INI text; throws InvalidConfig on malformed input or unknown keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace nhlaw
