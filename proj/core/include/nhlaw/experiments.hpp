#pragma once

// Seeded Monte Carlo experiments. Trials run in parallel but every trial is a
// pure function of (config, n, trial index), and aggregation happens in trial
// order, so reports are bit-identical across thread counts.

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nhlaw/config.hpp"

namespace nhlaw {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One aggregated quantity. `value` is what gets compared against
/// `threshold` under `rule` ("<=", ">=", ">", "within"); "report" entries
/// carry no threshold and always pass.
struct Statistic {
  std::string name;
  double median = kNaN;
  double p95 = kNaN;
  double slope = kNaN;
  double stderr_slope = kNaN;
  double value = kNaN;
  std::string rule = "<=";
  double threshold = kNaN;
  double threshold_hi = kNaN;  // upper end for "within"
  bool gating = true;
  bool pass = true;
};

struct PlotSeries {
  std::string name;
  std::string x_label, y_label;
  std::vector<double> x, y;
};

struct ExperimentReport {
  std::string experiment;
  ExperimentConfig config;  // fully resolved
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // one per trial
  std::vector<Statistic> statistics;
  std::vector<PlotSeries> plots;
  int total = 0;
  int discarded = 0;
  bool pass = false;
  double runtime_seconds = 0.0;  // informational, never serialized

  std::string to_json() const;
  std::string to_csv() const;
  std::string plots_csv() const;
  const Statistic* find(const std::string& name) const;
};

using Runner = std::function<ExperimentReport(const ExperimentConfig&)>;

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<int> default_n;
  int default_trials = 0;
  std::map<std::string, std::string> defaults;
  Runner run;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);

/// Fills defaults for n, trials and every parameter; rejects unknown keys.
ExperimentConfig resolve_config(const ExperimentConfig& cfg);

/// Resolves, runs and times the configured experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Re-creates the config echoed in a JSON report.
ExperimentConfig config_from_report(const std::string& json_text);

ExperimentReport run_single_law(const ExperimentConfig& cfg);
ExperimentReport run_rigidity(const ExperimentConfig& cfg);
ExperimentReport run_two_resolvent(const ExperimentConfig& cfg);
ExperimentReport run_im_two_resolvent(const ExperimentConfig& cfg);
ExperimentReport run_overlap_decay(const ExperimentConfig& cfg);
ExperimentReport run_variance_scaling(const ExperimentConfig& cfg);
ExperimentReport run_singular_overlap(const ExperimentConfig& cfg);
ExperimentReport run_zig_propagation(const ExperimentConfig& cfg);

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency) and returns the results in index order.
std::vector<std::vector<double>> parallel_rows(int count, int threads,
                                               const std::function<std::vector<double>(int)>& fn);

}  // namespace nhlaw
