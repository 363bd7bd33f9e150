#include <cmath>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "nhlaw/chains.hpp"
#include "nhlaw/dyson.hpp"
#include "nhlaw/errors.hpp"
#include "nhlaw/experiments.hpp"

using namespace nhlaw;

namespace {

ExperimentConfig small(const std::string& name, std::vector<int> ns, int trials) {
  ExperimentConfig c;
  c.experiment = name;
  c.n_list = std::move(ns);
  c.trials = trials;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Experiments, ParallelRowsKeepIndexOrder) {
  const auto rows = parallel_rows(50, 4, [](int i) { return std::vector<double>{double(i), i * 0.5}; });
  ASSERT_EQ(rows.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(rows[i][0], i);
  EXPECT_THROW(parallel_rows(10, 3,
                             [](int i) -> std::vector<double> {
                               if (i == 7) throw std::runtime_error("boom");
                               return {0.0};
                             }),
               std::runtime_error);
}

TEST(Experiments, ResolveFillsDefaultsAndRejectsUnknownKeys) {
  ExperimentConfig c;
  c.experiment = "two-resolvent";
  const ExperimentConfig r = resolve_config(c);
  const ExperimentInfo& info = find_experiment("two-resolvent");
  EXPECT_EQ(r.n_list, info.default_n);
  EXPECT_EQ(r.trials, info.default_trials);
  for (const auto& [k, v] : info.defaults) EXPECT_TRUE(r.has(k)) << k;
  c.params["no_such_key"] = "1";
  EXPECT_THROW(resolve_config(c), Error);
  c.params.clear();
  c.experiment = "no-such-experiment";
  EXPECT_THROW(resolve_config(c), Error);
  ExperimentConfig rig;
  rig.experiment = "rigidity";
  rig.params["z"] = "1";
  EXPECT_EQ(resolve_config(rig).get_double("slope_target"), -0.75);
  rig.params["z"] = "0.5";
  EXPECT_EQ(resolve_config(rig).get_double("slope_target"), -1.0);
}

TEST(Experiments, ReportsDoNotDependOnThreadCount) {
  for (const char* name : {"single-law", "overlap-decay", "two-resolvent"}) {
    ExperimentConfig c = small(name, {32, 48}, 6);
    c.threads = 1;
    const std::string a = run_experiment(c).to_json();
    c.threads = 3;
    const std::string b = run_experiment(c).to_json();
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Experiments, EchoedConfigReproducesTheReport) {
  ExperimentConfig c = small("single-law", {40}, 5);
  c.params["z"] = "0.2,0.3";
  const ExperimentReport r = run_experiment(c);
  const ExperimentConfig echoed = config_from_report(r.to_json());
  EXPECT_EQ(echoed.to_ini(false), r.config.to_ini(false));
  EXPECT_EQ(run_experiment(echoed).to_json(), r.to_json());
}

TEST(Experiments, SeedChangesTheSample) {
  ExperimentConfig c = small("single-law", {32}, 4);
  const ExperimentReport a = run_experiment(c);
  c.seed = 6;
  EXPECT_NE(run_experiment(c).rows, a.rows);
}

TEST(Experiments, CsvHasOneRowPerTrial) {
  const ExperimentReport r = run_experiment(small("single-law", {32, 40}, 3));
  std::istringstream is(r.to_csv());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("n,trial,", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(r.total, 6);
}

TEST(Experiments, GlobalRegimeIsTriviallyWithinBounds) {
  // At eta >> 1 the resolvent is close to -1/(i eta) regardless of X.
  ExperimentConfig c = small("single-law", {64}, 10);
  c.params["eta"] = "50";
  const ExperimentReport r = run_experiment(c);
  const Statistic* s = r.find("avg_norm_n64");
  ASSERT_NE(s, nullptr);
  EXPECT_LT(s->value, 1.0);
  EXPECT_TRUE(r.pass);
}

TEST(Experiments, ZeroMatrixViolatesTheLocalLaw) {
  // Negative control: the normalized single-resolvent error is large when
  // the matrix is not of the i.i.d. class.
  const int n = 1024;
  const cd z = 0.5;
  const double eta = 0.05;
  const ResolventFactory f(Mat::Zero(n, n), z);
  const double err = std::abs(resolvent_trace(f, eta, Block(Block::Identity())) - solve_m_axis(z, eta).m);
  EXPECT_GT(err * n * eta, 10.0 * std::pow(n, 0.1));
}

TEST(Experiments, EveryExperimentRunsAtSmallSize) {
  for (const ExperimentInfo& info : experiment_registry()) {
    ExperimentConfig c = small(info.name, {128, 160}, 2);
    if (info.name == "variance-scaling") c.params["min_pairs"] = "5";
    SCOPED_TRACE(info.name);
    const ExperimentReport r = run_experiment(c);
    EXPECT_FALSE(r.statistics.empty());
    EXPECT_EQ(r.rows.size(), 4u);
    EXPECT_EQ(r.experiment, info.name);
  }
}

TEST(Experiments, RegimeCheckRejectsTinyEta) {
  ExperimentConfig c = small("two-resolvent", {64}, 2);
  c.params["eta"] = "1e-6";
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}
