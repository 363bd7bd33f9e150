#include "nhlaw/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nhlaw/chains.hpp"
#include "nhlaw/characteristics.hpp"
#include "nhlaw/dyson.hpp"
#include "nhlaw/ensemble.hpp"
#include "nhlaw/errors.hpp"
#include "nhlaw/spectral.hpp"
#include "nhlaw/stability.hpp"
#include "nhlaw/stats.hpp"

namespace nhlaw {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t trial_key(int n, int t) {
  return (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(t);
}

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

/// Column `col` of the rows whose first column equals n (all rows if n == 0).
std::vector<double> column(const ExperimentReport& r, const std::string& col, int n = 0) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), col);
  if (it == r.columns.end()) throw std::logic_error("no column " + col);
  const auto idx = static_cast<std::size_t>(it - r.columns.begin());
  std::vector<double> out;
  for (const auto& row : r.rows)
    if (n == 0 || row[0] == n) out.push_back(row[idx]);
  return out;
}

void check(Statistic& s) {
  if (s.rule == "report") {
    s.pass = true;
    return;
  }
  if (s.rule == "<=") {
    s.pass = s.value <= s.threshold;
  } else if (s.rule == ">=") {
    s.pass = s.value >= s.threshold;
  } else if (s.rule == ">") {
    s.pass = s.value > s.threshold;
  } else {
    s.pass = s.value >= s.threshold && s.value <= s.threshold_hi;
  }
  if (!std::isfinite(s.value)) s.pass = false;
}

/// p95 of the finite values compared against an upper threshold.
Statistic p95_stat(const std::string& name, const std::vector<double>& v, double threshold,
                   bool gating = true) {
  const std::vector<double> f = finite_only(v);
  Statistic s;
  s.name = name;
  s.median = median(f);
  s.p95 = p95(f);
  s.value = s.p95;
  s.threshold = threshold;
  if (std::isnan(threshold)) s.rule = "report";
  s.gating = gating;
  check(s);
  return s;
}

Statistic value_stat(const std::string& name, double value, const std::string& rule, double lo,
                     double hi = kNaN, bool gating = true) {
  Statistic s;
  s.name = name;
  s.value = value;
  s.rule = rule;
  s.threshold = lo;
  s.threshold_hi = hi;
  s.gating = gating;
  check(s);
  return s;
}

Statistic slope_stat(const std::string& name, const LinearFit& fit, double target, double tol,
                     bool gating = true) {
  Statistic s = value_stat(name, fit.slope, "within", target - tol, target + tol, gating);
  s.slope = fit.slope;
  s.stderr_slope = fit.stderr_slope;
  return s;
}

void finish(ExperimentReport& r) {
  r.total = static_cast<int>(r.rows.size());
  r.pass = std::all_of(r.statistics.begin(), r.statistics.end(),
                       [](const Statistic& s) { return !s.gating || s.pass; });
}

ExperimentReport start(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ExperimentReport r;
  r.experiment = cfg.experiment;
  r.config = cfg;
  r.columns = std::move(columns);
  return r;
}

/// Rows for every (n, trial) in config order.
std::vector<std::vector<double>> run_all(const ExperimentConfig& cfg,
                                         const std::function<std::vector<double>(int, int)>& fn) {
  std::vector<std::pair<int, int>> jobs;
  for (int n : cfg.n_list)
    for (int t = 0; t < cfg.trials; ++t) jobs.emplace_back(n, t);
  return parallel_rows(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    std::vector<double> row{static_cast<double>(jobs[i].first), static_cast<double>(jobs[i].second)};
    const std::vector<double> rest = fn(jobs[i].first, jobs[i].second);
    row.insert(row.end(), rest.begin(), rest.end());
    return row;
  });
}

std::string suffix(int n) { return "_n" + std::to_string(n); }

Vec unit(int dim, int k) {
  Vec e = Vec::Zero(dim);
  e(k) = 1.0;
  return e;
}

const std::vector<std::pair<std::string, std::pair<Block, Block>>>& matrix_pairs() {
  static const std::vector<std::pair<std::string, std::pair<Block, Block>>> pairs{
      {"II", {Block::Identity(), Block::Identity()}},
      {"EmEm", {block_eminus(), block_eminus()}},
      {"FFs", {block_f(), block_fstar()}},
      {"FF", {block_f(), block_f()}},
  };
  return pairs;
}

/// (f1(H1) A f2(H2))_{xx} for x the k-th standard basis vector.
cd two_chain_entry(const ChainPair& cp, const Mat& g, double eta1, double eta2, int k) {
  const Vec h1 = cp.first().kernel(eta1);
  const Vec h2 = cp.second().kernel(eta2);
  const Vec a = cp.first().w().row(k).transpose().cwiseProduct(h1);
  const Vec b = cp.second().w().row(k).adjoint().cwiseProduct(h2);
  return (a.transpose() * g * b)(0, 0);
}

}  // namespace

std::vector<std::vector<double>> parallel_rows(int count, int threads,
                                               const std::function<std::vector<double>(int)>& fn) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(count));
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min(workers, static_cast<unsigned>(std::max(count, 1))));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// single-resolvent local law

ExperimentReport run_single_law(const ExperimentConfig& cfg) {
  const cd z = cfg.get_complex("z");
  const EtaRule rule = cfg.get_eta("eta");
  const double c = cfg.get_double("c"), xi = cfg.get_double("xi");
  ExperimentReport r =
      start(cfg, {"n", "trial", "eta", "avg_err", "avg_norm", "iso_err", "iso_norm"});
  r.rows = run_all(cfg, [&](int n, int t) {
    const double eta = rule.resolve(n, z);
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const ResolventFactory f(x.x, z);
    const PointData p = axis_point(z, eta);
    const double avg = std::abs(resolvent_trace(f, eta, Block(Block::Identity())) - p.sol.m);
    const Vec e0 = unit(2 * n, 0), en = unit(2 * n, n);
    const double iso = std::max(std::abs(isotropic(f, eta, e0, e0) - p.m(0, 0)),
                                std::abs(isotropic(f, eta, e0, en) - p.m(0, 1)));
    const double ne = n * eta;
    return std::vector<double>{eta, avg, avg * ne, iso, iso / (std::sqrt(p.rho() / ne) + 1.0 / ne)};
  });
  std::vector<double> ns, med;
  for (int n : cfg.n_list) {
    const double thr = c * std::pow(n, xi);
    r.statistics.push_back(p95_stat("avg_norm" + suffix(n), column(r, "avg_norm", n), thr));
    r.statistics.push_back(p95_stat("iso_norm" + suffix(n), column(r, "iso_norm", n), thr, false));
    ns.push_back(n);
    med.push_back(median(column(r, "avg_err", n)));
  }
  r.plots.push_back({"median_avg_err_vs_n", "n", "median |<G-M>|", ns, med});
  if (ns.size() >= 2) {
    const LinearFit fit = loglog_fit(ns, med);
    Statistic s = value_stat("avg_err_slope", fit.slope, "report", kNaN, kNaN, false);
    s.slope = fit.slope;
    s.stderr_slope = fit.stderr_slope;
    r.statistics.push_back(s);
  }
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// rigidity

namespace {

struct Interval {
  double a, b;
};

std::vector<Interval> parse_intervals(const std::string& text) {
  std::vector<Interval> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "interval needs a:b");
    const cd a = parse_complex(item.substr(0, colon)), b = parse_complex(item.substr(colon + 1));
    if (!(a.real() < b.real())) throw Error(ErrorCode::InvalidConfig, "empty interval " + item);
    out.push_back({a.real(), b.real()});
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no counting intervals");
  return out;
}

double signed_mass(cd z, double x) {
  const double m = integrated_density(z, 0.0, std::abs(x));
  return x < 0 ? -m : m;
}

}  // namespace

ExperimentReport run_rigidity(const ExperimentConfig& cfg) {
  const cd z = cfg.get_complex("z");
  const double c_index = cfg.get_double("c_index");
  const std::vector<Interval> intervals = parse_intervals(cfg.get_string("intervals"));
  const double count_c = cfg.get_double("count_c"), count_xi = cfg.get_double("count_xi");
  const double target = cfg.get_double("slope_target"), tol = cfg.get_double("slope_tol");

  struct PerN {
    std::vector<double> gamma;
    std::vector<double> expected;
  };
  std::map<int, PerN> pre;
  for (int n : cfg.n_list) {
    PerN p;
    const int k = std::max(1, static_cast<int>(std::floor(c_index * n)));
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    p.gamma = quantiles(z, n, idx);
    for (const Interval& iv : intervals)
      p.expected.push_back(2.0 * n * (signed_mass(z, iv.b) - signed_mass(z, iv.a)));
    pre[n] = std::move(p);
  }

  ExperimentReport r = start(cfg, {"n", "trial", "lambda1", "gamma1", "err1", "max_err", "count_err"});
  r.rows = run_all(cfg, [&](int n, int t) {
    const PerN& p = pre.at(n);
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const Mat shifted = x.x - z * Mat::Identity(n, n);
    Eigen::BDCSVD<Mat> svd(shifted);
    Eigen::VectorXd sv = svd.singularValues().reverse();  // ascending
    double max_err = 0.0;
    for (std::size_t i = 0; i < p.gamma.size(); ++i)
      max_err = std::max(max_err, std::abs(sv(static_cast<Eigen::Index>(i)) - p.gamma[i]));
    double count_err = 0.0;
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      int count = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) >= intervals[k].a && sv(i) <= intervals[k].b) ++count;
        if (-sv(i) >= intervals[k].a && -sv(i) <= intervals[k].b) ++count;
      }
      count_err = std::max(count_err, std::abs(count - p.expected[k]));
    }
    return std::vector<double>{sv(0), p.gamma[0], std::abs(sv(0) - p.gamma[0]), max_err, count_err};
  });

  std::vector<double> ns, med;
  for (int n : cfg.n_list) {
    r.statistics.push_back(
        p95_stat("count_err" + suffix(n), column(r, "count_err", n), count_c * std::pow(n, count_xi)));
    r.statistics.push_back(p95_stat("err1" + suffix(n), column(r, "err1", n), kNaN, false));
    ns.push_back(n);
    med.push_back(median(column(r, "err1", n)));
  }
  r.plots.push_back({"median_err1_vs_n", "n", "median |lambda_1 - gamma_1|", ns, med});
  if (ns.size() >= 2) r.statistics.push_back(slope_stat("err1_slope", loglog_fit(ns, med), target, tol));
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// two-resolvent local laws

namespace {

void check_regime(int n, const ControlParams& cp, double eps) {
  if (n * cp.ell < std::pow(n, eps))
    throw Error(ErrorCode::InvalidConfig, "n*ell below n^eps at n=" + std::to_string(n));
}

}  // namespace

ExperimentReport run_two_resolvent(const ExperimentConfig& cfg) {
  const cd z1 = cfg.get_complex("z1"), z2 = cfg.get_complex("z2");
  const EtaRule r1 = cfg.get_eta("eta1"), r2 = cfg.get_eta("eta2");
  const double c = cfg.get_double("c"), xi = cfg.get_double("xi"), eps = cfg.get_double("eps");
  const auto& pairs = matrix_pairs();

  std::vector<std::string> cols{"n", "trial"};
  for (const auto& [name, ab] : pairs) {
    cols.push_back("err_" + name);
    cols.push_back("norm_" + name);
  }
  cols.insert(cols.end(), {"avg_norm", "iso_norm", "f_beats_em"});
  ExperimentReport r = start(cfg, cols);

  for (int n : cfg.n_list)
    check_regime(n, control_params(axis_point(z1, r1.resolve(n, z1)), axis_point(z2, r2.resolve(n, z2))),
                 eps);

  r.rows = run_all(cfg, [&](int n, int t) {
    const double eta1 = r1.resolve(n, z1), eta2 = r2.resolve(n, z2);
    const PointData p1 = axis_point(z1, eta1), p2 = axis_point(z2, eta2);
    const ControlParams ctl = control_params(p1, p2);
    const double scale = std::max(std::sqrt(n * ctl.ell) * ctl.gamma, n * ctl.eta_star * ctl.eta_star);
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const ResolventFactory f1(x.x, z1), f2(x.x, z2);
    const ChainPair cp(f1, f2);
    std::vector<double> row;
    double worst = 0.0, err_em = 0.0, err_ff = 0.0, iso = 0.0;
    for (const auto& [name, ab] : pairs) {
      const Block m = m12(p1, ab.first, p2);
      const double err = std::abs(cp.two_chain(eta1, ab.first, eta2, ab.second) - block_trace(m * ab.second));
      row.push_back(err);
      row.push_back(err * scale);
      worst = std::max(worst, err * scale);
      if (name == "EmEm") err_em = err;
      if (name == "FF") err_ff = err;
      const double e = std::abs(two_chain_entry(cp, cp.gram(ab.first), eta1, eta2, 0) - m(0, 0));
      iso = std::max(iso, e * std::sqrt(n * ctl.gamma) * ctl.eta_star);
    }
    row.push_back(worst);
    row.push_back(iso);
    row.push_back(err_ff < err_em ? 1.0 : 0.0);
    return row;
  });

  for (int n : cfg.n_list) {
    const double thr = c * std::pow(n, xi);
    r.statistics.push_back(p95_stat("avg_norm" + suffix(n), column(r, "avg_norm", n), thr));
    for (const auto& [name, ab] : pairs)
      r.statistics.push_back(p95_stat("norm_" + name + suffix(n), column(r, "norm_" + name, n), thr, false));
    r.statistics.push_back(p95_stat("iso_norm" + suffix(n), column(r, "iso_norm", n), thr, false));
    r.statistics.push_back(
        value_stat("f_beats_em_fraction" + suffix(n), mean(column(r, "f_beats_em", n)), ">=", 0.8, kNaN, false));
  }
  finish(r);
  return r;
}

ExperimentReport run_im_two_resolvent(const ExperimentConfig& cfg) {
  const cd z1 = cfg.get_complex("z1"), z2 = cfg.get_complex("z2");
  const EtaRule r1 = cfg.get_eta("eta1"), r2 = cfg.get_eta("eta2");
  const double c = cfg.get_double("c"), xi = cfg.get_double("xi"), eps = cfg.get_double("eps");
  const auto& pairs = matrix_pairs();

  std::vector<std::string> cols{"n", "trial"};
  for (const auto& [name, ab] : pairs) cols.push_back("norm_" + name);
  cols.insert(cols.end(), {"im_norm", "im_err_I", "plain_err_I", "gain", "im_trace_I"});
  ExperimentReport r = start(cfg, cols);

  for (int n : cfg.n_list)
    check_regime(n, control_params(axis_point(z1, r1.resolve(n, z1)), axis_point(z2, r2.resolve(n, z2))),
                 eps);

  r.rows = run_all(cfg, [&](int n, int t) {
    const double eta1 = r1.resolve(n, z1), eta2 = r2.resolve(n, z2);
    const PointData p1 = axis_point(z1, eta1), p2 = axis_point(z2, eta2);
    const ControlParams ctl = control_params(p1, p2);
    const double scale = std::sqrt(n * ctl.ell) * ctl.hat_gamma / (p1.rho() * p2.rho());
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const ResolventFactory f1(x.x, z1), f2(x.x, z2);
    const ChainPair cp(f1, f2);
    std::vector<double> row;
    double worst = 0.0, im_err_id = 0.0, im_trace = 0.0;
    for (const auto& [name, ab] : pairs) {
      const cd im = cp.two_chain(eta1, ab.first, eta2, ab.second, Kernel::Im, Kernel::Im);
      const double err = std::abs(im - block_trace(hat_m12(p1, ab.first, p2) * ab.second));
      row.push_back(err * scale);
      worst = std::max(worst, err * scale);
      if (name == "II") {
        im_err_id = err;
        im_trace = im.real();
      }
    }
    const Block id = Block::Identity();
    const double plain =
        std::abs(cp.two_chain(eta1, id, eta2, id) - block_trace(m12(p1, id, p2)));
    row.insert(row.end(), {worst, im_err_id, plain, plain / im_err_id, im_trace});
    return row;
  });

  for (int n : cfg.n_list) {
    r.statistics.push_back(p95_stat("im_norm" + suffix(n), column(r, "im_norm", n), c * std::pow(n, xi)));
    r.statistics.push_back(value_stat("rho_gain_median" + suffix(n), median(column(r, "gain", n)), ">", 1.0));
    const std::vector<double> tr = column(r, "im_trace_I", n);
    r.statistics.push_back(value_stat("min_im_trace" + suffix(n), *std::min_element(tr.begin(), tr.end()),
                                      ">=", -1e-12));
  }
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// eigenvector overlaps

ExperimentReport run_overlap_decay(const ExperimentConfig& cfg) {
  const double c = cfg.get_double("c"), xi = cfg.get_double("xi");
  ExperimentReport r = start(cfg, {"n", "trial", "discarded", "vec_condition", "decay", "cs"});
  r.rows = run_all(cfg, [&](int n, int t) {
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const EigenSystem e = eigensystem(x.x);
    if (e.discarded) return std::vector<double>{1.0, e.vec_condition, kNaN, kNaN};
    return std::vector<double>{0.0, e.vec_condition, overlap_decay_statistic(e), overlap_cs_statistic(e)};
  });
  for (int n : cfg.n_list) {
    const double thr = c * std::pow(n, xi);
    r.statistics.push_back(p95_stat("decay" + suffix(n), column(r, "decay", n), thr));
    r.statistics.push_back(p95_stat("cs" + suffix(n), column(r, "cs", n), thr));
    const double frac = mean(column(r, "discarded", n));
    r.statistics.push_back(value_stat("discard_fraction" + suffix(n), frac, "<=", 0.01, kNaN,
                                      cfg.distribution != Distribution::Rademacher));
  }
  for (const auto& row : r.rows) r.discarded += row[2] != 0.0 ? 1 : 0;
  finish(r);
  return r;
}

ExperimentReport run_variance_scaling(const ExperimentConfig& cfg) {
  const double window = cfg.get_double("window");
  const double d_min = cfg.get_double("d_min"), d_max = cfg.get_double("d_max");
  const int bins = cfg.get_int("bins"), min_pairs = cfg.get_int("min_pairs");
  const double target = cfg.get_double("slope_target"), tol = cfg.get_double("slope_tol");
  const cd a1 = cfg.get_complex("shape_a1"), a2 = cfg.get_complex("shape_a2");
  const cd b1 = cfg.get_complex("shape_b1"), b2 = cfg.get_complex("shape_b2");
  const double radius = cfg.get_double("shape_r"), factor = cfg.get_double("shape_factor");
  if (bins < 2 || !(d_min > 0.0 && d_min < d_max))
    throw Error(ErrorCode::InvalidConfig, "invalid binning");

  std::vector<std::string> cols{"n", "trial", "discarded"};
  for (int k = 0; k < bins; ++k) {
    cols.push_back("bin" + std::to_string(k) + "_count");
    cols.push_back("bin" + std::to_string(k) + "_normsq");
    cols.push_back("bin" + std::to_string(k) + "_cos2");
  }
  cols.insert(cols.end(), {"shape_a_count", "shape_a_sum", "shape_b_count", "shape_b_sum"});
  ExperimentReport r = start(cfg, cols);
  const double log_min = std::log(d_min), log_step = (std::log(d_max) - log_min) / bins;

  r.rows = run_all(cfg, [&](int n, int t) {
    std::vector<double> row(static_cast<std::size_t>(3 * bins + 5), 0.0);
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const EigenSystem e = eigensystem(x.x);
    if (e.discarded) {
      row[0] = 1.0;
      return row;
    }
    const Mat gr = e.right.adjoint() * e.right;
    const Mat gl = e.left.adjoint() * e.left;
    auto shape_q = [&](int i, int j) {
      const double o2 = std::norm(gl(i, j)) * std::norm(gr(i, j));
      const double d = std::abs(e.sigma(i) - e.sigma(j));
      return o2 * std::pow(d, 4) / ((1.0 - std::norm(e.sigma(i))) * (1.0 - std::norm(e.sigma(j))));
    };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const cd si = e.sigma(i), sj = e.sigma(j);
        if (std::abs(si - a1) < radius && std::abs(sj - a2) < radius) {
          row[3 * bins + 1] += 1.0;
          row[3 * bins + 2] += shape_q(i, j);
        }
        if (std::abs(si - b1) < radius && std::abs(sj - b2) < radius) {
          row[3 * bins + 3] += 1.0;
          row[3 * bins + 4] += shape_q(i, j);
        }
        if (j < i || std::abs(si) > window || std::abs(sj) > window) continue;
        const double d = std::abs(si - sj);
        if (d < d_min || d >= d_max) continue;
        const int k = std::min(bins - 1, static_cast<int>((std::log(d) - log_min) / log_step));
        const double cr = std::norm(gr(i, j)) / (gr(i, i).real() * gr(j, j).real());
        const double cl = std::norm(gl(i, j)) / (gl(i, i).real() * gl(j, j).real());
        row[static_cast<std::size_t>(1 + 3 * k)] += 1.0;
        row[static_cast<std::size_t>(2 + 3 * k)] += cr * cl;
        row[static_cast<std::size_t>(3 + 3 * k)] += cr + cl;
      }
    }
    return row;
  });

  for (const auto& row : r.rows) r.discarded += row[2] != 0.0 ? 1 : 0;
  for (int n : cfg.n_list) {
    std::vector<double> centers, normsq, cos2;
    for (int k = 0; k < bins; ++k) {
      const std::string b = "bin" + std::to_string(k);
      double count = 0.0, s1 = 0.0, s2 = 0.0;
      const auto vc = column(r, b + "_count", n), v1 = column(r, b + "_normsq", n), v2 = column(r, b + "_cos2", n);
      for (std::size_t i = 0; i < vc.size(); ++i) {
        count += vc[i];
        s1 += v1[i];
        s2 += v2[i];
      }
      if (count < min_pairs)
        throw Error(ErrorCode::InsufficientPairs, b + " has " + std::to_string(static_cast<long>(count)) + " pairs");
      centers.push_back(std::exp(log_min + (k + 0.5) * log_step));
      normsq.push_back(s1 / count);
      cos2.push_back(s2 / count);
    }
    r.plots.push_back({"normsq_vs_distance" + suffix(n), "|s_i - s_j|", "mean |O_ij|^2/(O_ii O_jj)", centers, normsq});
    r.plots.push_back({"cos2_vs_distance" + suffix(n), "|s_i - s_j|", "mean cos2_r + cos2_l", centers, cos2});
    r.statistics.push_back(slope_stat("normsq_slope" + suffix(n), loglog_fit(centers, normsq), target, tol));
    Statistic cs = slope_stat("cos2_slope" + suffix(n), loglog_fit(centers, cos2), target / 2, tol, false);
    r.statistics.push_back(cs);

    auto total = [&](const std::string& col) {
      double s = 0.0;
      for (double v : column(r, col, n)) s += v;
      return s;
    };
    const double ca = total("shape_a_count"), cb = total("shape_b_count");
    const double ratio = (total("shape_a_sum") / ca) / (total("shape_b_sum") / cb);
    r.statistics.push_back(value_stat("shape_ratio" + suffix(n), ratio, "within", 1.0 / factor, factor));
  }
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// singular vectors

ExperimentReport run_singular_overlap(const ExperimentConfig& cfg) {
  const cd z1 = cfg.get_complex("z1"), z2 = cfg.get_complex("z2");
  const double tau = cfg.get_double("tau"), omega = cfg.get_double("omega_c"), c = cfg.get_double("c");
  ExperimentReport r = start(cfg, {"n", "trial", "statistic", "normalized"});
  r.rows = run_all(cfg, [&](int n, int t) {
    const IidMatrix x = sample(cfg.ensemble(n), trial_key(n, t));
    const SingularSystem s1 = singular_system(x.x, z1), s2 = singular_system(x.x, z2);
    const int k = std::max(1, static_cast<int>(std::floor(std::pow(n, omega))));
    double stat = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) stat = std::max(stat, singular_overlap(s1, s2, i, j));
    const double norm = stat * (std::norm(z1 - z2) + 1.0 / n) * std::pow(n, 1.0 - 2.0 * tau);
    return std::vector<double>{stat, norm};
  });
  for (int n : cfg.n_list)
    r.statistics.push_back(p95_stat("normalized" + suffix(n), column(r, "normalized", n), c));
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// flow-propagated Im-law

ExperimentReport run_zig_propagation(const ExperimentConfig& cfg) {
  const cd z1 = cfg.get_complex("z1"), z2 = cfg.get_complex("z2");
  const EtaRule rule = cfg.get_eta("eta");
  const double big_t = cfg.get_double("T"), c = cfg.get_double("c"), xi = cfg.get_double("xi");
  const double skeleton_tol = cfg.get_double("skeleton_tol"), eps = cfg.get_double("eps");
  const int samples = cfg.get_int("samples");
  if (samples < 2 || !(big_t > 0.0)) throw Error(ErrorCode::InvalidConfig, "need T > 0 and samples >= 2");

  std::vector<double> times;
  for (int k = 0; k < samples; ++k) times.push_back(big_t * k / (samples - 1));

  struct Path {
    std::vector<PointData> p1, p2;
    std::vector<double> scale;
    double skeleton = 0.0;
  };
  std::map<int, Path> paths;
  // z1, z2 are the starting points; eta is the target at time T.
  const cd z1_end = std::exp(-0.5 * big_t) * z1, z2_end = std::exp(-0.5 * big_t) * z2;
  for (int n : cfg.n_list) {
    const BackwardResult b1 = flow_backward(z1_end, rule.resolve(n, z1_end), big_t);
    const BackwardResult b2 = flow_backward(z2_end, rule.resolve(n, z2_end), big_t);
    Path path;
    for (double t : times) {
      const CharState s1 = flow_state_implicit(b1.z0, b1.eta0, t);
      const CharState s2 = flow_state_implicit(b2.z0, b2.eta0, t);
      path.p1.push_back(axis_point(s1.z, s1.eta));
      path.p2.push_back(axis_point(s2.z, s2.eta));
      const ControlParams ctl = control_params(path.p1.back(), path.p2.back());
      check_regime(n, ctl, eps);
      path.scale.push_back(std::sqrt(n * ctl.ell) * ctl.hat_gamma / (s1.rho * s2.rho));
      const double h = 1e-4;
      const EvolutionCheck ev = m12_evolution_check(b1.z0, b1.eta0, b2.z0, b2.eta0, Block::Identity(),
                                                    Block::Identity(), std::clamp(t, h, big_t - h), h);
      path.skeleton = std::max({path.skeleton, ev.average, ev.iso12, ev.iso121});
    }
    paths[n] = std::move(path);
  }

  std::vector<std::string> cols{"n", "trial"};
  for (int k = 0; k < samples; ++k) cols.push_back("norm_t" + std::to_string(k));
  ExperimentReport r = start(cfg, cols);
  r.rows = run_all(cfg, [&](int n, int t) {
    const Path& path = paths.at(n);
    const IidMatrix x0 = sample(cfg.ensemble(n), trial_key(n, t));
    const Block id = Block::Identity();
    std::vector<double> row;
    for (int k = 0; k < samples; ++k) {
      const IidMatrix xt = gaussian_divisible(x0, times[static_cast<std::size_t>(k)], cfg.seed, trial_key(n, t));
      const PointData& p1 = path.p1[static_cast<std::size_t>(k)];
      const PointData& p2 = path.p2[static_cast<std::size_t>(k)];
      const ResolventFactory f1(xt.x, p1.z), f2(xt.x, p2.z);
      const ChainPair cp(f1, f2);
      const cd im = cp.two_chain(p1.eta(), id, p2.eta(), id, Kernel::Im, Kernel::Im);
      const double err = std::abs(im - block_trace(hat_m12(p1, id, p2)));
      row.push_back(err * path.scale[static_cast<std::size_t>(k)]);
    }
    return row;
  });

  for (int n : cfg.n_list) {
    const double thr = c * std::pow(n, xi);
    std::vector<double> med;
    for (int k = 0; k < samples; ++k) {
      const std::string col = "norm_t" + std::to_string(k);
      r.statistics.push_back(p95_stat(col + suffix(n), column(r, col, n), thr));
      med.push_back(median(column(r, col, n)));
    }
    r.plots.push_back({"median_norm_vs_t" + suffix(n), "t", "median normalized error", times, med});
    r.statistics.push_back(value_stat("end_to_start_ratio" + suffix(n), med.back() / med.front(), "<=", 10.0,
                                      kNaN, false));
    r.statistics.push_back(value_stat("skeleton_residual" + suffix(n), paths.at(n).skeleton, "<=", skeleton_tol));
  }
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// registry and serialization

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry{
      {"single-law", "averaged and isotropic single-resolvent local law", {256}, 100,
       {{"z", "0.5"}, {"eta", "inv:10"}, {"c", "10"}, {"xi", "0.1"}}, run_single_law},
      {"rigidity", "smallest singular value and counting discrepancy", {64, 128, 256, 512}, 100,
       {{"z", "0"},
        {"c_index", "0.1"},
        {"intervals", "-0.3:0.3;0:0.1;0.05:0.2;-0.2:0.1"},
        {"count_c", "5"},
        {"count_xi", "0.2"},
        {"slope_target", "auto"},
        {"slope_tol", "0.15"}},
       run_rigidity},
      {"two-resolvent", "averaged two-resolvent local law", {256}, 100,
       {{"z1", "0.3"}, {"z2", "0.7"}, {"eta1", "inv:20"}, {"eta2", "inv:20"}, {"c", "10"}, {"xi", "0.15"},
        {"eps", "0.1"}},
       run_two_resolvent},
      {"im-two-resolvent", "edge Im-law for two resolvents", {256}, 100,
       {{"z1", "1"},
        {"z2", format_complex(std::polar(1.0, 0.5))},
        {"eta1", "pow:3,0.75"},
        {"eta2", "pow:3,0.75"},
        {"c", "10"},
        {"xi", "0.2"},
        {"eps", "0.03"}},
       run_im_two_resolvent},
      {"overlap-decay", "sup-pair eigenvector overlap decay", {256}, 100, {{"c", "1"}, {"xi", "0.5"}},
       run_overlap_decay},
      {"variance-scaling", "binned second moment of normalized overlaps", {256}, 200,
       {{"window", "0.8"},
        {"d_min", "0.2"},
        {"d_max", "0.8"},
        {"bins", "8"},
        {"min_pairs", "50"},
        {"slope_target", "-4"},
        {"slope_tol", "0.5"},
        {"shape_a1", "0"},
        {"shape_a2", "0.5"},
        {"shape_b1", "0.5"},
        {"shape_b2", "0.7"},
        {"shape_r", "0.1"},
        {"shape_factor", "3"}},
       run_variance_scaling},
      {"singular-overlap", "overlaps of small singular vectors at two shifts", {256}, 100,
       {{"z1", "0.2"}, {"z2", "0.9"}, {"tau", "0.1"}, {"omega_c", "0.1"}, {"c", "10"}}, run_singular_overlap},
      {"zig-propagation", "Im-law along coupled characteristics", {128}, 50,
       {{"z1", "1"},
        {"z2", format_complex(std::polar(1.0, 0.5))},
        {"eta", "pow:3,0.75"},
        {"T", "0.3"},
        {"samples", "10"},
        {"c", "10"},
        {"xi", "0.25"},
        {"eps", "0.03"},
        {"skeleton_tol", "1e-5"}},
       run_zig_propagation},
  };
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw Error(ErrorCode::InvalidConfig, "unknown experiment '" + name + "'");
}

ExperimentConfig resolve_config(const ExperimentConfig& cfg) {
  const ExperimentInfo& info = find_experiment(cfg.experiment);
  ExperimentConfig out = cfg;
  if (out.n_list.empty()) out.n_list = info.default_n;
  if (out.trials <= 0) out.trials = info.default_trials;
  for (const auto& [k, v] : out.params)
    if (!info.defaults.count(k))
      throw Error(ErrorCode::InvalidConfig, "unknown parameter '" + k + "' for " + cfg.experiment);
  for (const auto& [k, v] : info.defaults)
    if (!out.params.count(k)) out.params[k] = v;
  if (out.experiment == "rigidity" && out.params["slope_target"] == "auto")
    out.params["slope_target"] = std::abs(out.get_complex("z")) >= 1.0 ? "-0.75" : "-1";
  // Round every value through its parser so the echo is canonical.
  for (auto& [k, v] : out.params) {
    if (k == "intervals") continue;
    if (v.find(':') != std::string::npos) {
      v = EtaRule::parse(v).str();
    } else {
      v = format_complex(parse_complex(v));
    }
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const ExperimentConfig resolved = resolve_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r = find_experiment(resolved.experiment).run(resolved);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

const Statistic* ExperimentReport::find(const std::string& name) const {
  for (const auto& s : statistics)
    if (s.name == name) return &s;
  return nullptr;
}

std::string ExperimentReport::to_json() const {
  Json j;
  j["experiment"] = experiment;
  j["config"] = config.to_ini(false);
  Json stats = Json::array();
  for (const auto& s : statistics) {
    Json o;
    o["name"] = s.name;
    o["median"] = s.median;
    o["p95"] = s.p95;
    o["slope"] = s.slope;
    o["stderr"] = s.stderr_slope;
    o["value"] = s.value;
    o["rule"] = s.rule;
    o["threshold"] = s.threshold;
    if (s.rule == "within") o["threshold_hi"] = s.threshold_hi;
    o["gating"] = s.gating;
    o["pass"] = s.pass;
    stats.push_back(o);
  }
  j["statistics"] = stats;
  j["trials"] = total;
  j["discarded"] = discarded;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string ExperimentReport::plots_csv() const {
  std::string out = "series,x,y\n";
  for (const auto& p : plots)
    for (std::size_t i = 0; i < p.x.size(); ++i)
      out += p.name + "," + format_double(p.x[i]) + "," + format_double(p.y[i]) + "\n";
  return out;
}

ExperimentConfig config_from_report(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.contains("config") || !j["config"].is_string())
    throw Error(ErrorCode::InvalidConfig, "report has no config echo");
  return parse_config(j["config"].get<std::string>());
}

}  // namespace nhlaw
