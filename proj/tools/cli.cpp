#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhlaw/characteristics.hpp"
#include "nhlaw/config.hpp"
#include "nhlaw/dyson.hpp"
#include "nhlaw/errors.hpp"
#include "nhlaw/experiments.hpp"
#include "nhlaw/stability.hpp"

namespace nhlaw {

namespace {

using Json = nlohmann::ordered_json;

/// Ordered key/value record printed as text, JSON or a one-row CSV.
struct Record {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> values;

  void echo(const std::string& k, const std::string& v) { config.emplace_back(k, v); }
  void put(const std::string& k, double v) { values.emplace_back(k, format_double(v)); }
  void put(const std::string& k, cd v) {
    values.emplace_back(k, format_double(v.real()) + (v.imag() < 0 || std::signbit(v.imag()) ? "-" : "+") +
                               format_double(std::abs(v.imag())) + "i");
  }
  void put(const std::string& k, const std::string& v) { values.emplace_back(k, v); }

  std::string render(const std::string& format) const {
    std::ostringstream os;
    if (format == "json") {
      Json j, c;
      for (const auto& [k, v] : config) c[k] = v;
      j["config"] = c;
      for (const auto& [k, v] : values) j[k] = v;
      os << j.dump(2) << "\n";
    } else if (format == "csv") {
      std::string head, row;
      for (const auto& [k, v] : config) {
        head += (head.empty() ? "" : ",") + k;
        row += (row.empty() ? "" : ",") + v;
      }
      for (const auto& [k, v] : values) {
        head += "," + k;
        row += "," + v;
      }
      os << head << "\n" << row << "\n";
    } else {
      os << "# config:";
      for (const auto& [k, v] : config) os << " " << k << "=" << v;
      os << "\n";
      for (const auto& [k, v] : values) os << k << " = " << v << "\n";
    }
    return os.str();
  }
};

Block parse_block(const std::string& name) {
  if (name == "I") return Block::Identity();
  if (name == "E1") return block_e1();
  if (name == "E2") return block_e2();
  if (name == "E+") return block_eplus();
  if (name == "E-") return block_eminus();
  if (name == "F") return block_f();
  if (name == "F*") return block_fstar();
  throw CLI::ValidationError("--a1/--a2", "unknown block '" + name + "' (I, E1, E2, E+, E-, F, F*)");
}

void put_block(Record& r, const std::string& name, const Block& b) {
  r.put(name + "_00", b(0, 0));
  r.put(name + "_01", b(0, 1));
  r.put(name + "_10", b(1, 0));
  r.put(name + "_11", b(1, 1));
}

struct Options {
  std::string z = "0", z2 = "0", eta = "0.1", eta2 = "0.1";
  std::string z0 = "0.5", eta0 = "0.1";
  double T = 0.1, e = 0.0, tolerance = 1e-12;
  int n = 0, trials = 0, threads = 0;
  long long seed = -1;
  std::string ensemble, field, config, out, format = "text";
  std::string a1 = "I", a2 = "I";
  std::string indices;
  std::string name, report;
  std::vector<std::string> sets;
  bool verify = false;
};

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
  f << text;
  out << "wrote " << o.out << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_dyson(const Options& o, std::ostream& out) {
  const cd z = parse_complex(o.z);
  const double eta = parse_complex(o.eta).real();
  const DysonSolution s = solve_m_axis(z, eta);
  Record r;
  r.echo("z", format_complex(z));
  r.echo("eta", format_double(eta));
  r.put("m", s.m);
  r.put("u", s.u);
  r.put("rho", s.rho);
  r.put("residual", eta == 0.0 ? 0.0 : cubic_residual(z, cd(0.0, eta), s.m));
  emit(r.render(o.format), o, out);
  return 0;
}

int cmd_density(const Options& o, std::ostream& out) {
  const cd z = parse_complex(o.z);
  const SupportInfo sup = support_gap(z);
  Record r;
  r.echo("z", format_complex(z));
  r.echo("e", format_double(o.e));
  r.put("rho", density(z, o.e));
  r.put("gap", sup.gap_delta);
  r.put("right_edge", sup.right_edge);
  emit(r.render(o.format), o, out);
  return 0;
}

int cmd_quantiles(const Options& o, std::ostream& out) {
  const cd z = parse_complex(o.z);
  const int n = o.n > 0 ? o.n : 256;
  std::vector<int> idx;
  if (o.indices.empty()) {
    idx = {1, 2, 3};
  } else {
    std::stringstream ss(o.indices);
    std::string item;
    while (std::getline(ss, item, ',')) idx.push_back(std::stoi(item));
  }
  const std::vector<double> g = quantiles(z, n, idx);
  Record r;
  r.echo("z", format_complex(z));
  r.echo("n", std::to_string(n));
  std::string list;
  for (std::size_t i = 0; i < idx.size(); ++i) list += (i ? ";" : "") + std::to_string(idx[i]);
  r.echo("indices", list);
  for (std::size_t i = 0; i < idx.size(); ++i) r.put("gamma_" + std::to_string(idx[i]), g[i]);
  r.put("eta_f", fluctuation_scale(z, n));
  emit(r.render(o.format), o, out);
  return 0;
}

std::pair<PointData, PointData> two_points(const Options& o, Record& r) {
  const cd z1 = parse_complex(o.z), z2 = parse_complex(o.z2);
  const double e1 = parse_complex(o.eta).real(), e2 = parse_complex(o.eta2).real();
  if (e1 == 0.0 || e2 == 0.0) throw CLI::ValidationError("--eta", "must be nonzero");
  r.echo("z", format_complex(z1));
  r.echo("eta", format_double(e1));
  r.echo("z2", format_complex(z2));
  r.echo("eta2", format_double(e2));
  return {axis_point(z1, e1), axis_point(z2, e2)};
}

int cmd_stability(const Options& o, std::ostream& out) {
  Record r;
  const auto [p1, p2] = two_points(o, r);
  const StabilityBundle b = stability_eigs(p1, p2);
  const ControlParams c = control_params(p1, p2);
  const BetaComparison cmp = beta_comparison(p1, p2);
  r.put("beta_plus", b.beta_plus);
  r.put("beta_minus", b.beta_minus);
  r.put("beta_product", cmp.product);
  r.put("beta_sum", cmp.sum);
  r.put("gamma", c.gamma);
  r.put("hat_gamma", c.hat_gamma);
  r.put("ell", c.ell);
  r.put("eta_star", c.eta_star);
  r.put("rho_star", c.rho_star);
  r.put("fallback", std::string(b.fallback ? "true" : "false"));
  emit(r.render(o.format), o, out);
  return 0;
}

int cmd_m12(const Options& o, std::ostream& out) {
  Record r;
  const auto [p1, p2] = two_points(o, r);
  const Block a1 = parse_block(o.a1), a2 = parse_block(o.a2);
  r.echo("a1", o.a1);
  r.echo("a2", o.a2);
  const Block m = m12(p1, a1, p2);
  const Block h = hat_m12(p1, a1, p2);
  put_block(r, "m12", m);
  r.put("trace_m12_a2", block_trace(m * a2));
  r.put("trace_hat_m12_a2", block_trace(h * a2));
  put_block(r, "m121", m121(p1, a1, p2, a2));
  emit(r.render(o.format), o, out);
  return 0;
}

int cmd_flow(const Options& o, std::ostream& out) {
  const cd z0 = parse_complex(o.z0);
  const double eta0 = parse_complex(o.eta0).real();
  // Past t_star the flow leaves the axis; stop at the floor and report truncation.
  const double ts = t_star(z0, eta0);
  const double horizon = o.T < ts ? o.T : std::nextafter(ts, 0.0);
  const Trajectory traj = flow_forward(z0, eta0, horizon, o.tolerance);
  const CharState& last = traj.states.back();
  Record r;
  r.echo("z0", format_complex(z0));
  r.echo("eta0", format_double(eta0));
  r.echo("T", format_double(o.T));
  r.echo("tolerance", format_double(o.tolerance));
  r.put("steps", static_cast<double>(traj.states.size() - 1));
  r.put("t_star", traj.t_star);
  r.put("t_end", last.t);
  r.put("z_T", last.z);
  r.put("eta_T", last.eta);
  r.put("rho_T", last.rho);
  r.put("max_defect", traj.max_defect);
  r.put("truncated", std::string(traj.truncated ? "true" : "false"));
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
    write_trajectory_csv(f, traj);
    out << "wrote " << o.out << " (columns t,re_z,im_z,eta,re_m,im_m,rho)\n";
  }
  out << r.render(o.format);
  return 0;
}

void print_summary(const ExperimentReport& rep, std::ostream& out) {
  out << rep.experiment << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.total << " trials, "
      << rep.discarded << " discarded)\n";
  for (const auto& s : rep.statistics) {
    out << "  " << (s.pass ? "ok  " : "FAIL") << " " << s.name << " = " << format_double(s.value);
    if (s.rule != "report") out << " " << s.rule << " " << format_double(s.threshold);
    if (s.rule == "within") out << ".." << format_double(s.threshold_hi);
    if (!s.gating) out << " (info)";
    out << "\n";
  }
}

int cmd_experiment(const Options& o, const CLI::App& cmd, std::ostream& out) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  if (!o.name.empty()) {
    if (!cfg.experiment.empty() && cfg.experiment != o.name)
      throw CLI::ValidationError("name", "config is for '" + cfg.experiment + "', not '" + o.name + "'");
    cfg.experiment = o.name;
  }
  if (cfg.experiment.empty()) throw CLI::ValidationError("name", "experiment name required");
  const ExperimentInfo& info = find_experiment(cfg.experiment);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.n > 0) cfg.n_list = {o.n};
  if (o.trials > 0) cfg.trials = o.trials;
  if (o.threads > 0) cfg.threads = o.threads;
  if (!o.field.empty()) cfg.field = parse_field(o.field);
  if (!o.ensemble.empty()) cfg.distribution = parse_distribution(o.ensemble);
  auto set_param = [&](const std::string& flag, const std::string& value, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (info.defaults.count(k)) {
        cfg.params[k] = value;
        return;
      }
    }
    throw CLI::ValidationError(flag, "not a parameter of " + cfg.experiment);
  };
  if (cmd.count("--z")) set_param("--z", o.z, {"z", "z1"});
  if (cmd.count("--z2")) set_param("--z2", o.z2, {"z2"});
  if (cmd.count("--eta")) set_param("--eta", o.eta, {"eta", "eta1"});
  if (cmd.count("--eta2")) set_param("--eta2", o.eta2, {"eta2"});
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
    set_param("--set", s.substr(eq + 1), {s.substr(0, eq).c_str()});
  }

  const ExperimentReport rep = run_experiment(cfg);
  const std::string prefix = o.out.empty() ? rep.experiment : o.out;
  if (o.format == "json" || o.format == "text") write_file(prefix + ".json", rep.to_json());
  if (o.format == "csv" || o.format == "text") write_file(prefix + ".csv", rep.to_csv());
  if (!rep.plots.empty()) write_file(prefix + "_plots.csv", rep.plots_csv());
  out << "# config:\n" << rep.config.to_ini(false);
  print_summary(rep, out);
  out << "runtime_seconds = " << rep.runtime_seconds << "\n";
  out << "reports: " << prefix << ".{json,csv}\n";
  return rep.pass ? 0 : 1;
}

int cmd_report(const Options& o, std::ostream& out) {
  const std::string text = read_file(o.report);
  const Json j = Json::parse(text);
  out << j.value("experiment", std::string("?")) << ": " << (j.value("pass", false) ? "PASS" : "FAIL") << "\n";
  for (const auto& s : j["statistics"]) {
    out << "  " << (s["pass"].get<bool>() ? "ok  " : "FAIL") << " " << s["name"].get<std::string>() << "\n";
  }
  if (!o.verify) return j.value("pass", false) ? 0 : 1;
  ExperimentConfig cfg = config_from_report(text);
  if (o.threads > 0) cfg.threads = o.threads;
  const ExperimentReport rep = run_experiment(cfg);
  const bool same = rep.to_json() == text;
  out << "re-run from echoed config: " << (same ? "bit-identical" : "DIFFERS") << "\n";
  return same ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerics for non-Hermitian i.i.d. matrices: Dyson solver, stability operator, "
               "characteristic flow and Monte Carlo experiments"};
  app.require_subcommand(1);
  Options o;

  auto add_z = [&](CLI::App* c) {
    c->add_option("--z", o.z, "spectral parameter z as re or re,im");
    c->add_option("--eta", o.eta, "imaginary part of w = i eta");
  };
  auto add_pair = [&](CLI::App* c) {
    add_z(c);
    c->add_option("--z2", o.z2, "second spectral parameter");
    c->add_option("--eta2", o.eta2, "second eta");
  };
  auto add_io = [&](CLI::App* c) {
    c->add_option("--out", o.out, "output file (prefix for experiments)");
    c->add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json", "csv"}));
  };

  auto* dyson = app.add_subcommand("dyson", "solve the Dyson cubic at w = i eta");
  add_z(dyson);
  add_io(dyson);

  auto* dens = app.add_subcommand("density", "self-consistent density and support");
  dens->add_option("--z", o.z, "spectral parameter");
  dens->add_option("--e", o.e, "real energy");
  add_io(dens);

  auto* quant = app.add_subcommand("quantiles", "density quantiles and fluctuation scale");
  quant->add_option("--z", o.z, "spectral parameter");
  quant->add_option("--n", o.n, "matrix size")->check(CLI::Range(2, 1000000));
  quant->add_option("--indices", o.indices, "comma-separated indices");
  add_io(quant);

  auto* stab = app.add_subcommand("stability", "eigenvalues of the two-body stability operator");
  add_pair(stab);
  add_io(stab);

  auto* m12c = app.add_subcommand("m12", "deterministic approximations M12, hat M12, M121");
  add_pair(m12c);
  m12c->add_option("--a1", o.a1, "block A1: I, E1, E2, E+, E-, F, F*");
  m12c->add_option("--a2", o.a2, "block A2");
  add_io(m12c);

  auto* flow = app.add_subcommand("flow", "integrate the characteristic flow");
  flow->add_option("--z0", o.z0, "initial z");
  flow->add_option("--eta0", o.eta0, "initial eta");
  flow->add_option("--T", o.T, "final time")->check(CLI::NonNegativeNumber);
  flow->add_option("--tol", o.tolerance, "RK45 tolerance");
  add_io(flow);

  auto* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  std::string names;
  for (const auto& e : experiment_registry()) names += (names.empty() ? "" : ", ") + e.name;
  exp->add_option("name", o.name, "experiment: " + names);
  exp->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
  exp->add_option("--seed", o.seed, "master seed")->check(CLI::NonNegativeNumber);
  exp->add_option("--n", o.n, "matrix size")->check(CLI::Range(2, 100000));
  exp->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  exp->add_option("--threads", o.threads, "worker cap")->check(CLI::NonNegativeNumber);
  exp->add_option("--ensemble", o.ensemble, "entry law")->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  exp->add_option("--field", o.field, "symmetry class")->check(CLI::IsMember({"real", "complex"}));
  exp->add_option("--set", o.sets, "override an experiment parameter, key=value");
  add_pair(exp);
  add_io(exp);

  auto* rep = app.add_subcommand("report", "summarize a JSON report");
  rep->add_option("file", o.report, "report JSON")->required()->check(CLI::ExistingFile);
  rep->add_flag("--verify", o.verify, "re-run the echoed config and compare bit for bit");
  rep->add_option("--threads", o.threads, "worker cap")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (dyson->parsed()) return cmd_dyson(o, out);
    if (dens->parsed()) return cmd_density(o, out);
    if (quant->parsed()) return cmd_quantiles(o, out);
    if (stab->parsed()) return cmd_stability(o, out);
    if (m12c->parsed()) return cmd_m12(o, out);
    if (flow->parsed()) return cmd_flow(o, out);
    if (exp->parsed()) return cmd_experiment(o, *exp, out);
    if (rep->parsed()) return cmd_report(o, out);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace nhlaw
