#include "nhlaw/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nhlaw/dyson.hpp"
#include "nhlaw/errors.hpp"

namespace nhlaw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "not a number for " + what + ": '" + text + "'");
  }
  if (pos != t.size() || !std::isfinite(v))
    throw Error(ErrorCode::InvalidConfig, "not a number for " + what + ": '" + text + "'");
  return v;
}

long long to_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "not an integer for " + what + ": '" + text + "'");
  }
  if (pos != t.size())
    throw Error(ErrorCode::InvalidConfig, "not an integer for " + what + ": '" + text + "'");
  return v;
}

}  // namespace

double EtaRule::resolve(int n, cd z) const {
  switch (kind) {
    case Kind::Absolute: return c;
    case Kind::Inverse: return c / n;
    case Kind::Power: return c * std::pow(static_cast<double>(n), -a);
    case Kind::Fluctuation: return c * fluctuation_scale(z, n);
  }
  return c;
}

std::string EtaRule::str() const {
  switch (kind) {
    case Kind::Absolute: return format_double(c);
    case Kind::Inverse: return "inv:" + format_double(c);
    case Kind::Power: return "pow:" + format_double(c) + "," + format_double(a);
    case Kind::Fluctuation: return "fluct:" + format_double(c);
  }
  return {};
}

EtaRule EtaRule::parse(const std::string& text) {
  const std::string t = trim(text);
  EtaRule r;
  const auto colon = t.find(':');
  if (colon == std::string::npos) {
    r.c = to_double(t, "eta");
    return r;
  }
  const std::string head = t.substr(0, colon), body = t.substr(colon + 1);
  if (head == "inv") {
    r.kind = Kind::Inverse;
    r.c = to_double(body, "eta");
  } else if (head == "fluct") {
    r.kind = Kind::Fluctuation;
    r.c = to_double(body, "eta");
  } else if (head == "pow") {
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "eta rule pow needs 'pow:c,a': '" + text + "'");
    r.kind = Kind::Power;
    r.c = to_double(body.substr(0, comma), "eta");
    r.a = to_double(body.substr(comma + 1), "eta");
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown eta rule '" + head + "'");
  }
  return r;
}

cd parse_complex(const std::string& text) {
  const std::string t = trim(text);
  const auto comma = t.find(',');
  if (comma == std::string::npos) return {to_double(t, "complex"), 0.0};
  return {to_double(t.substr(0, comma), "complex"), to_double(t.substr(comma + 1), "complex")};
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(cd z) {
  if (z.imag() == 0.0) return format_double(z.real());
  return format_double(z.real()) + "," + format_double(z.imag());
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const long long v = to_integer(item, "n");
    if (v < 2 || v > 100000) throw Error(ErrorCode::InvalidConfig, "n out of range: " + item);
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty n list");
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return to_double(get_string(key), key);
}

int ExperimentConfig::get_int(const std::string& key) const {
  return static_cast<int>(to_integer(get_string(key), key));
}

cd ExperimentConfig::get_complex(const std::string& key) const {
  return parse_complex(get_string(key));
}

EtaRule ExperimentConfig::get_eta(const std::string& key) const {
  return EtaRule::parse(get_string(key));
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorCode::InvalidConfig, "missing parameter '" + key + "'");
  return it->second;
}

EnsembleSpec ExperimentConfig::ensemble(int n) const {
  return EnsembleSpec{n, field, distribution, seed};
}

std::string ExperimentConfig::to_ini(bool with_threads) const {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "name = " << experiment << "\n";
  os << "field = " << to_string(field) << "\n";
  os << "distribution = " << to_string(distribution) << "\n";
  os << "seed = " << seed << "\n";
  os << "trials = " << trials << "\n";
  os << "n = " << format_int_list(n_list) << "\n";
  if (with_threads) os << "threads = " << threads << "\n";
  if (!params.empty()) {
    os << "\n[" << experiment << "]\n";
    for (const auto& [k, v] : params) os << k << " = " << v << "\n";
  }
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  ExperimentConfig cfg;
  const auto general = tree.get_child_optional("experiment");
  if (!general) throw Error(ErrorCode::InvalidConfig, "missing [experiment] section");
  for (const auto& [key, node] : *general) {
    const std::string v = trim(node.data());
    if (key == "name") {
      cfg.experiment = v;
    } else if (key == "field") {
      cfg.field = parse_field(v);
    } else if (key == "distribution") {
      cfg.distribution = parse_distribution(v);
    } else if (key == "seed") {
      const long long s = to_integer(v, key);
      if (s < 0) throw Error(ErrorCode::InvalidConfig, "seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(to_integer(v, key));
      if (cfg.trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be positive");
    } else if (key == "n") {
      cfg.n_list = parse_int_list(v);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_integer(v, key));
      if (cfg.threads < 0) throw Error(ErrorCode::InvalidConfig, "threads must be >= 0");
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in [experiment]");
    }
  }
  if (cfg.experiment.empty()) throw Error(ErrorCode::InvalidConfig, "missing experiment name");
  if (const auto sec = tree.get_child_optional(cfg.experiment)) {
    for (const auto& [key, node] : *sec) cfg.params[key] = trim(node.data());
  }
  for (const auto& [name, node] : tree) {
    if (name != "experiment" && name != cfg.experiment)
      throw Error(ErrorCode::InvalidConfig, "section [" + name + "] does not match experiment");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nhlaw
