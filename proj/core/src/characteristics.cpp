#include "nhlaw/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "nhlaw/dyson.hpp"
#include "nhlaw/errors.hpp"
#include "nhlaw/stability.hpp"

namespace nhlaw {
namespace {

// |eta| / rho at (z, i eta).
double eta_rho_ratio(cd z, double eta) {
  const double h = std::abs(eta);
  const double mu = std::abs(solve_m_axis(z, h).m.imag());
  return kPi * h / mu;
}

// Limit of |eta|/rho as eta -> 0 at fixed z.
double ratio_floor(cd z) { return kPi * std::max(std::norm(z) - 1.0, 0.0); }

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

double rhs(double t, cd z0, double eta) {
  const cd zt = std::exp(-0.5 * t) * z0;
  return -solve_m_axis(zt, eta).m.imag() - 0.5 * eta;
}

double implicit_target(double r0, double t) { return std::exp(-t) * r0 + kPi * std::expm1(-t); }

template <class F>
double solve_increasing(F g, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 300;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

double max_entry(const Block& b) { return b.cwiseAbs().maxCoeff(); }

}  // namespace

CharState char_state(double t, cd z, double eta) {
  const DysonSolution s = solve_m_axis(z, eta);
  return {t, z, eta, s.m, s.u, s.rho};
}

double t_star(cd z0, double eta0) {
  if (eta0 == 0.0) return 0.0;
  const double r0 = eta_rho_ratio(z0, eta0);
  const double a0 = std::norm(z0);
  auto f = [&](double t) {
    return implicit_target(r0, t) - kPi * std::max(std::exp(-t) * a0 - 1.0, 0.0);
  };
  double lo = 0.0;
  double hi = 2.0 * std::log1p(r0 / kPi) + 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CharState flow_state_implicit(cd z0, double eta0, double t) {
  if (t == 0.0) return char_state(0.0, z0, eta0);
  const cd zt = std::exp(-0.5 * t) * z0;
  const double target = implicit_target(eta_rho_ratio(z0, eta0), t);
  if (!(target > ratio_floor(zt)))
    throw Error(ErrorCode::NoBracket, "target ratio below its eta -> 0 limit; t >= t_star");
  auto g = [&](double eta) { return eta_rho_ratio(zt, eta) - target; };
  double hi = std::abs(eta0);
  for (int k = 0; g(hi) < 0.0; ++k) {
    if (k > 200) throw Error(ErrorCode::NoBracket, "upper bracket not found");
    hi *= 2.0;
  }
  double lo = hi;
  for (int k = 0; g(lo) > 0.0; ++k) {
    if (k > 1000) throw Error(ErrorCode::NoBracket, "lower bracket not found");
    lo *= 0.5;
  }
  if (lo == hi) return char_state(t, zt, sign_of(eta0) * hi);
  return char_state(t, zt, sign_of(eta0) * solve_increasing(g, lo, hi));
}

Trajectory flow_forward(cd z0, double eta0, double T, double tolerance) {
  if (eta0 == 0.0) throw Error(ErrorCode::ZeroEta, "eta0 must be nonzero");
  Trajectory traj;
  traj.t_star = t_star(z0, eta0);
  if (T >= traj.t_star)
    throw Error(ErrorCode::CrossedZero, "eta reaches zero at t_star = " + std::to_string(traj.t_star));

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double r0 = eta_rho_ratio(z0, eta0);
  auto record = [&](double t, double eta) {
    const CharState s = char_state(t, std::exp(-0.5 * t) * z0, eta);
    const double defect = std::abs(std::abs(eta) / s.rho - implicit_target(r0, t));
    traj.max_defect = std::max(traj.max_defect, defect);
    traj.states.push_back(s);
  };

  double t = 0.0, y = eta0;
  record(t, y);
  if (T == 0.0) return traj;
  const double h_max = T / 16.0;
  double h = std::min(h_max, 1e-3);
  double k1 = rhs(t, z0, y);
  while (t < T) {
    // Take the remainder in one step rather than leaving a sliver.
    if (t + h >= T || T - (t + h) < 1e-3 * h) h = T - t;
    const double k2 = rhs(t + c2 * h, z0, y + h * a21 * k1);
    const double k3 = rhs(t + c3 * h, z0, y + h * (a31 * k1 + a32 * k2));
    const double k4 = rhs(t + c4 * h, z0, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = rhs(t + c5 * h, z0, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = rhs(t + h, z0, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = rhs(t + h, z0, y5);
    const double err_est = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double scale = tolerance * (1.0 + std::abs(y5));
    const double err = std::abs(err_est) / scale;
    if (err <= 1.0 && sign_of(y5) == sign_of(y)) {
      t = (T - t <= h) ? T : t + h;
      y = y5;
      k1 = k7;
      record(t, y);
      if (std::abs(y) < kEtaFloor) {
        traj.truncated = true;
        break;
      }
    } else {
      ++traj.rejected_steps;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h = std::min(h_max, h * std::clamp(factor, 0.2, 5.0));
    if (t < T && h < 1e-15 * std::max(1.0, t))
      throw Error(ErrorCode::CrossedZero, "step size underflow");
  }
  return traj;
}

BackwardResult flow_backward(cd z_t, double eta_t, double T) {
  if (eta_t == 0.0) throw Error(ErrorCode::ZeroEta, "eta_T must be nonzero");
  BackwardResult out;
  if (T == 0.0) {
    out.z0 = z_t;
    out.eta0 = eta_t;
    out.dist = std::hypot(eta_t, 0.5 * support_gap(z_t).gap_delta);
    out.c_star = std::numeric_limits<double>::infinity();
    return out;
  }
  out.z0 = std::exp(0.5 * T) * z_t;
  const double target = eta_rho_ratio(z_t, eta_t);
  auto h = [&](double eta0) { return implicit_target(eta_rho_ratio(out.z0, eta0), T) - target; };
  double lo = std::abs(eta_t) * std::exp(0.5 * T);
  for (int k = 0; h(lo) > 0.0; ++k) {
    if (k > 200) throw Error(ErrorCode::ShootingFailure, "lower bracket not found");
    lo *= 0.5;
  }
  double hi = 2.0 * lo;
  for (int k = 0; h(hi) < 0.0; ++k) {
    if (k > 200) throw Error(ErrorCode::ShootingFailure, "upper bracket not found");
    hi *= 2.0;
  }
  out.eta0 = sign_of(eta_t) * solve_increasing(h, lo, hi);
  const SupportInfo sup = support_gap(out.z0);
  out.dist = std::hypot(out.eta0, 0.5 * sup.gap_delta);
  out.c_star = out.dist / T;
  return out;
}

IntegralCheck integral_identity_check(cd z0, double eta0, double s, double t, double alpha) {
  IntegralCheck c;
  if (t <= s) return c;
  using boost::math::quadrature::gauss_kronrod;
  auto state = [&](double r) { return flow_state_implicit(z0, eta0, r); };
  auto f1 = [&](double r) {
    const CharState st = state(r);
    return st.rho / std::abs(st.eta);
  };
  auto f2 = [&](double r) { return std::pow(std::abs(state(r).eta), -alpha); };
  double err = 0.0;
  c.integral = gauss_kronrod<double, 31>::integrate(f1, s, t, 8, 1e-10, &err);
  const CharState cs = state(s), ct = state(t);
  c.closed_form = (std::log(std::abs(cs.eta) / std::abs(ct.eta)) - 0.5 * (t - s)) / kPi;
  c.residual = std::abs(c.integral - c.closed_form);
  c.alpha_integral = gauss_kronrod<double, 31>::integrate(f2, s, t, 8, 1e-10, &err);
  c.c_alpha = c.alpha_integral * std::pow(std::abs(ct.eta), alpha - 1.0) * ct.rho;
  return c;
}

EvolutionCheck m12_evolution_check(cd z1, double eta1, cd z2, double eta2, const Block& a1,
                                   const Block& a2, double t, double h) {
  auto points = [&](double tt) {
    const CharState s1 = flow_state_implicit(z1, eta1, tt);
    const CharState s2 = flow_state_implicit(z2, eta2, tt);
    return std::make_pair(axis_point(s1.z, s1.eta), axis_point(s2.z, s2.eta));
  };
  const Block id = Block::Identity();
  if (t > 0.0) h = std::min(h, 0.5 * t);
  const auto [p1, p2] = points(t);
  const auto [f1, f2] = points(t + h);
  const auto [b1, b2] = points(t - h);
  const auto [ff1, ff2] = points(t + 2.0 * h);
  const auto [bb1, bb2] = points(t - 2.0 * h);

  // Fourth-order central differences.
  auto derivative = [&](const Block& fp, const Block& fm, const Block& fpp, const Block& fmm) -> Block {
    return (8.0 * (fp - fm) - (fpp - fmm)) / (12.0 * h);
  };
  const Block x12 = m12(p1, a1, p2);
  const Block x21 = m12(p2, a2, p1);
  const Block y = m121(p1, a1, p2, a2);
  const Block dx = derivative(m12(f1, a1, f2), m12(b1, a1, b2), m12(ff1, a1, ff2), m12(bb1, a1, bb2));
  const Block dy = derivative(m121(f1, a1, f2, a2), m121(b1, a1, b2, a2), m121(ff1, a1, ff2, a2),
                              m121(bb1, a1, bb2, a2));
  const cd davg = block_trace(dx * a2);

  EvolutionCheck c;
  c.average = std::abs(davg - (block_trace(x12 * a2) + block_trace(covariance(x12) * x21)));
  c.iso12 = max_entry(dx - (x12 + m12(p1, covariance(x12), p2)));
  c.literal_iso12 = max_entry(dx - (x12 + covariance(x12) * m12(p2, id, p1)));
  const Block corrected = 1.5 * y + m12(p1, covariance(y), p1) + m121(p1, a1, p2, covariance(x21)) +
                          m121(p1, covariance(x12), p2, a2);
  c.iso121 = max_entry(dy - corrected);
  const Block literal = y + covariance(y) * m12(p1, id, p1) + covariance(x12) * m121(p1, id, p2, a2) +
                        m121(p1, a1, p2, id) * covariance(x21);
  c.literal_iso121 = max_entry(dy - literal);
  return c;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,re_z,im_z,eta,re_m,im_m,rho\n";
  char buf[512];
  for (const CharState& s : traj.states) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.z.real(),
                  s.z.imag(), s.eta, s.m.real(), s.m.imag(), s.rho);
    os << buf;
  }
}

}  // namespace nhlaw
