#include "nhlaw/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "nhlaw/errors.hpp"

namespace nhlaw {
namespace {

struct Cubic {
  cd c2, c1, c0;
  cd operator()(cd m) const { return ((m + c2) * m + c1) * m + c0; }
  cd derivative(cd m) const { return (3.0 * m + 2.0 * c2) * m + c1; }
};

Cubic make_cubic(cd z, cd w) { return {2.0 * w, w * w + 1.0 - std::norm(z), w}; }

cd polish(const Cubic& p, cd m) {
  for (int it = 0; it < 4; ++it) {
    const cd d = p.derivative(m);
    if (std::abs(d) == 0.0) break;
    const cd next = m - p(m) / d;
    if (!(std::abs(p(next)) < std::abs(p(m)))) break;
    m = next;
  }
  return m;
}

DysonSolution finish(cd w, cd m) { return {m, m / (w + m), std::abs(m.imag()) / kPi}; }

// Safeguarded Newton for a real function with f(lo) < 0 < f(hi).
template <class F, class DF>
double bracketed_newton(F f, DF df, double lo, double hi, double x) {
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) lo = x; else hi = x;
    const double d = df(x);
    double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next) ||
        hi - lo <= std::numeric_limits<double>::min()) {
      return next;
    }
    x = next;
  }
  return x;
}

cd continue_root(cd z, cd w) {
  const double sgn = w.imag() > 0.0 ? 1.0 : -1.0;
  const double eta_t = std::abs(w.imag());
  const double e = w.real();
  const double eta_s = 2.0 * eta_t + 16.0 + 4.0 * std::abs(e);

  auto pick_start = [&](cd ws) {
    int count = 0;
    cd found{};
    for (const cd r : cubic_roots(z, ws))
      if (r.imag() * ws.imag() > 0.0) { found = r; ++count; }
    if (count != 1) throw Error(ErrorCode::DivergedContinuation, "ambiguous start root");
    return found;
  };

  cd prev = pick_start({e, sgn * eta_s});
  const double ls = std::log(eta_s), lt = std::log(eta_t);
  double tau = 0.0, dtau = 1.0 / 64.0;
  while (tau < 1.0) {
    const double tn = std::min(1.0, tau + dtau);
    const cd wn{e, sgn * std::exp((1.0 - tn) * ls + tn * lt)};
    auto roots = cubic_roots(z, wn);
    std::array<double, 3> dist{};
    for (int k = 0; k < 3; ++k) dist[k] = std::abs(roots[k] - prev);
    const int best = static_cast<int>(std::min_element(dist.begin(), dist.end()) - dist.begin());
    double second = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k)
      if (k != best) second = std::min(second, dist[k]);
    if (dist[best] < 0.3 * second) {
      prev = roots[best];
      tau = tn;
      dtau = std::min(dtau * 1.5, 0.25);
    } else {
      dtau *= 0.5;
      if (dtau < 1e-14) throw Error(ErrorCode::DivergedContinuation, "root tracking failed");
    }
  }
  if (!(prev.imag() * w.imag() > 0.0))
    throw Error(ErrorCode::NoValidRoot, "continued root violates Im m * Im w > 0");
  return prev;
}

// Real root of t^3 + c2 t^2 + c1 t + c0 with c0 > 0; one lies in [-B, 0].
double negative_real_root(double c2, double c1, double c0) {
  auto f = [&](double t) { return ((t + c2) * t + c1) * t + c0; };
  auto df = [&](double t) { return (3.0 * t + 2.0 * c2) * t + c1; };
  const double bound = 1.0 + std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
  // f(-bound) < 0 < f(0) = c0
  return bracketed_newton(f, df, -bound, 0.0, -0.5 * c0 / std::max(1.0, c1 > 0 ? c1 : 1.0));
}

struct DensityModel {
  cd z;
  SupportInfo support;

  explicit DensityModel(cd z_) : z(z_), support(support_gap(z_)) {}

  double integrate(double a, double b) const {
    a = std::max(a, 0.5 * support.gap_delta);
    b = std::min(b, support.right_edge);
    if (b <= a) return 0.0;
    // Double-exponential rule: the density has algebraic singularities at the
    // support edges (square root) and at 0 when |z| = 1 (cube root).
    auto f = [this](double e) { return density(z, e); };
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate(f, a, b, 1e-12);
  }

  double quantile(double mass) const {
    const double lo = 0.5 * support.gap_delta;
    const double hi = support.right_edge;
    const double total = integrate(lo, hi);
    if (mass > total + 1e-10)
      throw Error(ErrorCode::QuadratureFailure, "target mass exceeds the half-line mass");
    if (mass >= total) return hi;
    auto g = [&](double x) { return integrate(lo, x) - mass; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, -mass, total - mass, tol, iters);
    return 0.5 * (a + b);
  }
};

}  // namespace

std::array<cd, 3> cubic_roots(cd z, cd w) {
  const Cubic p = make_cubic(z, w);
  Eigen::Matrix3cd companion = Eigen::Matrix3cd::Zero();
  companion(0, 0) = -p.c2;
  companion(0, 1) = -p.c1;
  companion(0, 2) = -p.c0;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(companion, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoValidRoot, "companion eigensolve failed");
  std::array<cd, 3> roots{};
  for (int k = 0; k < 3; ++k) roots[k] = polish(p, es.eigenvalues()(k));
  return roots;
}

double cubic_residual(cd z, cd w, cd m) { return std::abs(make_cubic(z, w)(m)); }

DysonSolution solve_m(cd z, cd w) {
  if (w.imag() == 0.0)
    throw Error(ErrorCode::NoValidRoot, "Im w = 0 requires the boundary solver");
  if (w.real() == 0.0) return solve_m_axis(z, w.imag());
  int count = 0;
  cd found{};
  for (const cd r : cubic_roots(z, w))
    if (r.imag() * w.imag() > 0.0) { found = r; ++count; }
  if (count == 1) return finish(w, found);
  return finish(w, polish(make_cubic(z, w), continue_root(z, w)));
}

DysonSolution solve_m_axis(cd z, double eta) {
  const double a = std::norm(z);
  if (eta == 0.0) {
    const double mu = a < 1.0 ? std::sqrt(1.0 - a) : 0.0;
    return {cd(0.0, mu), cd(a <= 1.0 ? 1.0 : 1.0 / a, 0.0), mu / kPi};
  }
  const double h = std::abs(eta);
  const double lin = 1.0 - a - h * h;
  auto f = [&](double mu) { return ((mu + 2.0 * h) * mu - lin) * mu - h; };
  auto df = [&](double mu) { return (3.0 * mu + 4.0 * h) * mu - lin; };
  double guess;
  if (a < 1.0) guess = std::sqrt(1.0 - a);
  else if (a > 1.0) guess = std::min(h / (a - 1.0), std::cbrt(h));
  else guess = std::cbrt(h);
  guess = std::clamp(guess, 1e-300, 1.0);
  // f(0) = -h < 0 and f(1) = a + h + h^2 > 0: the positive root is unique.
  const double mu = bracketed_newton(f, df, 0.0, 1.0, guess);
  const double s = eta > 0.0 ? 1.0 : -1.0;
  return {cd(0.0, s * mu), cd(mu / (h + mu), 0.0), mu / kPi};
}

DysonSolution solve_m_boundary(cd z, double e) {
  if (e == 0.0) return solve_m_axis(z, 0.0);
  const cd m1 = solve_m(z, cd(e, kBoundaryEpsilon)).m;
  const cd m2 = solve_m(z, cd(e, 0.5 * kBoundaryEpsilon)).m;
  cd m = 2.0 * m2 - m1;
  if (m.imag() < 0.0) m = cd(m.real(), 0.0);
  return {m, m / (e + m), m.imag() / kPi};
}

Block m_matrix(cd z, const DysonSolution& s) {
  Block b;
  b << s.m, -z * s.u, -std::conj(z) * s.u, s.m;
  return b;
}

Block m_matrix(cd z, cd w) {
  if (w.imag() == 0.0) return m_matrix(z, solve_m_boundary(z, w.real()));
  return m_matrix(z, solve_m(z, w));
}

MdeCheck verify_mde(const Block& m, cd z, cd w) {
  if (std::abs(m.determinant()) < 1e-300) throw Error(ErrorCode::SingularM, "M is not invertible");
  Block zb;
  zb << 0.0, z, std::conj(z), 0.0;
  const Block r = m.inverse() + w * Block::Identity() + zb + covariance(m);
  const double residual = Eigen::JacobiSVD<Block>(r).singularValues()(0);
  const Block im = (m - m.adjoint()) / (2.0 * kI);
  Eigen::SelfAdjointEigenSolver<Block> es(im);
  const auto& ev = es.eigenvalues();
  bool side;
  if (w.imag() > 0.0) side = ev(0) > 0.0;
  else if (w.imag() < 0.0) side = ev(1) < 0.0;
  else side = ev(0) >= -1e-12;
  return {residual, side};
}

double density(cd z, double e) {
  const double a = std::norm(z);
  const double x = std::abs(e);
  if (x == 0.0) return a < 1.0 ? std::sqrt(1.0 - a) / kPi : 0.0;
  // At real w the cubic has real coefficients; the density is the imaginary
  // part of its complex-conjugate root pair, if any.
  const double c2 = 2.0 * x, c1 = x * x + 1.0 - a, c0 = x;
  const double r = negative_real_root(c2, c1, c0);
  const double p = c2 + r;
  const double q = c1 + r * p;
  const double disc = 4.0 * q - p * p;
  return disc > 0.0 ? 0.5 * std::sqrt(disc) / kPi : 0.0;
}

SupportInfo support_gap(cd z) {
  const double a = std::norm(z);
  const double top = std::sqrt(a) + 3.0;
  const double step = 0.005;
  double inside = -1.0;
  for (double e = 0.0; e <= top; e += step) {
    if (density(z, e) > kDensityThreshold) { inside = e; break; }
  }
  if (inside < 0.0) throw Error(ErrorCode::NoValidRoot, "support not found");

  double lo = inside, hi = top;
  while (hi - lo > kEdgeTolerance) {
    const double mid = 0.5 * (lo + hi);
    (density(z, mid) > kDensityThreshold ? lo : hi) = mid;
  }
  SupportInfo info{0.0, 0.5 * (lo + hi)};
  if (a > 1.0) {
    lo = 0.0;
    hi = inside;
    while (hi - lo > kEdgeTolerance) {
      const double mid = 0.5 * (lo + hi);
      (density(z, mid) > kDensityThreshold ? hi : lo) = mid;
    }
    info.gap_delta = lo + hi;
  }
  return info;
}

double integrated_density(cd z, double a, double b) { return DensityModel(z).integrate(a, b); }

std::vector<double> quantiles(cd z, int n, const std::vector<int>& indices) {
  if (n < 2) throw Error(ErrorCode::IndexOutOfRange, "n must be at least 2");
  const DensityModel model(z);
  std::vector<double> out;
  out.reserve(indices.size());
  for (const int i : indices) {
    if (i == 0 || std::abs(i) > n) throw Error(ErrorCode::IndexOutOfRange, "quantile index outside [1, n]");
    const double g = model.quantile(static_cast<double>(std::abs(i)) / (2.0 * n));
    out.push_back(i > 0 ? g : -g);
  }
  return out;
}

double fluctuation_scale(cd z, int n) { return quantiles(z, n, {1}).front(); }

}  // namespace nhlaw
