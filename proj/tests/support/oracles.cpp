#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

std::array<cd, 3> durand_kerner(cd z, cd w) {
  const cd c2 = 2.0 * w, c1 = w * w + 1.0 - std::norm(z), c0 = w;
  auto p = [&](cd m) { return ((m + c2) * m + c1) * m + c0; };
  std::array<cd, 3> r{cd(0.4, 0.9), cd(0.4, 0.9) * cd(0.4, 0.9), cd(0.4, 0.9) * cd(0.4, 0.9) * cd(0.4, 0.9)};
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (int k = 0; k < 3; ++k) {
      cd den = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != k) den *= r[k] - r[j];
      const cd step = p(r[k]) / den;
      r[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-16) break;
  }
  return r;
}

Block mde_fixed_point(cd z, cd w) {
  Block zz;
  zz << 0.0, z, std::conj(z), 0.0;
  const double s = w.imag() > 0 ? 1.0 : -1.0;
  Block m = cd(0.0, s) * Block::Identity();
  for (int it = 0; it < 200000; ++it) {
    Block sm = Block::Zero();
    sm(0, 0) = m(1, 1);
    sm(1, 1) = m(0, 0);
    const Block next = -(w * Block::Identity() + zz + sm).inverse();
    const Block upd = 0.5 * (m + next);
    const double change = (upd - m).norm();
    m = upd;
    if (change < 1e-15) break;
  }
  return m;
}

namespace {

std::array<double, 2> edge_roots(double a) {
  const double qa = 4.0 * a, qb = -(8.0 * a * a + 20.0 * a - 1.0), qc = 4.0 * std::pow(a - 1.0, 3);
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  return {(-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa)};
}

}  // namespace

double edge_half_gap(double a) {
  if (a <= 1.0) return 0.0;
  return std::sqrt(edge_roots(a)[0]);
}

double edge_right(double a) {
  if (a == 0.0) return 2.0;
  return std::sqrt(edge_roots(a)[1]);
}

double semicircle_mass(double x) {
  x = std::min(x, 2.0);
  return (0.5 * x * std::sqrt(4.0 - x * x) + 2.0 * std::asin(0.5 * x)) / (2.0 * nhlaw::kPi);
}

Mat dense_s(const Mat& x) {
  const int n = static_cast<int>(x.rows()) / 2;
  cd t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < n; ++i) {
    t1 += x(i, i);
    t2 += x(n + i, n + i);
  }
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    out(i, i) = t2 / static_cast<double>(n);
    out(n + i, n + i) = t1 / static_cast<double>(n);
  }
  return out;
}

namespace {

Mat kron_identity(const Block& b, int n) {
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < n; ++i) out(r * n + i, c * n + i) = b(r, c);
  return out;
}

}  // namespace

Mat dense_b(const Block& m1, const Block& m2, int n) {
  const int d = 2 * n;
  const Mat big1 = kron_identity(m1, n), big2 = kron_identity(m2, n);
  Mat op(d * d, d * d);
  for (int col = 0; col < d * d; ++col) {
    Mat e = Mat::Zero(d, d);
    e(col % d, col / d) = 1.0;
    const Mat image = e - big1 * dense_s(e) * big2;
    op.col(col) = Eigen::Map<const Vec>(image.data(), d * d);
  }
  return op;
}

Mat dense_b_solve(const Block& m1, const Block& m2, const Mat& y) {
  const int d = static_cast<int>(y.rows());
  const Mat op = dense_b(m1, m2, d / 2);
  const Vec rhs = Eigen::Map<const Vec>(y.data(), d * d);
  const Vec sol = op.fullPivLu().solve(rhs);
  return Eigen::Map<const Mat>(sol.data(), d, d);
}

Mat hermitize(const Mat& x, cd z) {
  const int n = static_cast<int>(x.rows());
  Mat h = Mat::Zero(2 * n, 2 * n);
  const Mat shifted = x - z * Mat::Identity(n, n);
  h.topRightCorner(n, n) = shifted;
  h.bottomLeftCorner(n, n) = shifted.adjoint();
  return h;
}

Mat dense_resolvent(const Mat& x, cd z, double eta) {
  const Mat h = hermitize(x, z);
  const Mat shifted = h - cd(0.0, eta) * Mat::Identity(h.rows(), h.cols());
  return shifted.partialPivLu().inverse();
}

Mat im_part(const Mat& g) { return (g - g.adjoint()) / cd(0.0, 2.0); }

Mat dense_abs_resolvent(const Mat& x, cd z, double eta) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(x, z));
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd k(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) k(i) = 1.0 / std::hypot(lam(i), eta);
  return es.eigenvectors() * k.asDiagonal() * es.eigenvectors().adjoint();
}

cd ntrace(const Mat& a) { return a.trace() / static_cast<double>(a.rows()); }

double axis_mu_bisect(double a, double eta) {
  auto f = [&](double mu) { return ((mu + 2.0 * eta) * mu - (1.0 - a - eta * eta)) * mu - eta; };
  double lo = 0.0, hi = 1.0;
  if (f(lo) > 0 || f(hi) < 0) throw std::runtime_error("axis_mu_bisect: no sign change");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double rk4_eta(cd z0, double eta0, double t, int steps) {
  const double h = t / steps;
  auto rhs = [&](double s, double eta) {
    const double a = std::norm(z0) * std::exp(-s);
    const double mu = axis_mu_bisect(a, std::abs(eta));
    return -(eta > 0 ? mu : -mu) - 0.5 * eta;
  };
  double eta = eta0;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const double k1 = rhs(s, eta);
    const double k2 = rhs(s + 0.5 * h, eta + 0.5 * h * k1);
    const double k3 = rhs(s + 0.5 * h, eta + 0.5 * h * k2);
    const double k4 = rhs(s + h, eta + h * k3);
    eta += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  return eta;
}

Mat random_ginibre(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat x(n, n);
  const double s = 1.0 / std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = cd(g(gen), g(gen)) * s;
  return x;
}

}  // namespace oracle
