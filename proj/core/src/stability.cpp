#include "nhlaw/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "nhlaw/ensemble.hpp"
#include "nhlaw/errors.hpp"

namespace nhlaw {
namespace {

using Matrix4cd = Eigen::Matrix<cd, 4, 4>;
using Vector4cd = Eigen::Matrix<cd, 4, 1>;

double spectral_norm(const Block& b) { return Eigen::JacobiSVD<Block>(b).singularValues()(0); }

Block from_vec(const Vector4cd& v) {
  Block b;
  b << v(0), v(2), v(1), v(3);  // column-major order of Block::data()
  return b;
}

Vector4cd to_vec(const Block& b) {
  Vector4cd v;
  v << b(0, 0), b(1, 0), b(0, 1), b(1, 1);
  return v;
}

Matrix4cd operator_matrix(const PointData& p1, const PointData& p2, bool adjoint) {
  Matrix4cd op;
  for (int k = 0; k < 4; ++k) {
    Vector4cd e = Vector4cd::Zero();
    e(k) = 1.0;
    const Block x = from_vec(e);
    op.col(k) = to_vec(adjoint ? b_adjoint(p1, p2, x) : b_operator(p1, p2, x));
  }
  return op;
}

Block numerical_eigvec(const Matrix4cd& op, cd target) {
  Eigen::ComplexEigenSolver<Matrix4cd> es(op);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::DegenerateEigenvectors, "4x4 eigensolve failed");
  Eigen::Index best = 0;
  (es.eigenvalues().array() - target).abs().minCoeff(&best);
  return from_vec(es.eigenvectors().col(best));
}

struct Betas {
  cd zz, sqrt_s, s, plus, minus;
};

Betas compute_betas(const PointData& p1, const PointData& p2) {
  const cd m1 = p1.sol.m, m2 = p2.sol.m, u1 = p1.sol.u, u2 = p2.sol.u;
  Betas b;
  b.zz = p1.z * std::conj(p2.z);
  const double im = b.zz.imag();
  b.s = m1 * m1 * m2 * m2 - u1 * u1 * u2 * u2 * im * im;
  // Boundary of the cut: a negative real s is approached from above.
  if (std::abs(b.s.imag()) < 1e-14) b.s = cd(b.s.real(), 0.0);
  b.sqrt_s = std::sqrt(b.s);
  const cd base = 1.0 - u1 * u2 * b.zz.real();
  b.plus = base + b.sqrt_s;
  b.minus = base - b.sqrt_s;
  return b;
}

struct TraceSystem {
  cd a, b;  // normalized traces of the two diagonal blocks of X
};

// Solves for the block traces of X with X - M1 S[X] M2 = Y.
TraceSystem trace_system(const PointData& p1, const PointData& p2, cd t1, cd t2) {
  const Block q1 = p1.m * block_e1() * p2.m;
  const Block q2 = p1.m * block_e2() * p2.m;
  const cd a11 = 1.0 - q2(0, 0), a12 = -q1(0, 0);
  const cd a21 = -q2(1, 1), a22 = 1.0 - q1(1, 1);
  const cd det = a11 * a22 - a12 * a21;
  if (std::abs(det) < kSingularStability)
    throw Error(ErrorCode::SingularStability, "stability determinant below threshold");
  return {(t1 * a22 - a12 * t2) / det, (a11 * t2 - a21 * t1) / det};
}

Block correction(const PointData& p1, const PointData& p2, const TraceSystem& t) {
  return p1.m * (t.b * block_e1() + t.a * block_e2()) * p2.m;
}

Mat sandwich(const Block& left, const Mat& a, const Block& right) {
  return block_right(block_left(left, a), right);
}

}  // namespace

PointData axis_point(cd z, double eta) {
  PointData p{z, cd(0.0, eta), solve_m_axis(z, eta), Block::Zero()};
  p.m = m_matrix(z, p.sol);
  return p;
}

PointData make_point(cd z, cd w) {
  if (w.real() == 0.0) return axis_point(z, w.imag());
  PointData p{z, w, solve_m(z, w), Block::Zero()};
  p.m = m_matrix(z, p.sol);
  return p;
}

PointData conjugate_point(const PointData& p) {
  PointData q = p;
  q.w = std::conj(p.w);
  q.sol.m = std::conj(p.sol.m);
  q.sol.u = std::conj(p.sol.u);
  q.m = m_matrix(q.z, q.sol);
  return q;
}

Block s_operator(const Block& a) { return covariance(a); }
Block s_operator(const Mat& a) { return covariance(a); }

Block b_operator(const PointData& p1, const PointData& p2, const Block& x) {
  return x - p1.m * covariance(x) * p2.m;
}

Mat b_operator(const PointData& p1, const PointData& p2, const Mat& x) {
  const int n = static_cast<int>(x.rows()) / 2;
  return x - embed(p1.m * covariance(x) * p2.m, n);
}

Block b_adjoint(const PointData& p1, const PointData& p2, const Block& y) {
  return y - covariance(Block(p1.m.adjoint() * y * p2.m.adjoint()));
}

StabilityBundle stability_eigs(const PointData& p1, const PointData& p2) {
  const Betas bt = compute_betas(p1, p2);
  const cd m1 = p1.sol.m, m2 = p2.sol.m, u1 = p1.sol.u, u2 = p2.sol.u;
  StabilityBundle out;
  out.beta_plus = bt.plus;
  out.beta_minus = bt.minus;
  out.s = bt.s;
  out.sqrt_s = bt.sqrt_s;

  const double scale = std::max(1.0, std::abs(bt.sqrt_s));
  for (int sg : {1, -1}) {
    const cd d = kI * u1 * u2 * bt.zz.imag() - static_cast<double>(sg) * bt.sqrt_s;
    Block r, l;
    if (std::abs(d) < 1e-14 * scale) {
      out.fallback = true;
      const cd beta = sg > 0 ? bt.plus : bt.minus;
      r = numerical_eigvec(operator_matrix(p1, p2, false), beta);
      l = numerical_eigvec(operator_matrix(p1, p2, true), std::conj(beta)).adjoint();
    } else {
      const cd diag = -u1 * u2 * bt.zz.real() + static_cast<double>(sg) * bt.sqrt_s;
      r << diag, p1.z * u1 * m2 + m1 * m1 * p2.z * u2 * m2 / d,
          std::conj(p2.z) * u2 * m1 + m2 * m2 * std::conj(p1.z) * u1 * m1 / d, m1 * m2 / d * diag;
      l << d / (m1 * m2), 0.0, 0.0, 1.0;
    }
    (sg > 0 ? out.r_plus : out.r_minus) = r;
    (sg > 0 ? out.l_plus : out.l_minus) = l;
  }
  return out;
}

Block stability_inverse(const PointData& p1, const PointData& p2, const Block& y) {
  const TraceSystem t = trace_system(p1, p2, y(0, 0), y(1, 1));
  return y + correction(p1, p2, t);
}

Mat stability_inverse(const PointData& p1, const PointData& p2, const Mat& y) {
  const auto [t1, t2] = diagonal_block_traces(y);
  const TraceSystem t = trace_system(p1, p2, t1, t2);
  return y + embed(correction(p1, p2, t), static_cast<int>(y.rows()) / 2);
}

Block m12(const PointData& p1, const Block& a, const PointData& p2) {
  return stability_inverse(p1, p2, Block(p1.m * a * p2.m));
}

Mat m12(const PointData& p1, const Mat& a, const PointData& p2) {
  return stability_inverse(p1, p2, sandwich(p1.m, a, p2.m));
}

Block hat_m12(const PointData& p1, const Block& a, const PointData& p2) {
  const PointData c1 = conjugate_point(p1), c2 = conjugate_point(p2);
  return -0.25 * (m12(p1, a, p2) - m12(p1, a, c2) - m12(c1, a, p2) + m12(c1, a, c2));
}

Mat hat_m12(const PointData& p1, const Mat& a, const PointData& p2) {
  const PointData c1 = conjugate_point(p1), c2 = conjugate_point(p2);
  return -0.25 * (m12(p1, a, p2) - m12(p1, a, c2) - m12(c1, a, p2) + m12(c1, a, c2));
}

Block m121(const PointData& p1, const Block& a1, const PointData& p2, const Block& a2) {
  const Block x12 = m12(p1, a1, p2);
  const Block x21 = m12(p2, a2, p1);
  const Block y = p1.m * a1 * x21 + p1.m * covariance(x12) * x21;
  return stability_inverse(p1, p1, y);
}

Mat m121(const PointData& p1, const Mat& a1, const PointData& p2, const Mat& a2) {
  const Block x12 = covariance(m12(p1, a1, p2));
  const Mat x21 = m12(p2, a2, p1);
  const Mat y = block_left(p1.m, a1) * x21 + block_left(Block(p1.m * x12), x21);
  return stability_inverse(p1, p1, y);
}

ControlParams control_params(const PointData& p1, const PointData& p2) {
  const double r1 = p1.rho(), r2 = p2.rho();
  const double e1 = std::abs(p1.eta()), e2 = std::abs(p2.eta());
  const double dz = std::abs(p1.z - p2.z);
  ControlParams c;
  c.hat_gamma = dz * dz + r1 * e1 + r2 * e2 + (e1 / r1) * (e1 / r1) + (e2 / r2) * (e2 / r2);
  c.denominator = dz + r1 * r1 + r2 * r2 + e1 / r1 + e2 / r2;
  c.gamma = c.hat_gamma / c.denominator;
  c.ell = std::min(r1 * e1, r2 * e2);
  c.eta_star = std::min(e1, e2);
  c.rho_star = std::max(r1, r2);
  return c;
}

cd trace_formula(const PointData& p1, const PointData& p2, int a, int b) {
  const Betas bt = compute_betas(p1, p2);
  const cd pb = bt.plus * bt.minus;
  if (std::abs(pb) < kSingularStability)
    throw Error(ErrorCode::SingularStability, "beta product below threshold");
  const cd m1 = p1.sol.m, m2 = p2.sol.m, u1 = p1.sol.u, u2 = p2.sol.u;
  if (a == b) {
    const double sg = a > 0 ? 1.0 : -1.0;
    const cd num = m1 * m1 * m2 * m2 + sg * m1 * m2 + bt.zz.real() * u1 * u2 -
                   std::norm(p1.z) * std::norm(p2.z) * u1 * u1 * u2 * u2;
    return sg * num / pb;
  }
  const cd cross = kI * bt.zz.imag() * u1 * u2 / pb;
  return a < 0 ? -cross : cross;
}

BetaComparison beta_comparison(const PointData& p1, const PointData& p2) {
  const Betas bt = compute_betas(p1, p2);
  const cd m1 = p1.sol.m, m2 = p2.sol.m, u1 = p1.sol.u, u2 = p2.sol.u;
  const ControlParams cp = control_params(p1, p2);
  const double r1 = p1.rho(), r2 = p2.rho();
  const double e1 = std::abs(p1.eta()), e2 = std::abs(p2.eta());
  const double dz = std::abs(p1.z - p2.z);

  BetaComparison c;
  c.product = bt.plus * bt.minus;
  c.sum = bt.plus + bt.minus;
  c.bb = c.sum - c.product;
  c.diff = bt.plus - bt.minus;

  const cd expanded = u1 * u2 * dz * dz - m1 * m1 * (u2 / u1) * (1.0 - u1) -
                      m2 * m2 * (u1 / u2) * (1.0 - u2) + (1.0 - u1) * (1.0 - u2);
  c.product_residual = std::abs(c.product - expanded);
  c.sum_residual = std::abs(c.sum - (2.0 - 2.0 * u1 * u2 * bt.zz.real()));
  c.bb_residual = std::abs(c.bb - (1.0 - u1 * u2 - u2 * m1 * m1 - u1 * m2 * m2));

  const double bb_ref = r1 * r1 + r2 * r2 + e1 / r1 + e2 / r2;
  c.prod_ratio = std::abs(c.product) / cp.hat_gamma;
  c.sum_ratio = std::abs(c.sum) / (dz * dz + bb_ref);
  c.bb_ratio = std::abs(c.bb) / bb_ref;
  c.diff_re_ratio = std::abs(c.diff.real()) / (r1 * r2);
  const double im = std::abs(c.diff.imag());
  c.diff_im_ratio = dz > 0.0 ? im / dz : (im > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  c.min_beta_ratio = std::min(std::abs(bt.plus), std::abs(bt.minus)) / cp.gamma;
  const double mag = std::abs(c.diff);
  c.dichotomy = mag > 0.0 ? std::min(std::abs(c.diff.real()), im) / mag : 0.0;
  auto real_positive = [](cd v) { return v.real() > 0.0 && std::abs(v.imag()) <= 1e-12 * std::abs(v); };
  c.positive = real_positive(c.product) && real_positive(c.sum) && real_positive(c.bb);
  return c;
}

std::vector<std::pair<PointData, PointData>> sweep_points(const SweepSpec& spec) {
  const CounterRng rng(spec.seed, 0, 7);
  std::vector<std::pair<PointData, PointData>> out;
  out.reserve(static_cast<std::size_t>(spec.draws));
  const double lmin = std::log10(spec.eta_min), lmax = std::log10(spec.eta_max);
  std::uint64_t c = 0;
  auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(c++); };
  auto sign = [&]() { return rng.uniform(c++) < 0.5 ? -1.0 : 1.0; };
  for (int t = 0; t < spec.draws; ++t) {
    const cd z1 = std::polar(unif(0.0, spec.z_max), unif(0.0, 2.0 * kPi));
    cd z2 = std::polar(unif(0.0, spec.z_max), unif(0.0, 2.0 * kPi));
    if (t % 3 == 0) z2 = z1 + 1e-3 * rng.gaussian(c++);
    const double e1 = std::pow(10.0, unif(lmin, lmax)) * sign();
    double e2 = std::pow(10.0, unif(lmin, lmax)) * sign();
    if (t % 5 == 0) e2 = e1 * sign();
    out.emplace_back(axis_point(z1, e1), axis_point(z2, e2));
  }
  return out;
}

LemmaBetaReport lemma_beta_report(const SweepSpec& spec) {
  LemmaBetaReport r;
  r.min_prod = r.min_sum = r.min_bb = r.min_beta = std::numeric_limits<double>::infinity();
  for (const auto& [p1, p2] : sweep_points(spec)) {
    const BetaComparison c = beta_comparison(p1, p2);
    ++r.draws;
    r.min_prod = std::min(r.min_prod, c.prod_ratio);
    r.max_prod = std::max(r.max_prod, c.prod_ratio);
    r.min_sum = std::min(r.min_sum, c.sum_ratio);
    r.max_sum = std::max(r.max_sum, c.sum_ratio);
    r.min_bb = std::min(r.min_bb, c.bb_ratio);
    r.max_bb = std::max(r.max_bb, c.bb_ratio);
    r.max_diff_re = std::max(r.max_diff_re, c.diff_re_ratio);
    r.max_diff_im = std::max(r.max_diff_im, c.diff_im_ratio);
    r.min_beta = std::min(r.min_beta, c.min_beta_ratio);
    r.max_dichotomy = std::max(r.max_dichotomy, c.dichotomy);
    r.max_identity_residual =
        std::max({r.max_identity_residual, c.product_residual, c.sum_residual, c.bb_residual});
    if (!c.positive) ++r.positivity_failures;
  }
  const double lo = 1.0 / kComparability, hi = kComparability;
  auto within = [&](double a, double b) { return a >= lo && b <= hi; };
  r.pass = r.positivity_failures == 0 && within(r.min_prod, r.max_prod) &&
           within(r.min_sum, r.max_sum) && within(r.min_bb, r.max_bb) && r.max_diff_re <= hi &&
           r.max_diff_im <= hi && r.min_beta >= lo && r.max_dichotomy <= 1e-12 &&
           r.max_identity_residual <= 1e-12;
  return r;
}

BoundAudit bound_audit(const SweepSpec& spec) {
  const std::array<Block, 6> as{block_eplus(), block_eminus(), block_f(), block_fstar(), block_e1(), block_e2()};
  const CounterRng rng(spec.seed, 1, 11);
  std::uint64_t c = 0;
  BoundAudit out;
  for (const auto& [p1, p2] : sweep_points(spec)) {
    const ControlParams cp = control_params(p1, p2);
    const PointData q1 = axis_point(p1.z, std::abs(p1.eta()));
    const PointData q2 = axis_point(p2.z, std::abs(p2.eta()));
    const ControlParams cq = control_params(q1, q2);
    const bool bulk = std::abs(p1.z) <= 0.95 && std::abs(p2.z) <= 0.95;
    const bool small_eta = std::abs(p1.eta()) <= 0.01 && std::abs(p2.eta()) <= 0.01;
    for (const Block& a : as) {
      out.m12 = std::max(out.m12, spectral_norm(m12(p1, a, p2)) * cp.gamma);
      const Block hat = hat_m12(q1, a, q2);
      for (const Block& a2 : as) {
        const double v = std::abs(block_trace(hat * a2)) * cq.hat_gamma / (q1.rho() * q2.rho());
        out.hat_m12 = std::max(out.hat_m12, v);
        if (bulk && small_eta) out.hat_m12_bulk = std::max(out.hat_m12_bulk, v);
        out.m121 = std::max(out.m121, spectral_norm(m121(p1, a, p2, a2)) * cp.eta_star * cp.gamma);
      }
    }
    Block a;
    for (int k = 0; k < 4; ++k) {
      a(k % 2, k / 2) = cd(rng.gaussian(c), rng.gaussian(c + 1));
      c += 2;
    }
    a /= spectral_norm(a);
    const Block centered = a - block_trace(a * block_eplus()) * block_eplus() -
                           block_trace(a * block_eminus()) * block_eminus();
    out.centered = std::max(out.centered, spectral_norm(m12(p1, centered, p2)));
    if (bulk && p1.eta() * p2.eta() < 0.0) {
      const double dz = std::abs(p1.z - p2.z);
      const double v = std::abs(block_trace(m12(p1, block_eplus(), p2) * block_eminus()));
      if (dz > 0.0) out.off_direction = std::max(out.off_direction, v * cp.gamma / dz);
    }
  }
  return out;
}

}  // namespace nhlaw
