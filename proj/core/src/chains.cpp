#include "nhlaw/chains.hpp"

#include <bit>
#include <cmath>

#include "nhlaw/errors.hpp"

namespace nhlaw {
namespace {

void require_eta(double eta) {
  if (eta == 0.0) throw Error(ErrorCode::ZeroEta, "eta must be nonzero");
}

cd kernel_value(double lambda, double eta, Kernel k) {
  switch (k) {
    case Kernel::Plain: return 1.0 / cd(lambda, -eta);
    case Kernel::Im: return eta / (lambda * lambda + eta * eta);
    case Kernel::Abs: return 1.0 / std::hypot(lambda, eta);
  }
  return 0.0;
}

}  // namespace

std::uint64_t matrix_fingerprint(const Mat& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double d) {
    auto v = std::bit_cast<std::uint64_t>(d);
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<double>(x.rows()));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      feed(x(i, j).real());
      feed(x(i, j).imag());
    }
  return h;
}

ResolventFactory::ResolventFactory(const Mat& x, cd z)
    : n_(static_cast<int>(x.rows())), z_(z), source_(matrix_fingerprint(x)) {
  Mat shifted = x;
  shifted.diagonal().array() -= z;
  Eigen::BDCSVD<Mat> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error(ErrorCode::SvdFailure, "SVD did not converge");
  lambda_ = svd.singularValues().reverse();
  u_ = svd.matrixU().rowwise().reverse();
  v_ = svd.matrixV().rowwise().reverse();
  const double r = 1.0 / std::sqrt(2.0);
  w_.resize(2 * n_, 2 * n_);
  w_.topLeftCorner(n_, n_) = r * u_;
  w_.topRightCorner(n_, n_) = r * u_;
  w_.bottomLeftCorner(n_, n_) = r * v_;
  w_.bottomRightCorner(n_, n_) = -r * v_;
  uv_.resize(n_);
  for (int k = 0; k < n_; ++k) uv_(k) = u_.col(k).dot(v_.col(k));
}

Eigen::VectorXd ResolventFactory::eigenvalues() const {
  Eigen::VectorXd ev(2 * n_);
  ev.head(n_) = lambda_;
  ev.tail(n_) = -lambda_;
  return ev;
}

Vec ResolventFactory::kernel(double eta, Kernel k) const {
  require_eta(eta);
  Vec g(2 * n_);
  for (int i = 0; i < n_; ++i) {
    g(i) = kernel_value(lambda_(i), eta, k);
    g(i + n_) = kernel_value(-lambda_(i), eta, k);
  }
  return g;
}

Mat ResolventFactory::resolvent(double eta, Kernel k) const {
  return w_ * kernel(eta, k).asDiagonal() * w_.adjoint();
}

double ResolventFactory::reconstruction_error(const Mat& x) const {
  Mat shifted = x;
  shifted.diagonal().array() -= z_;
  Mat h = Mat::Zero(2 * n_, 2 * n_);
  h.topRightCorner(n_, n_) = shifted;
  h.bottomLeftCorner(n_, n_) = shifted.adjoint();
  const Mat rec = w_ * eigenvalues().cast<cd>().asDiagonal() * w_.adjoint();
  const double scale = h.norm();
  return (h - rec).norm() / (scale > 0.0 ? scale : 1.0);
}

cd resolvent_trace(const ResolventFactory& f, double eta, const Block& a, Kernel k) {
  const Vec g = f.kernel(eta, k);
  const int n = f.n();
  cd sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const cd c = f.uv()(i);
    const cd cross = a(0, 1) * c + a(1, 0) * std::conj(c);
    const cd diag = a(0, 0) + a(1, 1);
    sum += g(i) * (diag + cross) + g(i + n) * (diag - cross);
  }
  return 0.5 * sum / (2.0 * n);
}

cd resolvent_trace(const ResolventFactory& f, double eta, const Mat& a, Kernel k) {
  const Vec g = f.kernel(eta, k);
  const Mat aw = a * f.w();
  const Vec diag = (f.w().conjugate().cwiseProduct(aw)).colwise().sum().transpose();
  return g.cwiseProduct(diag).sum() / static_cast<double>(2 * f.n());
}

cd isotropic(const ResolventFactory& f, double eta, const Vec& x, const Vec& y, Kernel k) {
  const Vec g = f.kernel(eta, k);
  const Vec wx = f.w().adjoint() * x;
  const Vec wy = f.w().adjoint() * y;
  return wx.dot(g.cwiseProduct(wy));
}

ChainPair::ChainPair(const ResolventFactory& f1, const ResolventFactory& f2) : f1_(f1), f2_(f2) {
  if (f1.n() != f2.n() || f1.source() != f2.source())
    throw Error(ErrorCode::MismatchedSource, "factories were built from different matrices");
  uu_ = f1.u().adjoint() * f2.u();
  uv_ = f1.u().adjoint() * f2.v();
  vu_ = f1.v().adjoint() * f2.u();
  vv_ = f1.v().adjoint() * f2.v();
}

Mat ChainPair::gram(const Block& a) const {
  const int n = f1_.n();
  Mat g(2 * n, 2 * n);
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      const double ss = s == 0 ? 1.0 : -1.0;
      const double tt = t == 0 ? 1.0 : -1.0;
      g.block(s * n, t * n, n, n) =
          0.5 * (a(0, 0) * uu_ + (tt * a(0, 1)) * uv_ + (ss * a(1, 0)) * vu_ + (ss * tt * a(1, 1)) * vv_);
    }
  }
  return g;
}

Mat ChainPair::gram(const Mat& a) const { return f1_.w().adjoint() * a * f2_.w(); }

cd ChainPair::contract(const Mat& g1, const Mat& g2_adj, double eta1, double eta2, Kernel k1,
                       Kernel k2) const {
  const Vec h1 = f1_.kernel(eta1, k1);
  const Vec h2 = f2_.kernel(eta2, k2);
  // <G1 A1 G2 A2> = (2n)^{-1} sum_jk h1_j C_jk h2_k D_kj, D = W2^* A2 W1 = (W1^* A2^* W2)^*.
  const Mat prod = g1.cwiseProduct(g2_adj.conjugate());
  const Vec ph2 = prod * h2;
  return h1.cwiseProduct(ph2).sum() / static_cast<double>(2 * f1_.n());
}

cd ChainPair::two_chain(double eta1, const Block& a1, double eta2, const Block& a2, Kernel k1,
                        Kernel k2) const {
  return contract(gram(a1), gram(Block(a2.adjoint())), eta1, eta2, k1, k2);
}

cd ChainPair::two_chain(double eta1, const Mat& a1, double eta2, const Mat& a2, Kernel k1,
                        Kernel k2) const {
  return contract(gram(a1), gram(Mat(a2.adjoint())), eta1, eta2, k1, k2);
}

cd ChainPair::three_from_grams(const Mat& c, const Mat& d_adj, double eta1, double eta2,
                               const Vec& x, const Vec& y) const {
  const Vec g1 = f1_.kernel(eta1);
  const Vec g2 = f2_.kernel(eta2);
  Vec v = g1.cwiseProduct(f1_.w().adjoint() * y);
  v = d_adj.adjoint() * v;
  v = g2.cwiseProduct(v);
  v = c * v;
  v = g1.cwiseProduct(v);
  const Vec wx = f1_.w().adjoint() * x;
  return wx.dot(v);
}

cd ChainPair::three_chain(double eta1, const Block& a1, double eta2, const Block& a2, const Vec& x,
                          const Vec& y) const {
  return three_from_grams(gram(a1), gram(Block(a2.adjoint())), eta1, eta2, x, y);
}

cd ChainPair::three_chain(double eta1, const Mat& a1, double eta2, const Mat& a2, const Vec& x,
                          const Vec& y) const {
  return three_from_grams(gram(a1), gram(Mat(a2.adjoint())), eta1, eta2, x, y);
}

cd two_chain_avg(const ResolventFactory& f1, double eta1, const Mat& a1, const ResolventFactory& f2,
                 double eta2, const Mat& a2, Kernel k1, Kernel k2) {
  return ChainPair(f1, f2).two_chain(eta1, a1, eta2, a2, k1, k2);
}

cd three_chain_iso(const ResolventFactory& f1, double eta1, const Mat& a1,
                   const ResolventFactory& f2, double eta2, const Mat& a2, const Vec& x,
                   const Vec& y) {
  return ChainPair(f1, f2).three_chain(eta1, a1, eta2, a2, x, y);
}

ReductionResult reduction_check(const ResolventFactory& f1, double eta1, const ResolventFactory& f2,
                                double eta2, const Mat& q1, const Mat& q2, const Mat& q3,
                                const Mat& r1, const Mat& r2, const Vec& x, double slack) {
  if (f1.source() != f2.source())
    throw Error(ErrorCode::MismatchedSource, "factories were built from different matrices");
  const Mat g1 = f1.resolvent(eta1);
  const Mat g2 = f2.resolvent(eta2);
  const Mat a1 = f1.resolvent(eta1, Kernel::Abs);
  const Mat a2 = f2.resolvent(eta2, Kernel::Abs);
  const double big_n = 2.0 * f1.n();

  ReductionResult r;
  r.lhs1 = std::abs(x.dot(q1 * g1 * q2 * g2 * q3 * x));
  const double t1 = std::real(x.dot(q1 * a1 * q1.adjoint() * x));
  const double t3 = std::real(x.dot(q3 * a2 * q3.adjoint() * x));
  const double t2 = std::real(normalized_trace(a1 * q2 * a2 * q2.adjoint()));
  r.rhs1 = std::sqrt(big_n) * std::sqrt(std::max(t1, 0.0)) * std::sqrt(std::max(t3, 0.0)) *
           std::sqrt(std::max(t2, 0.0));
  r.first = r.lhs1 <= slack * r.rhs1;

  const Mat left = a1 * r1 * g2 * r2;
  r.lhs2 = std::real(normalized_trace(left * a1 * r2.adjoint() * g2.adjoint() * r1.adjoint()));
  const double s1 = std::real(normalized_trace(a1 * r1 * a2 * r1.adjoint()));
  const double s2 = std::real(normalized_trace(a1 * r2.adjoint() * a2 * r2));
  r.rhs2 = big_n * s1 * s2;
  r.second = r.lhs2 <= slack * r.rhs2;
  return r;
}

}  // namespace nhlaw
