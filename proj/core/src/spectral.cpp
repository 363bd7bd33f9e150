#include "nhlaw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <lapacke.h>

#include "nhlaw/errors.hpp"

namespace nhlaw {
namespace {

void check_index(Eigen::Index size, int i) {
  if (i < 0 || i >= size) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i));
}

// Normalized Gram data shared by both sup statistics.
struct PairData {
  Mat gram_r, gram_l;
  Eigen::VectorXd nr, nl;
};

PairData pair_data(const EigenSystem& e) {
  PairData p{e.right.adjoint() * e.right, e.left.adjoint() * e.left, {}, {}};
  p.nr = p.gram_r.diagonal().real();
  p.nl = p.gram_l.diagonal().real();
  return p;
}

}  // namespace

EigenSystem eigensystem(const Mat& x) {
  const Eigen::Index n = x.rows();
  Mat a = x;
  Vec ev(n);
  Mat vr(n, n);
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', ln, reinterpret_cast<lapack_complex_double*>(a.data()), ln,
      reinterpret_cast<lapack_complex_double*>(ev.data()), nullptr, 1,
      reinterpret_cast<lapack_complex_double*>(vr.data()), ln);
  if (info != 0) throw Error(ErrorCode::EigenSolverFailure, "zgeev info " + std::to_string(info));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });

  EigenSystem out;
  out.sigma.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.sigma(k) = ev(order[k]);
    out.right.col(k) = vr.col(order[k]).normalized();
  }
  const Eigen::VectorXd sv = Eigen::BDCSVD<Mat>(out.right).singularValues();
  out.vec_condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  out.discarded = !(out.vec_condition <= kMaxVectorCondition);
  out.left = out.right.partialPivLu().inverse().transpose();
  return out;
}

double biorthogonality_residual(const EigenSystem& e) {
  const Mat p = e.left.transpose() * e.right;
  return (p - Mat::Identity(p.rows(), p.cols())).cwiseAbs().maxCoeff();
}

OverlapReport overlap(const EigenSystem& e, int i, int j) {
  const Eigen::Index n = e.sigma.size();
  check_index(n, i);
  check_index(n, j);
  const auto& ri = e.right.col(i);
  const auto& rj = e.right.col(j);
  const auto& li = e.left.col(i);
  const auto& lj = e.left.col(j);
  const cd rr = ri.dot(rj);  // dot conjugates the first argument
  const cd ll = li.dot(lj);
  OverlapReport o;
  o.i = i;
  o.j = j;
  o.o_ij = ll * rr;
  o.cos2_r = std::norm(rr) / (ri.squaredNorm() * rj.squaredNorm());
  o.cos2_l = std::norm(ll) / (li.squaredNorm() * lj.squaredNorm());
  const double gap = std::norm(e.sigma(i) - e.sigma(j));
  o.decay_statistic = (static_cast<double>(n) * gap + 1.0) * (o.cos2_r + o.cos2_l);
  return o;
}

double overlap_decay_statistic(const EigenSystem& e) {
  const PairData p = pair_data(e);
  const Eigen::Index n = e.sigma.size();
  double best = 2.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double c = std::norm(p.gram_r(i, j)) / (p.nr(i) * p.nr(j)) +
                       std::norm(p.gram_l(i, j)) / (p.nl(i) * p.nl(j));
      const double w = static_cast<double>(n) * std::norm(e.sigma(i) - e.sigma(j)) + 1.0;
      best = std::max(best, w * c);
    }
  }
  return best;
}

double overlap_cs_statistic(const EigenSystem& e) {
  const PairData p = pair_data(e);
  const Eigen::Index n = e.sigma.size();
  double best = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double o = std::abs(p.gram_l(i, j) * p.gram_r(i, j));
      const double diag = p.nl(i) * p.nr(i) * p.nl(j) * p.nr(j);
      const double w = static_cast<double>(n) * std::norm(e.sigma(i) - e.sigma(j)) + 1.0;
      best = std::max(best, w * o / std::sqrt(diag));
    }
  }
  return best;
}

SingularSystem singular_system(const Mat& x, cd z) {
  Mat shifted = x;
  shifted.diagonal().array() -= z;
  Eigen::BDCSVD<Mat> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error(ErrorCode::SvdFailure, "SVD did not converge");
  SingularSystem s;
  s.z = z;
  s.lambda = svd.singularValues().reverse();
  s.u = svd.matrixU().rowwise().reverse() / std::sqrt(2.0);
  s.v = svd.matrixV().rowwise().reverse() / std::sqrt(2.0);
  return s;
}

double singular_overlap(const SingularSystem& s1, const SingularSystem& s2, int i, int j) {
  check_index(s1.lambda.size(), i);
  check_index(s2.lambda.size(), j);
  // Half-normalized columns: the unit-rescaled inner product is twice the raw one.
  const cd uu = 2.0 * s1.u.col(i).dot(s2.u.col(j));
  const cd vv = 2.0 * s1.v.col(i).dot(s2.v.col(j));
  return std::norm(uu) + std::norm(vv);
}

}  // namespace nhlaw
