#pragma once

// Resolvents G^z(i eta) = (H^z - i eta)^{-1} and chains of up to three of
// them, evaluated in the chiral eigenbasis of H^z. One decomposition per
// (X, z) serves every eta and every deterministic matrix.

#include <cstdint>

#include "nhlaw/block.hpp"

namespace nhlaw {

/// Diagonal kernel applied to each eigenvalue lambda of H^z:
/// Plain 1/(lambda - i eta), Im eta/(lambda^2 + eta^2), Abs 1/|lambda - i eta|.
enum class Kernel { Plain, Im, Abs };

std::uint64_t matrix_fingerprint(const Mat& x);

class ResolventFactory {
 public:
  ResolventFactory(const Mat& x, cd z);

  int n() const { return n_; }
  cd z() const { return z_; }
  std::uint64_t source() const { return source_; }
  /// Singular values of X - z, ascending; eigenvalues of H^z are +-lambda.
  const Eigen::VectorXd& lambda() const { return lambda_; }
  /// Unit-norm singular vectors.
  const Mat& u() const { return u_; }
  const Mat& v() const { return v_; }
  /// Orthonormal eigenvectors (1/sqrt 2)[[U, U], [V, -V]] of H^z.
  const Mat& w() const { return w_; }
  /// u_k^* v_k for each singular pair.
  const Vec& uv() const { return uv_; }
  /// Eigenvalues matching the columns of w(): (lambda, -lambda).
  Eigen::VectorXd eigenvalues() const;

  /// Kernel values on the 2n eigenvalues; throws ZeroEta for eta = 0.
  Vec kernel(double eta, Kernel k = Kernel::Plain) const;
  /// Dense 2n x 2n f(H) for the chosen kernel.
  Mat resolvent(double eta, Kernel k = Kernel::Plain) const;

  /// ||H - W Lambda W^*|| / ||H||, Frobenius.
  double reconstruction_error(const Mat& x) const;

 private:
  int n_;
  cd z_;
  std::uint64_t source_;
  Eigen::VectorXd lambda_;
  Mat u_, v_, w_;
  Vec uv_;
};

cd resolvent_trace(const ResolventFactory& f, double eta, const Block& a, Kernel k = Kernel::Plain);
cd resolvent_trace(const ResolventFactory& f, double eta, const Mat& a, Kernel k = Kernel::Plain);

/// <x, f(H) y> with the conjugate-linear first slot.
cd isotropic(const ResolventFactory& f, double eta, const Vec& x, const Vec& y,
             Kernel k = Kernel::Plain);

/// Cross Gram matrices W_1^* A W_2 for two factories built from the same X.
class ChainPair {
 public:
  ChainPair(const ResolventFactory& f1, const ResolventFactory& f2);

  const ResolventFactory& first() const { return f1_; }
  const ResolventFactory& second() const { return f2_; }

  Mat gram(const Block& a) const;
  Mat gram(const Mat& a) const;

  /// <f1(H1) A1 f2(H2) A2>.
  cd two_chain(double eta1, const Block& a1, double eta2, const Block& a2,
               Kernel k1 = Kernel::Plain, Kernel k2 = Kernel::Plain) const;
  cd two_chain(double eta1, const Mat& a1, double eta2, const Mat& a2,
               Kernel k1 = Kernel::Plain, Kernel k2 = Kernel::Plain) const;
  /// Same contraction with precomputed grams g1 = gram(A1), g2 = gram(A2^*).
  cd contract(const Mat& g1, const Mat& g2_adj, double eta1, double eta2, Kernel k1, Kernel k2) const;

  /// (G1 A1 G2 A2 G1)_{xy}.
  cd three_chain(double eta1, const Block& a1, double eta2, const Block& a2, const Vec& x,
                 const Vec& y) const;
  cd three_chain(double eta1, const Mat& a1, double eta2, const Mat& a2, const Vec& x,
                 const Vec& y) const;

 private:
  cd three_from_grams(const Mat& c, const Mat& d_adj, double eta1, double eta2, const Vec& x,
                      const Vec& y) const;

  const ResolventFactory& f1_;
  const ResolventFactory& f2_;
  Mat uu_, uv_, vu_, vv_;
};

cd two_chain_avg(const ResolventFactory& f1, double eta1, const Mat& a1, const ResolventFactory& f2,
                 double eta2, const Mat& a2, Kernel k1 = Kernel::Plain, Kernel k2 = Kernel::Plain);

cd three_chain_iso(const ResolventFactory& f1, double eta1, const Mat& a1,
                   const ResolventFactory& f2, double eta2, const Mat& a2, const Vec& x,
                   const Vec& y);

struct ReductionResult {
  double lhs1 = 0.0, rhs1 = 0.0;
  double lhs2 = 0.0, rhs2 = 0.0;
  bool first = false, second = false;
};

inline constexpr double kReductionSlack = 8.0;

/// Both reduction inequalities with N = 2n and y = x:
///   |(Q1 G1 Q2 G2 Q3)_xx| <= c sqrt(N) (Q1|G1|Q1^*)_xx^{1/2} (Q3|G2|Q3^*)_xx^{1/2} <|G1|Q2|G2|Q2^*>^{1/2}
///   <|G1|R1 G2 R2|G1|R2^* G2^* R1^*> <= c N <|G1|R1|G2|R1^*> <|G1|R2^*|G2|R2>
ReductionResult reduction_check(const ResolventFactory& f1, double eta1, const ResolventFactory& f2,
                                double eta2, const Mat& q1, const Mat& q2, const Mat& q3,
                                const Mat& r1, const Mat& r2, const Vec& x,
                                double slack = kReductionSlack);

}  // namespace nhlaw
