#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nhlaw/chains.hpp"
#include "nhlaw/errors.hpp"
#include "nhlaw/stability.hpp"
#include "oracles.hpp"

using namespace nhlaw;

namespace {

cd hs(const Block& a, const Block& b) { return (a.adjoint() * b).trace(); }

Block random_block(std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Block b;
  b << cd(g(gen), g(gen)), cd(g(gen), g(gen)), cd(g(gen), g(gen)), cd(g(gen), g(gen));
  return b;
}

std::pair<PointData, PointData> random_pair(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> r(0.0, 1.3), th(0.0, 2 * kPi), le(-3.0, 0.0);
  auto eta = [&] { return std::pow(10.0, le(gen)) * (gen() % 2 ? 1.0 : -1.0); };
  return {axis_point(std::polar(r(gen), th(gen)), eta()), axis_point(std::polar(r(gen), th(gen)), eta())};
}

Mat block_to_dense(const Block& b, int n) { return embed(b, n); }

}  // namespace

TEST(Stability, EigenvectorsSatisfyTheEigenproblem) {
  std::mt19937_64 gen(41);
  for (int k = 0; k < 500; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const StabilityBundle s = stability_eigs(p1, p2);
    const double scale = 1.0 + std::abs(s.beta_plus) + std::abs(s.beta_minus);
    EXPECT_LT((b_operator(p1, p2, s.r_plus) - s.beta_plus * s.r_plus).norm(), 1e-10 * scale * s.r_plus.norm());
    EXPECT_LT((b_operator(p1, p2, s.r_minus) - s.beta_minus * s.r_minus).norm(),
              1e-10 * scale * s.r_minus.norm());
    const Block lp = s.l_plus.adjoint(), lm = s.l_minus.adjoint();
    EXPECT_LT((b_adjoint(p1, p2, lp) - std::conj(s.beta_plus) * lp).norm(), 1e-10 * scale * lp.norm());
    EXPECT_LT((b_adjoint(p1, p2, lm) - std::conj(s.beta_minus) * lm).norm(), 1e-10 * scale * lm.norm());
    // The off-diagonal direction F lies in the kernel of S, hence B[F] = F.
    EXPECT_LT((b_operator(p1, p2, block_f()) - block_f()).norm(), 1e-15);
  }
}

TEST(Stability, AdjointIsTheHilbertSchmidtAdjoint) {
  std::mt19937_64 gen(42);
  for (int k = 0; k < 200; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const Block x = random_block(gen), y = random_block(gen);
    EXPECT_LT(std::abs(hs(y, b_operator(p1, p2, x)) - hs(b_adjoint(p1, p2, y), x)), 1e-10 * (1 + x.norm() * y.norm()));
  }
}

TEST(Stability, BetaIdentities) {
  std::mt19937_64 gen(43);
  for (int k = 0; k < 500; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const BetaComparison c = beta_comparison(p1, p2);
    EXPECT_LT(c.sum_residual, 1e-12);
    EXPECT_LT(c.bb_residual, 1e-12);
    EXPECT_LT(c.product_residual, 1e-12 * (1 + std::abs(c.product)));
  }
}

TEST(Stability, InverseRoundTrip) {
  std::mt19937_64 gen(44);
  for (int k = 0; k < 300; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const Block y = random_block(gen);
    const Block x = stability_inverse(p1, p2, y);
    EXPECT_LT((b_operator(p1, p2, x) - y).norm(), 1e-9 * (1 + x.norm()));
  }
}

TEST(Stability, DenseOracleAtSmallDimension) {
  std::mt19937_64 gen(45);
  const int n = 3, d = 2 * n;
  std::normal_distribution<double> g;
  for (int k = 0; k < 40; ++k) {
    const auto [p1, p2] = random_pair(gen);
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = cd(g(gen), g(gen));
    const Mat big1 = block_to_dense(p1.m, n), big2 = block_to_dense(p2.m, n);
    const Mat ref = oracle::dense_b_solve(p1.m, p2.m, big1 * a * big2);
    const Mat got = m12(p1, a, p2);
    EXPECT_LT((got - ref).norm(), 1e-8 * (1 + ref.norm()));
    // Operator action on full matrices agrees with the dense form.
    const Mat bx = b_operator(p1, p2, a);
    const Mat dense_bx = a - big1 * oracle::dense_s(a) * big2;
    EXPECT_LT((bx - dense_bx).norm(), 1e-12 * (1 + a.norm()));

    const Block ab = random_block(gen);
    const Mat ref_block = oracle::dense_b_solve(p1.m, p2.m, block_to_dense(p1.m * ab * p2.m, n));
    EXPECT_LT((block_to_dense(m12(p1, ab, p2), n) - ref_block).norm(), 1e-8 * (1 + ref_block.norm()));
  }
}

TEST(Stability, M121AgainstDenseComposition) {
  std::mt19937_64 gen(46);
  const int n = 2;
  for (int k = 0; k < 40; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const Block a1 = random_block(gen), a2 = random_block(gen);
    const Mat m1 = embed(p1.m, n), m2 = embed(p2.m, n);
    const Mat x12 = oracle::dense_b_solve(p1.m, p2.m, m1 * embed(a1, n) * m2);
    const Mat x21 = oracle::dense_b_solve(p2.m, p1.m, m2 * embed(a2, n) * m1);
    const Mat rhs = m1 * embed(a1, n) * x21 + m1 * oracle::dense_s(x12) * x21;
    const Mat ref = oracle::dense_b_solve(p1.m, p1.m, rhs);
    const Mat got = embed(m121(p1, a1, p2, a2), n);
    EXPECT_LT((got - ref).norm(), 1e-7 * (1 + ref.norm()));
  }
}

TEST(Stability, TraceFormulaMatchesM12) {
  std::mt19937_64 gen(47);
  for (int k = 0; k < 300; ++k) {
    const auto [p1, p2] = random_pair(gen);
    for (int a : {1, -1}) {
      const Block ea = a > 0 ? block_eplus() : block_eminus();
      const Block x = m12(p1, ea, p2);
      for (int b : {1, -1}) {
        const Block eb = b > 0 ? block_eplus() : block_eminus();
        const cd ref = 0.5 * (x * eb).trace();
        EXPECT_LT(std::abs(trace_formula(p1, p2, a, b) - ref), 1e-9 * (1 + std::abs(ref)));
      }
    }
  }
}

TEST(Stability, ControlParamsAreConsistent) {
  std::mt19937_64 gen(48);
  for (int k = 0; k < 200; ++k) {
    const auto [p1, p2] = random_pair(gen);
    const ControlParams c = control_params(p1, p2);
    EXPECT_GT(c.gamma, 0.0);
    EXPECT_NEAR(c.gamma, c.hat_gamma / c.denominator, 1e-12 * c.gamma);
    EXPECT_NEAR(c.eta_star, std::min(std::abs(p1.eta()), std::abs(p2.eta())), 1e-15);
  }
}

TEST(Stability, SingularOperatorIsReported) {
  // Coinciding z with eta1 = -eta2 -> 0 makes beta_- vanish.
  const PointData p = axis_point(0.3, 1e-300);
  const PointData q = conjugate_point(p);
  try {
    stability_inverse(p, q, block_eplus());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularStability);
  }
}

TEST(Stability, DeterministicApproximationMatchesLargeMatrices) {
  // Averaged two-resolvent law at moderate n and eta: <G1 A G2 B> ~ <M12^A B>.
  const int n = 300;
  std::mt19937_64 gen(49);
  const Mat x = oracle::random_ginibre(n, gen);
  const cd z1(0.3, 0.0), z2(0.5, 0.2);
  const double eta1 = 0.4, eta2 = -0.3;
  const ResolventFactory f1(x, z1), f2(x, z2);
  const ChainPair pair(f1, f2);
  const PointData p1 = axis_point(z1, eta1), p2 = axis_point(z2, eta2);
  for (const Block& a : {block_eplus(), block_eminus(), block_f()}) {
    for (const Block& b : {block_eplus(), block_eminus(), block_fstar()}) {
      const cd emp = pair.two_chain(eta1, a, eta2, b);
      const cd det = 0.5 * (m12(p1, a, p2) * b).trace();
      EXPECT_LT(std::abs(emp - det), 0.05) << emp << " " << det;
      const cd emp_im = pair.two_chain(eta1, a, eta2, b, Kernel::Im, Kernel::Im);
      const cd det_im = 0.5 * (hat_m12(p1, a, p2) * b).trace();
      EXPECT_LT(std::abs(emp_im - det_im), 0.05) << emp_im << " " << det_im;
    }
  }
}

TEST(Stability, BoundAuditConstants) {
  // Empirical constants of the deterministic bounds over the calibration sweep.
  SweepSpec spec;
  spec.draws = 2000;
  const BoundAudit b = bound_audit(spec);
  EXPECT_LE(b.m12, 16.0);
  EXPECT_LE(b.m121, 16.0);
  EXPECT_LE(b.centered, kComparability);
  EXPECT_LE(b.off_direction, kComparability);
  EXPECT_LE(b.hat_m12_bulk, kComparability);
  EXPECT_LE(b.hat_m12, kComparability);
}
