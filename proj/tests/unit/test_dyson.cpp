#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nhlaw/dyson.hpp"
#include "nhlaw/errors.hpp"
#include "oracles.hpp"

using namespace nhlaw;

namespace {

cd random_z(std::mt19937_64& gen, double rmax) {
  std::uniform_real_distribution<double> r(0.0, rmax), th(0.0, 2 * kPi);
  return std::polar(r(gen), th(gen));
}

}  // namespace

TEST(Dyson, ClosedFormsAtTheOrigin) {
  const DysonSolution s0 = solve_m_axis(0.0, 0.0);
  EXPECT_NEAR(std::abs(s0.m - kI), 0.0, 1e-10);
  const DysonSolution s = solve_m_axis(0.6, 0.0);
  EXPECT_NEAR(std::abs(s.m - cd(0.0, 0.8)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(s.u - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(s.rho, 0.8 / kPi, 1e-12);
  const DysonSolution out = solve_m_axis(1.5, 0.0);
  EXPECT_EQ(out.m, cd(0.0));
  EXPECT_NEAR(out.u.real(), 1.0 / 2.25, 1e-15);
}

TEST(Dyson, ResidualIsTinyOnRandomPoints) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> e(-3.0, 3.0), le(-3.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const cd z = random_z(gen, 2.0);
    const double eta = std::pow(10.0, le(gen)) * (k % 2 ? 1.0 : -1.0);
    const cd w(e(gen), eta);
    const DysonSolution s = solve_m(z, w);
    EXPECT_LT(cubic_residual(z, w, s.m), 1e-12) << z << " " << w;
    EXPECT_GT(s.m.imag() * eta, 0.0);
    EXPECT_NEAR(std::abs(s.u - s.m / (w + s.m)), 0.0, 1e-12);
  }
}

TEST(Dyson, RootsAgreeWithDurandKerner) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> e(-2.0, 2.0), eta(0.01, 2.0);
  for (int k = 0; k < 200; ++k) {
    const cd z = random_z(gen, 1.5);
    const cd w(e(gen), eta(gen));
    auto a = cubic_roots(z, w);
    auto b = oracle::durand_kerner(z, w);
    for (const cd r : a) {
      double best = 1e9;
      for (const cd q : b) best = std::min(best, std::abs(r - q));
      EXPECT_LT(best, 1e-9);
    }
  }
}

TEST(Dyson, PhysicalBranchMatchesFixedPointIteration) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> e(-2.5, 2.5), eta(0.05, 2.0);
  for (int k = 0; k < 200; ++k) {
    const cd z = random_z(gen, 1.6);
    const cd w(e(gen), k % 3 ? eta(gen) : -eta(gen));
    const Block ref = oracle::mde_fixed_point(z, w);
    const Block m = m_matrix(z, w);
    EXPECT_LT((m - ref).norm(), 1e-9) << z << " " << w;
  }
}

TEST(Dyson, AxisPathAgreesWithGeneralSolver) {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> le(-4.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const cd z = random_z(gen, 1.5);
    const double eta = std::pow(10.0, le(gen)) * (k % 2 ? 1.0 : -1.0);
    const DysonSolution a = solve_m_axis(z, eta);
    EXPECT_NEAR(a.m.real(), 0.0, 0.0);
    EXPECT_NEAR(a.m.imag(), oracle::axis_mu_bisect(std::norm(z), std::abs(eta)) * (eta > 0 ? 1 : -1), 1e-12);
    EXPECT_LT(cubic_residual(z, cd(0.0, eta), a.m), 1e-13);
  }
}

TEST(Dyson, ImaginaryAxisNeedsNonzeroImaginaryPart) {
  EXPECT_THROW(solve_m(0.5, cd(0.3, 0.0)), Error);
  try {
    solve_m(0.5, cd(0.3, 0.0));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoValidRoot);
  }
}

TEST(Dyson, MatrixEquationAndSideCondition) {
  for (const cd z : {cd(0.3, 0.2), cd(1.2, 0.0), cd(0.0, 0.9)}) {
    for (const cd w : {cd(0.1, 0.2), cd(-1.0, 0.05), cd(0.0, -0.3)}) {
      const Block m = m_matrix(z, w);
      const MdeCheck ok = verify_mde(m, z, w);
      EXPECT_LT(ok.residual, 1e-12);
      EXPECT_TRUE(ok.side_condition);
      Block flipped = m;
      flipped(0, 0) = -m(0, 0);
      flipped(1, 1) = -m(1, 1);
      EXPECT_FALSE(verify_mde(flipped, z, w).side_condition);
    }
  }
}

TEST(Dyson, SemicircleAtZero) {
  for (double e : {0.0, 0.3, 1.0, 1.7, 1.99}) {
    EXPECT_NEAR(density(0.0, e), std::sqrt(4.0 - e * e) / (2 * kPi), 1e-12);
  }
  EXPECT_EQ(density(0.0, 2.5), 0.0);
}

TEST(Dyson, BoundaryValueMatchesRealAxisDensity) {
  for (const cd z : {cd(0.4), cd(0.9, 0.2), cd(1.3)}) {
    for (double e : {0.3, 0.8, 1.5}) {
      const DysonSolution b = solve_m_boundary(z, e);
      EXPECT_NEAR(b.rho, density(z, e), 1e-7) << z << " " << e;
    }
  }
}

TEST(Dyson, SupportEdgesMatchTheQuarticOracle) {
  const std::pair<double, double> known[] = {
      {1.1, 0.06515211839392462}, {1.2, 0.1753149383994139}, {1.4, 0.4544991272569445}};
  for (const auto& [r, gap] : known) {
    const SupportInfo s = support_gap(r);
    EXPECT_NEAR(s.gap_delta, gap, 1e-9);
    EXPECT_NEAR(0.5 * s.gap_delta, oracle::edge_half_gap(r * r), 1e-9);
  }
  for (double r : {0.0, 0.5, 0.9, 1.0, 1.3, 2.0}) {
    EXPECT_NEAR(support_gap(r).right_edge, oracle::edge_right(r * r), 1e-9) << r;
    if (r <= 1.0) EXPECT_EQ(support_gap(r).gap_delta, 0.0);
  }
}

TEST(Dyson, DensityIsRotationInvariantInZ) {
  EXPECT_NEAR(density(cd(0.6, 0.0), 0.7), density(std::polar(0.6, 1.1), 0.7), 1e-14);
  EXPECT_NEAR(density(0.5, 0.4), density(0.5, -0.4), 1e-15);
}

TEST(Dyson, QuantilesAtZeroMatchTheSemicircle) {
  const int n = 200;
  const std::vector<int> idx{1, 2, 10, 100, 199, -3};
  const std::vector<double> g = quantiles(0.0, n, idx);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    EXPECT_NEAR(oracle::semicircle_mass(std::abs(g[k])), std::abs(idx[k]) / (2.0 * n), 1e-10);
    EXPECT_EQ(g[k] < 0, idx[k] < 0);
  }
  EXPECT_NEAR(fluctuation_scale(0.0, n), g[0], 0.0);
}

TEST(Dyson, HalfLineMassIsOneHalf) {
  for (const cd z : {cd(0.0), cd(0.7), cd(1.0), cd(1.3)}) {
    EXPECT_NEAR(integrated_density(z, 0.0, 10.0), 0.5, 1e-9) << z;
  }
}

TEST(Dyson, QuantileIndexChecks) {
  EXPECT_THROW(quantiles(0.3, 10, {0}), Error);
  EXPECT_THROW(quantiles(0.3, 10, {11}), Error);
  EXPECT_THROW(quantiles(0.3, 1, {1}), Error);
}

TEST(Dyson, QuantilesAreMonotone) {
  for (const cd z : {cd(0.2), cd(1.0), cd(1.2)}) {
    const std::vector<double> g = quantiles(z, 64, {1, 2, 3, 10, 40, 64});
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_GE(g.front(), 0.5 * support_gap(z).gap_delta - 1e-12);
  }
}
