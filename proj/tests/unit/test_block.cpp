#include <random>

#include <gtest/gtest.h>

#include "nhlaw/block.hpp"
#include "nhlaw/errors.hpp"
#include "oracles.hpp"

using namespace nhlaw;

namespace {

Mat random_mat(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cd(g(gen), g(gen));
  return a;
}

}  // namespace

TEST(Block, NamedBlocks) {
  EXPECT_EQ(block_e1() + block_e2(), Block(Block::Identity()));
  EXPECT_EQ(block_eplus(), Block(block_e1() + block_e2()));
  EXPECT_EQ(block_eminus(), Block(block_e1() - block_e2()));
  EXPECT_EQ(block_fstar(), Block(block_f().adjoint()));
  EXPECT_EQ(block_trace(block_eminus()), cd(0.0));
  EXPECT_EQ(block_trace(block_f()), cd(0.0));
}

TEST(Block, EmbedMatchesKroneckerProduct) {
  Block b;
  b << cd(1, 2), cd(3, -1), cd(0, 1), cd(-2, 0);
  const Mat e = embed(b, 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(e(3 * r + i, 3 * c + j), i == j ? b(r, c) : cd(0.0));
  EXPECT_NEAR(std::abs(normalized_trace(e) - block_trace(b)), 0.0, 1e-15);
}

TEST(Block, LeftAndRightMultiplicationAgreeWithEmbedding) {
  std::mt19937_64 gen(3);
  const Mat a = random_mat(8, gen);
  Block b;
  b << cd(0.3, 1), cd(-1, 0.5), cd(2, 0), cd(0, -0.7);
  EXPECT_LT((block_left(b, a) - embed(b, 4) * a).norm(), 1e-13);
  EXPECT_LT((block_right(a, b) - a * embed(b, 4)).norm(), 1e-13);
}

TEST(Block, CovarianceMatchesEntrywiseOracle) {
  std::mt19937_64 gen(5);
  for (int n : {1, 2, 5}) {
    const Mat a = random_mat(2 * n, gen);
    const Mat dense = oracle::dense_s(a);
    EXPECT_LT((embed(covariance(a), n) - dense).norm(), 1e-13);
  }
  Block b;
  b << cd(1, 1), cd(2, 0), cd(3, 0), cd(4, -1);
  EXPECT_LT((embed(covariance(b), 3) - oracle::dense_s(embed(b, 3))).norm(), 1e-14);
}

TEST(Block, CovarianceKillsOffDiagonalBlocks) {
  EXPECT_EQ(covariance(block_f()), Block(Block::Zero()));
  EXPECT_EQ(covariance(block_fstar()), Block(Block::Zero()));
  EXPECT_EQ(covariance(block_e1()), block_e2());
}

TEST(Errors, MessageCarriesCodeName) {
  const Error e(ErrorCode::ZeroEta, "eta");
  EXPECT_EQ(e.code(), ErrorCode::ZeroEta);
  EXPECT_NE(std::string(e.what()).find("ZeroEta"), std::string::npos);
}
