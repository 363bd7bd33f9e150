#pragma once

// 2x2 block-constant matrices. A Block b stands for b ⊗ I_n acting on C^{2n};
// all normalized traces are ⟨A⟩ = (2n)^{-1} Tr A.

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace nhlaw {

using cd = std::complex<double>;
using Block = Eigen::Matrix2cd;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

Block block_e1();
Block block_e2();
Block block_eplus();
Block block_eminus();
Block block_f();
Block block_fstar();

/// ⟨b ⊗ I⟩ = (b00 + b11) / 2.
cd block_trace(const Block& b);

/// b ⊗ I_n as a dense 2n x 2n matrix.
Mat embed(const Block& b, int n);

/// (b ⊗ I) A and A (b ⊗ I) without forming the embedding.
Mat block_left(const Block& b, const Mat& a);
Mat block_right(const Mat& a, const Block& b);

/// Normalized trace (1/dim) Tr A.
cd normalized_trace(const Mat& a);

/// Normalized traces of the two diagonal n x n blocks: (1/n) Tr A11, (1/n) Tr A22.
std::pair<cd, cd> diagonal_block_traces(const Mat& a);

/// S[A] = 2⟨A E1⟩E2 + 2⟨A E2⟩E1, always diagonal block-constant.
Block covariance(const Block& a);
Block covariance(const Mat& a);

}  // namespace nhlaw
