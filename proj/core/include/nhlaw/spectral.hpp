#pragma once

// Eigen-systems of X, singular systems of X - z and the overlap statistics
// built from them. Indices are 0-based throughout.

#include "nhlaw/block.hpp"

namespace nhlaw {

inline constexpr double kMaxVectorCondition = 1e12;

struct EigenSystem {
  Vec sigma;           // sorted by (real, imag)
  Mat right;           // unit-norm columns r_i
  Mat left;            // columns l_i with l_j^T r_i = delta_ij
  double vec_condition = 0.0;
  bool discarded = false;
};

struct OverlapReport {
  int i = 0, j = 0;
  cd o_ij;
  double cos2_r = 0.0, cos2_l = 0.0;
  double decay_statistic = 0.0;
};

struct SingularSystem {
  Eigen::VectorXd lambda;  // ascending
  Mat u, v;                // columns with squared norm 1/2
  cd z;
};

EigenSystem eigensystem(const Mat& x);

/// max_{i,j} |l_j^T r_i - delta_ij|.
double biorthogonality_residual(const EigenSystem& e);

OverlapReport overlap(const EigenSystem& e, int i, int j);

/// sup over pairs of (n|s_i - s_j|^2 + 1)(cos2_r + cos2_l); the diagonal
/// contributes exactly 2.
double overlap_decay_statistic(const EigenSystem& e);

/// sup over pairs of (n|s_i - s_j|^2 + 1)|O_ij| / sqrt(O_ii O_jj).
double overlap_cs_statistic(const EigenSystem& e);

SingularSystem singular_system(const Mat& x, cd z);

/// |<u_i, u_j'>|^2 + |<v_i, v_j'>|^2 with both systems rescaled to unit vectors.
double singular_overlap(const SingularSystem& s1, const SingularSystem& s2, int i, int j);

}  // namespace nhlaw
