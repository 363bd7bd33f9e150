#include "nhlaw/block.hpp"

#include "nhlaw/errors.hpp"

namespace nhlaw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoValidRoot: return "NoValidRoot";
    case ErrorCode::DivergedContinuation: return "DivergedContinuation";
    case ErrorCode::SingularM: return "SingularM";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SvdFailure: return "SvdFailure";
    case ErrorCode::ZeroEta: return "ZeroEta";
    case ErrorCode::MismatchedSource: return "MismatchedSource";
    case ErrorCode::DegenerateEigenvectors: return "DegenerateEigenvectors";
    case ErrorCode::SingularStability: return "SingularStability";
    case ErrorCode::CrossedZero: return "CrossedZero";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::ShootingFailure: return "ShootingFailure";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Block block_e1() {
  Block b = Block::Zero();
  b(0, 0) = 1.0;
  return b;
}

Block block_e2() {
  Block b = Block::Zero();
  b(1, 1) = 1.0;
  return b;
}

Block block_eplus() { return Block::Identity(); }

Block block_eminus() {
  Block b = Block::Identity();
  b(1, 1) = -1.0;
  return b;
}

Block block_f() {
  Block b = Block::Zero();
  b(0, 1) = 1.0;
  return b;
}

Block block_fstar() {
  Block b = Block::Zero();
  b(1, 0) = 1.0;
  return b;
}

cd block_trace(const Block& b) { return 0.5 * (b(0, 0) + b(1, 1)); }

Mat embed(const Block& b, int n) {
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (b(i, j) != 0.0) out.block(i * n, j * n, n, n).diagonal().setConstant(b(i, j));
  return out;
}

Mat block_left(const Block& b, const Mat& a) {
  const Eigen::Index n = a.rows() / 2;
  Mat out(a.rows(), a.cols());
  out.topRows(n) = b(0, 0) * a.topRows(n) + b(0, 1) * a.bottomRows(n);
  out.bottomRows(n) = b(1, 0) * a.topRows(n) + b(1, 1) * a.bottomRows(n);
  return out;
}

Mat block_right(const Mat& a, const Block& b) {
  const Eigen::Index n = a.cols() / 2;
  Mat out(a.rows(), a.cols());
  out.leftCols(n) = a.leftCols(n) * b(0, 0) + a.rightCols(n) * b(1, 0);
  out.rightCols(n) = a.leftCols(n) * b(0, 1) + a.rightCols(n) * b(1, 1);
  return out;
}

cd normalized_trace(const Mat& a) { return a.trace() / static_cast<double>(a.rows()); }

std::pair<cd, cd> diagonal_block_traces(const Mat& a) {
  const Eigen::Index n = a.rows() / 2;
  const double inv = 1.0 / static_cast<double>(n);
  return {a.topLeftCorner(n, n).trace() * inv, a.bottomRightCorner(n, n).trace() * inv};
}

Block covariance(const Block& a) {
  Block s = Block::Zero();
  s(0, 0) = a(1, 1);
  s(1, 1) = a(0, 0);
  return s;
}

Block covariance(const Mat& a) {
  const auto [t1, t2] = diagonal_block_traces(a);
  Block s = Block::Zero();
  s(0, 0) = t2;
  s(1, 1) = t1;
  return s;
}

}  // namespace nhlaw
