#pragma once

// Two-body stability operator B12[X] = X - M1 S[X] M2, its two nontrivial
// eigenvalues and the deterministic approximations of resolvent chains.
// Block-constant quantities are handled in exact 2x2 form; the Mat overloads
// accept full 2n x 2n matrices and reduce them through their block traces.

#include <vector>

#include "nhlaw/block.hpp"
#include "nhlaw/dyson.hpp"

namespace nhlaw {

inline constexpr double kSingularStability = 1e-14;
inline constexpr double kComparability = 64.0;

/// (z, w) together with its Dyson solution and M^z(w).
struct PointData {
  cd z;
  cd w;
  DysonSolution sol;
  Block m;

  double eta() const { return w.imag(); }
  double rho() const { return sol.rho; }
};

/// Point on the imaginary axis w = i eta.
PointData axis_point(cd z, double eta);
/// Point at general w (Im w != 0).
PointData make_point(cd z, cd w);
/// Same z at conj(w); M(conj w) = M(w)^*.
PointData conjugate_point(const PointData& p);

Block s_operator(const Block& a);
Block s_operator(const Mat& a);

Block b_operator(const PointData& p1, const PointData& p2, const Block& x);
Mat b_operator(const PointData& p1, const PointData& p2, const Mat& x);
/// Adjoint B12^*[Y] = Y - S[M1^* Y M2^*].
Block b_adjoint(const PointData& p1, const PointData& p2, const Block& y);

struct StabilityBundle {
  cd beta_plus, beta_minus;
  cd s, sqrt_s;
  Block r_plus, r_minus;  // B12[R] = beta R
  Block l_plus, l_minus;  // B12^*[L^*] = conj(beta) L^*
  bool fallback = false;  // closed-form eigenvectors degenerate; numerical 4x4 solve used
};

StabilityBundle stability_eigs(const PointData& p1, const PointData& p2);

/// B12^{-1}[Y] through the two block traces of X; throws SingularStability.
Block stability_inverse(const PointData& p1, const PointData& p2, const Block& y);
Mat stability_inverse(const PointData& p1, const PointData& p2, const Mat& y);

/// M12^A = B12^{-1}[M1 A M2].
Block m12(const PointData& p1, const Block& a, const PointData& p2);
Mat m12(const PointData& p1, const Mat& a, const PointData& p2);

/// -(1/4) sum over sign flips of M12^A, i.e. the approximation of Im G1 A Im G2.
Block hat_m12(const PointData& p1, const Block& a, const PointData& p2);
Mat hat_m12(const PointData& p1, const Mat& a, const PointData& p2);

/// M121 = B11^{-1}[M1 A1 M21^{A2} + M1 S[M12^{A1}] M21^{A2}].
Block m121(const PointData& p1, const Block& a1, const PointData& p2, const Block& a2);
Mat m121(const PointData& p1, const Mat& a1, const PointData& p2, const Mat& a2);

struct ControlParams {
  double gamma = 0.0;
  double hat_gamma = 0.0;
  double denominator = 0.0;  // gamma = hat_gamma / denominator
  double ell = 0.0;
  double eta_star = 0.0;
  double rho_star = 0.0;
};

ControlParams control_params(const PointData& p1, const PointData& p2);

/// <B12^{-1}[M1 E_a M2] E_b> for a, b in {+1 (E+), -1 (E-)} in closed form.
cd trace_formula(const PointData& p1, const PointData& p2, int a, int b);

/// Products and sums of beta and their comparison quantities at one pair of points.
struct BetaComparison {
  cd product, sum, bb, diff;
  double product_residual = 0.0;  // vs the expanded product identity
  double sum_residual = 0.0;      // vs 2 - 2 u1 u2 Re(z1 conj z2)
  double bb_residual = 0.0;       // vs 1 - u1 u2 - u2 m1^2 - u1 m2^2
  double prod_ratio = 0.0;        // |b+ b-| / hat_gamma
  double sum_ratio = 0.0;
  double bb_ratio = 0.0;
  double diff_re_ratio = 0.0;     // |Re(b+ - b-)| / (rho1 rho2)
  double diff_im_ratio = 0.0;     // |Im(b+ - b-)| / |z1 - z2|
  double min_beta_ratio = 0.0;    // min |beta| / gamma
  double dichotomy = 0.0;         // min(|Re diff|, |Im diff|) / |diff|
  bool positive = false;          // product, sum and bb real and positive
};

BetaComparison beta_comparison(const PointData& p1, const PointData& p2);

struct LemmaBetaReport {
  int draws = 0;
  double min_prod = 0, max_prod = 0;
  double min_sum = 0, max_sum = 0;
  double min_bb = 0, max_bb = 0;
  double max_diff_re = 0, max_diff_im = 0;
  double min_beta = 0;
  double max_dichotomy = 0;
  double max_identity_residual = 0;
  int positivity_failures = 0;
  bool pass = false;
};

struct SweepSpec {
  int draws = 2000;
  double z_max = 1.2;
  double eta_min = 1e-4;
  double eta_max = 1.0;
  unsigned long long seed = 2;
};

/// Random pairs of imaginary-axis points drawn from the sweep region.
std::vector<std::pair<PointData, PointData>> sweep_points(const SweepSpec& spec);

LemmaBetaReport lemma_beta_report(const SweepSpec& spec);

/// Empirical constants C in the bounds ||M12|| <= C/gamma,
/// |<hat M12^{A1} A2>| <= C rho1 rho2 / hat_gamma, ||M121|| <= C/(eta_* gamma),
/// ||M12^{A_c}|| <= C and |<M12^A E->| <= C |z1 - z2| / gamma (bulk, eta1 eta2 < 0).
struct BoundAudit {
  double m12 = 0, hat_m12 = 0, m121 = 0, centered = 0, off_direction = 0;
  double hat_m12_bulk = 0;  // restricted to |z_i| <= 0.95, |eta_i| <= 0.01
};

BoundAudit bound_audit(const SweepSpec& spec);

}  // namespace nhlaw
