#pragma once

// One-body deterministic objects of the Hermitized i.i.d. model: the scalar
// Dyson cubic m^3 + 2w m^2 + (w^2 + 1 - |z|^2) m + w = 0, the block matrix
// M^z(w), the self-consistent density and its quantiles.

#include <array>
#include <vector>

#include "nhlaw/block.hpp"

namespace nhlaw {

struct DysonSolution {
  cd m;
  cd u;        // m / (w + m)
  double rho;  // |Im m| / pi
};

struct SupportInfo {
  double gap_delta;   // width of the gap [-gap/2, gap/2] around 0
  double right_edge;  // sup of the support
};

struct MdeCheck {
  double residual;      // spectral norm of M^{-1} + w + Z + S[M]
  bool side_condition;  // Im M has the sign of Im w
};

inline constexpr double kDensityThreshold = 1e-8;
inline constexpr double kEdgeTolerance = 1e-10;
inline constexpr double kBoundaryEpsilon = 1e-9;

/// All three roots of the cubic, Newton-polished.
std::array<cd, 3> cubic_roots(cd z, cd w);

/// |m^3 + 2w m^2 + (w^2 + 1 - |z|^2) m + w|.
double cubic_residual(cd z, cd w, cd m);

/// Root with Im m * Im w > 0; homotopy continuation from large Im w when
/// the sign condition alone is ambiguous. Requires Im w != 0.
DysonSolution solve_m(cd z, cd w);

/// Imaginary-axis fast path w = i*eta, m = i*mu with mu the unique real root
/// of mu^3 + 2 eta mu^2 - (1 - |z|^2 - eta^2) mu - eta with sign(mu) = sign(eta).
/// eta = 0 returns the limit i0+.
DysonSolution solve_m_axis(cd z, double eta);

/// Boundary value m(E + i0+) by Richardson extrapolation from E + i eps, E + i eps/2.
DysonSolution solve_m_boundary(cd z, double e);

/// [[m, -z u], [-conj(z) u, m]].
Block m_matrix(cd z, const DysonSolution& s);
Block m_matrix(cd z, cd w);

MdeCheck verify_mde(const Block& m, cd z, cd w);

/// rho^z(E) = pi^{-1} Im m(E + i0+), evaluated on the real axis directly.
double density(cd z, double e);

SupportInfo support_gap(cd z);

/// Integral of rho^z over [a, b], 0 <= a <= b.
double integrated_density(cd z, double a, double b);

/// gamma_i solving int_0^{gamma_i} rho^z = i / (2n); negative indices mirror.
std::vector<double> quantiles(cd z, int n, const std::vector<int>& indices);

/// eta_f solving int_{-eta_f}^{eta_f} rho^z = 1/n.
double fluctuation_scale(cd z, int n);

}  // namespace nhlaw
