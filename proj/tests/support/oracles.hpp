#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks: fixed-point iteration instead of the
// cubic, dense operators instead of block reductions, dense inverses instead
// of spectral decompositions.

#include <array>
#include <random>

#include "nhlaw/block.hpp"

namespace oracle {

using nhlaw::Block;
using nhlaw::cd;
using nhlaw::Mat;
using nhlaw::Vec;

/// Roots of m^3 + 2w m^2 + (w^2 + 1 - |z|^2) m + w by Durand-Kerner iteration.
std::array<cd, 3> durand_kerner(cd z, cd w);

/// M^z(w) from damped fixed-point iteration of M = -(w + Z + S[M])^{-1}.
Block mde_fixed_point(cd z, cd w);

/// Half-gap and right edge of the density support from
/// 4a E^4 - (8a^2 + 20a - 1) E^2 + 4(a - 1)^3 = 0, a = |z|^2.
double edge_half_gap(double a);
double edge_right(double a);

/// Semicircle mass on [0, x] (the |z| = 0 density is sqrt(4 - E^2)/(2 pi)).
double semicircle_mass(double x);

/// S[X] written entrywise: the diagonal of each block becomes the mean
/// diagonal of the other block.
Mat dense_s(const Mat& x);

/// The map X -> X - M1 S[X] M2 on C^{2n x 2n} as a (2n)^2 x (2n)^2 matrix
/// acting on column-major vec(X).
Mat dense_b(const Block& m1, const Block& m2, int n);

/// Solves B12[X] = Y through dense_b.
Mat dense_b_solve(const Block& m1, const Block& m2, const Mat& y);

/// Hermitization and its resolvent at i eta by dense LU.
Mat hermitize(const Mat& x, cd z);
Mat dense_resolvent(const Mat& x, cd z, double eta);
Mat im_part(const Mat& g);
/// |f(H)| for f = 1/(lambda - i eta) via a Hermitian eigensolver.
Mat dense_abs_resolvent(const Mat& x, cd z, double eta);

/// Normalized trace (2n)^{-1} Tr.
cd ntrace(const Mat& a);

/// Mu solving mu^3 + 2 eta mu^2 - (1 - a - eta^2) mu - eta = 0 on (0, 1) by bisection.
double axis_mu_bisect(double a, double eta);

/// Classical RK4 with a fixed step for d eta/dt = -mu(|z_t|^2, eta) - eta/2.
double rk4_eta(cd z0, double eta0, double t, int steps);

/// Complex Ginibre matrix from std::mt19937_64.
Mat random_ginibre(int n, std::mt19937_64& gen);

}  // namespace oracle
