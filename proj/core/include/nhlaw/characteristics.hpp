#pragma once

// Characteristic flow z_t = e^{-t/2} z_0, d/dt eta = -Im m^{z_t}(i eta) - eta/2
// on the imaginary axis, together with its exact integrals and the evolution
// identities of the two-body deterministic approximations.

#include <iosfwd>
#include <string>
#include <vector>

#include "nhlaw/block.hpp"

namespace nhlaw {

struct CharState {
  double t = 0.0;
  cd z;
  double eta = 0.0;
  cd m, u;
  double rho = 0.0;
};

struct Trajectory {
  std::vector<CharState> states;
  double t_star = 0.0;
  bool truncated = false;        // integration stopped at |eta| = kEtaFloor
  double max_defect = 0.0;       // worst deviation from the implicit eta/rho relation
  int rejected_steps = 0;
};

inline constexpr double kEtaFloor = 1e-8;

/// Dyson state at (z, i eta) stamped with time t.
CharState char_state(double t, cd z, double eta);

/// Dormand-Prince RK45 with local error control; throws CrossedZero if T >= t_star.
Trajectory flow_forward(cd z0, double eta0, double T, double tolerance = 1e-12);

/// State at time t from the implicit relation
/// |eta_t|/rho_t = e^{-t}|eta_0|/rho_0 - pi(1 - e^{-t}); throws NoBracket past t_star.
CharState flow_state_implicit(cd z0, double eta0, double t);

/// First time |eta_t| reaches zero.
double t_star(cd z0, double eta0);

struct BackwardResult {
  cd z0;
  double eta0 = 0.0;
  double dist = 0.0;    // dist(i eta0, supp rho^{z0})
  double c_star = 0.0;  // dist / T
};

/// Initial data whose flow reaches (z_T, eta_T) at time T; shooting on the
/// implicit relation. Throws ShootingFailure.
BackwardResult flow_backward(cd z_t, double eta_t, double T);

struct IntegralCheck {
  double integral = 0.0;       // int_s^t rho_r/|eta_r| dr
  double closed_form = 0.0;    // (1/pi)[log(eta_s/eta_t) - (t - s)/2]
  double residual = 0.0;
  double alpha_integral = 0.0; // int_s^t |eta_r|^{-alpha} dr
  double c_alpha = 0.0;        // alpha_integral * |eta_t|^{alpha-1} rho_t
};

IntegralCheck integral_identity_check(cd z0, double eta0, double s, double t, double alpha);

/// Finite-difference residuals (max entry) of the time derivatives of M12 and
/// M121 along two coupled characteristics. The `literal_*` entries compare
/// against M12 + S[M12] M21^I and
/// M121 + S[M121] M11^I + S[M12] M121^{I,A2} + M121^{A1,I} S[M21];
/// the other entries use the forms obtained from M_t = e^{t/2} M_0.
struct EvolutionCheck {
  double average = 0.0;      // <M12 A2>' vs <M12 A2> + <S[M12] M21^{A2}>
  double iso12 = 0.0;        // M12' vs M12 + M12^{S[M12]}
  double iso121 = 0.0;       // M121' vs 3/2 M121 + M11^{S[M121]} + M121^{A1,S[M21]} + M121^{S[M12],A2}
  double literal_iso12 = 0.0;
  double literal_iso121 = 0.0;
};

EvolutionCheck m12_evolution_check(cd z1, double eta1, cd z2, double eta2, const Block& a1,
                                   const Block& a2, double t, double h = 1e-4);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace nhlaw
