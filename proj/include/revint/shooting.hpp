#pragma once

#include <limits>
#include <string>
#include <vector>

#include "revint/dynamics.hpp"
#include "revint/integrator.hpp"

namespace revint {

struct ShootConfig {
  double delta = 5e-3;      // far-field seed offset along the center manifold
  double eps = 1e-3;        // near-field seed offset
  double switch_xi = 20.0;  // far->near frame-switch threshold on xi
  double tau_inf = 1e30;    // forward-shot clock horizon (far-field event normally fires first)
  double eq_tol = 1e-8;     // equilibrium-proximity threshold on max(u, |w|)
  double u_floor = 1e-12;   // u = 0 exit fires here; keeps fractional powers off zero
  double y_big = 1e10;      // far-frame u = 0 exit threshold on y
  // Forward shots switch to the far-field chart at switch_xi and stop once z
  // falls to plus_z_stop; x0 is read by extrapolating the center-manifold
  // relation x(z) to z = 0 over the trailing window [z_stop, span * z_stop].
  double plus_z_stop = 3e-4;
  double plus_fit_span = 10.0;
  double guard_minus = 1e12;  // overflow guard for backward shots
  double guard_plus = 1e18;   // forward shots legitimately reach w ~ u^{(m+2)/2} at readout
  // A backward shot still running at this clock with max(u, |w|) below
  // hover_tol is parked at a near-field equilibrium: trajectories adjacent to
  // a connecting one take arbitrarily long to be re-ejected, so the park is
  // classified as NearEquilibrium with A read from the frozen xi.
  double near_sigma_cap = 1e5;
  double hover_tol = 1e-2;
  double far_sigma_cap = 1e6;
  bool store_trajectory = true;
  IntegrationConfig integ;
};

void validate(const ShootConfig& cfg);

enum class TerminationKind {
  HitU0,            // reached u = 0 with w >= 0
  HitW0,            // reached w = 0 with u >= 0
  NearEquilibrium,  // landed within eq_tol of (A, 0, 0); A recovered from xi
  Diverged,
  BudgetExhausted,
  ReachedFarField,  // forward shots only: xi reached xi_far (or the tau horizon)
};

const char* to_string(TerminationKind kind);

struct Termination {
  TerminationKind kind = TerminationKind::BudgetExhausted;
  double at_time = 0.0;  // shot clock at termination
  NearState state;       // terminal state in the near frame
  double A = std::numeric_limits<double>::quiet_NaN();  // set for NearEquilibrium
};

struct ShotRecord {
  ModelParams params;
  double seed = 0.0;  // x0 for backward shots, A_plus for forward shots
  Termination termination;
  // Near-frame view of the whole shot, on a single increasing shot clock.
  std::vector<double> near_clock;
  std::vector<NearState> trajectory;
  // Far-frame leg (backward shots) or the mapped far view (forward shots).
  std::vector<double> far_clock;
  std::vector<FarState> far_trace;
  IntegrationStats stats;
  double x0_estimate = std::numeric_limits<double>::quiet_NaN();  // forward shots
  double eps_used = 0.0;  // forward shots: seed offset after the feasibility floor
};

/// Seed on the center manifold of the far equilibrium (x0, 0, 0), a step
/// delta away, for the backward Minus-branch shot. O(delta^2) dropped.
FarState seed_far_minus(const ModelParams& params, double x0, double delta);

/// Seed a step eps away from the near equilibrium (A_plus, 0, 0) along the
/// center manifold (A_plus > 0) or the unstable manifold (A_plus < 0).
NearState seed_near_plus(const ModelParams& params, double A_plus, double eps);

/// Backward H- shot: depart (x0, 0, 0) in the reversed far-field clock,
/// switch frames when xi falls to cfg.switch_xi, then continue the near-field
/// system backward in tau until one of the termination events fires.
ShotRecord shoot_minus(const ModelParams& params, double x0, const ShootConfig& cfg);

struct PlusShot {
  double x0_estimate = 0.0;
  ShotRecord record;
};

/// Forward H+ shot: depart (A_plus, 0, 0), integrate the near-field system
/// until xi reaches cfg.switch_xi, then continue in the far-field chart until
/// z falls to cfg.plus_z_stop; x0 is the z -> 0 extrapolation of x along the
/// center manifold. Throws if w is ever observed non-positive on the
/// near-field leg (it cannot vanish).
PlusShot shoot_plus(const ModelParams& params, double A_plus, const ShootConfig& cfg);

/// Least-squares line fit of u against xi over the trailing (returning) leg
/// of a backward shot, restricted to u in [u_lo, u_hi]; returns the
/// xi-intercept. Throws if fewer than 8 samples fall in the window or the
/// fit residual exceeds 5% of the window height.
double extrapolate_A_minus(const ShotRecord& record, double u_lo, double u_hi);

/// The default extrapolation window [0.05, 0.25] * u_max of the returning leg.
std::pair<double, double> default_fit_window(const ShotRecord& record);

}  // namespace revint
