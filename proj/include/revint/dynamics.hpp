#pragma once

#include <cmath>

namespace revint {

/// Time branch of the profile equations: Plus is the t > 0 problem (upper
/// signs), Minus the t < 0 problem (lower signs).
enum class Branch { Plus, Minus };

struct ModelParams {
  double m = 3.0;
  Branch branch = Branch::Minus;

  // +1 for the upper-sign (Plus) equations, -1 for the lower-sign (Minus).
  double sign() const { return branch == Branch::Plus ? 1.0 : -1.0; }
  // Scaling exponents of the near<->far change of variables.
  double p() const { return 0.5 * (m + 1.0); }
  double q() const { return 0.5 * (m + 3.0); }
  // Far-field coordinate of the stationary exact solution.
  double x_q() const { return std::sqrt(2.0 / (m + 1.0)); }
};

/// Near-field state (xi, u, w): u is the profile value H, w = H^m dH/dxi.
struct NearState {
  double xi = 0.0;
  double u = 0.0;
  double w = 0.0;
};

/// Far-field state (x, y, z): y = 1/u, x and z carry the blown-up scaling.
struct FarState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Rate of change of the near-field system per unit tau.
/// Throws std::domain_error for u < 0 with non-integer m.
NearState near_rhs(const ModelParams& params, const NearState& s);

/// Rate of change of the far-field system per unit s.
FarState far_rhs(const ModelParams& params, const FarState& s);

/// The Minus-branch far-field system written in the reversed clock, so that
/// backward shots integrate forward. Equals -far_rhs on the Minus branch.
FarState far_rhs_reversed(const ModelParams& params, const FarState& s);

/// Change of variables between the frames; singular at u = 0 / y = 0.
FarState near_to_far(const ModelParams& params, const NearState& s);
NearState far_to_near(const ModelParams& params, const FarState& s);

/// E = w^2/2 - u^{m+1}/(m+1) - u^{m+2}/(m+2). Along Plus-branch trajectories
/// dE/dtau = -(m+1)/2 * xi * w^2.
double energy(const ModelParams& params, const NearState& s);

/// Exact connecting orbit of the near-field system, defined for tau < 1/a.
NearState exact_near(const ModelParams& params, double a, double tau);

/// Exact connecting orbit of the far-field system, defined for s > -1/b.
FarState exact_far(const ModelParams& params, double b, double s);

/// Explicit stable/unstable manifold of the far equilibrium (x0, 0, 0) in the
/// invariant plane y = 0: z = psi(x) with psi(x0) = 0, psi'(x0) = +/-1.
double stable_manifold_psi(const ModelParams& params, double x, double x0);

}  // namespace revint
