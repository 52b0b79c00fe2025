#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "revint/shooting.hpp"

namespace revint {

/// Raised when a shot inside a bracket ends Diverged or BudgetExhausted and
/// the classification sign cannot be read.
struct NonEvaluableShot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Signed residual encoding the two-exit classification of the backward shot:
/// +u_term on a w = 0 exit, -w_term on a u = 0 exit, 0 on an equilibrium
/// landing. Changes sign exactly at connecting trajectories.
double residual_minus(const ModelParams& params, double x0, const ShootConfig& cfg);

struct ConnectionMapSample {
  double x0 = 0.0;
  bool evaluable = false;
  TerminationKind kind = TerminationKind::BudgetExhausted;
  double xi_term = 0.0;
  double val_term = 0.0;  // u at a w = 0 exit, w at a u = 0 exit
};

/// One backward shot per grid point; non-evaluable points are kept as gaps.
std::vector<ConnectionMapSample> trace_map_minus(const ModelParams& params,
                                                 std::span<const double> x0_grid,
                                                 const ShootConfig& cfg, int threads = 1);

struct FindResult {
  double x0_star = 0.0;
  double A_minus = 0.0;
  std::string a_method;  // "equilibrium", "terminal" or "extrapolation"
  ShotRecord rec_lo, rec_hi;
};

/// Bisection on the classification sign over [lo, hi] down to relative width
/// 1e-13. A_minus is read from an equilibrium landing when one occurs, from
/// the terminal xi of a limiting trajectory that passes close to the
/// equilibrium, or by linear extrapolation otherwise.
FindResult find_x0_star(const ModelParams& params, double lo, double hi,
                        const ShootConfig& cfg);

/// Root-find A_plus such that the forward shot reads off x0_target, using the
/// monotonicity of the A_plus -> x0 map. Secant steps with bisection
/// fallback; stops at |x0 - target| <= 1e-8.
double match_plus(const ModelParams& params, double x0_target, double A_lo, double A_hi,
                  const ShootConfig& cfg);

/// Geometric bracket growth on the correct side of zero for a given target.
std::pair<double, double> auto_bracket_plus(const ModelParams& params, double x0_target,
                                            const ShootConfig& cfg);

enum class SolutionKind { Reversing, AntiReversing, Stationary };

const char* to_string(SolutionKind kind);

struct ProfilePoint {
  double xi = 0.0;
  double H = 0.0;
};

struct SimilaritySolution {
  double m = 0.0;
  double A_minus = 0.0;
  double A_plus = 0.0;
  double x0_star = 0.0;
  SolutionKind kind = SolutionKind::Stationary;
  bool rejected = false;  // mixed-sign candidates are kept but flagged
  std::string a_minus_method;
  std::vector<ProfilePoint> profile_minus;
  std::vector<ProfilePoint> profile_plus;
};

struct SearchConfig {
  double x0_lo = 0.02;
  double x0_hi = 3.0;
  int pts_per_decade = 400;
  int profile_points = 400;
  int threads = 1;
  // Refined boundaries closer to x_Q than this are the stationary solution.
  double xq_dedupe_tol = 1e-6;
  ShootConfig shoot;
};

/// Scan x0 for classification boundaries, refine each, invert the forward
/// map for the matching A_plus, sample both profiles and classify. The
/// stationary boundary at x_Q is recognized and excluded; an empty result
/// means only the stationary solution exists.
std::vector<SimilaritySolution> solve_pair(double m, const SearchConfig& cfg);

struct BranchPoint {
  double m = 0.0;
  double x0_star = 0.0;
  double A_minus = 0.0;
  std::string branch_label;  // "A-positive", "A-negative" or "A-zero"
};

/// Continuation in m: each bracket is seeded from the previous roots plus a
/// fresh coarse scan (with a dense patch near x_Q to catch branch births).
std::vector<BranchPoint> sweep_branches(double m_lo, double m_hi, double m_step,
                                        const SearchConfig& cfg);

}  // namespace revint
