#include "revint/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace revint {

namespace {

bool is_integer(double m) { return m == std::floor(m); }

}  // namespace

NearState near_rhs(const ModelParams& params, const NearState& s) {
  if (s.u < 0.0 && !is_integer(params.m))
    throw std::domain_error("near_rhs: u < 0 with non-integer m");
  const double sg = params.sign();
  const double um = std::pow(s.u, params.m);
  NearState d;
  d.xi = um;
  d.u = s.w;
  d.w = um * (1.0 + sg * s.u) - sg * params.p() * s.xi * s.w;
  return d;
}

FarState far_rhs(const ModelParams& params, const FarState& s) {
  const double sg = params.sign();
  FarState d;
  d.x = s.y - params.p() * s.x * s.z;
  d.y = -s.z * s.y;
  d.z = s.y * (sg + s.y) - sg * params.p() * s.x * s.z - params.q() * s.z * s.z;
  return d;
}

FarState far_rhs_reversed(const ModelParams& params, const FarState& s) {
  if (params.branch != Branch::Minus)
    throw std::domain_error("far_rhs_reversed: defined for the Minus branch only");
  FarState d = far_rhs(params, s);
  d.x = -d.x;
  d.y = -d.y;
  d.z = -d.z;
  return d;
}

FarState near_to_far(const ModelParams& params, const NearState& s) {
  if (s.u <= 0.0) throw std::domain_error("near_to_far: transform is singular at u <= 0");
  FarState f;
  f.x = s.xi * std::pow(s.u, -params.p());
  f.y = 1.0 / s.u;
  f.z = s.w * std::pow(s.u, -params.q());
  return f;
}

NearState far_to_near(const ModelParams& params, const FarState& s) {
  if (s.y <= 0.0) throw std::domain_error("far_to_near: transform is singular at y <= 0");
  NearState n;
  n.xi = s.x * std::pow(s.y, -params.p());
  n.u = 1.0 / s.y;
  n.w = s.z * std::pow(s.y, -params.q());
  return n;
}

double energy(const ModelParams& params, const NearState& s) {
  const double m = params.m;
  return 0.5 * s.w * s.w - std::pow(s.u, m + 1.0) / (m + 1.0) -
         std::pow(s.u, m + 2.0) / (m + 2.0);
}

NearState exact_near(const ModelParams& params, double a, double tau) {
  const double m = params.m;
  if (a <= 0.0) throw std::domain_error("exact_near: a must be positive");
  if (tau >= 1.0 / a) throw std::domain_error("exact_near: tau outside (-inf, 1/a)");
  const double r = a / (1.0 - tau * a);
  const double c_xi =
      std::pow(std::pow(2.0, m) * (m + 1.0) / std::pow(m - 1.0, m + 1.0), 1.0 / (m - 1.0));
  const double c_u = std::pow(2.0 * (m + 1.0) / ((m - 1.0) * (m - 1.0)), 1.0 / (m - 1.0));
  NearState s;
  s.xi = c_xi * std::pow(r, (m + 1.0) / (m - 1.0));
  s.u = c_u * std::pow(r, 2.0 / (m - 1.0));
  s.w = s.xi;
  return s;
}

FarState exact_far(const ModelParams& params, double b, double s) {
  if (b <= 0.0) throw std::domain_error("exact_far: b must be positive");
  if (s <= -1.0 / b) throw std::domain_error("exact_far: s outside (-1/b, inf)");
  const double z = b / (1.0 + s * b);
  FarState f;
  f.x = params.x_q();
  f.y = z / params.x_q();
  f.z = z;
  return f;
}

double stable_manifold_psi(const ModelParams& params, double x, double x0) {
  if (x <= 0.0 || x0 <= 0.0)
    throw std::domain_error("stable_manifold_psi: requires x, x0 > 0");
  const double sg = params.sign();
  return -sg * params.p() * x * (1.0 - std::pow(x / x0, 2.0 / (params.m + 1.0)));
}

}  // namespace revint
