#include "revint/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace revint {

namespace {

constexpr double kFarViewUMin = 1e-6;  // map near samples to the far frame only above this

double xi_of(const ModelParams& params, const FarState& f) {
  return f.x * std::pow(f.y, -params.p());
}

NearState clamped(const NearState& s) {
  NearState c = s;
  if (c.u < 0.0) c.u = 0.0;
  return c;
}

// Trial RK stages may probe slightly negative u near the u = 0 boundary; the
// field is evaluated with u clamped at zero there.
OdeProblem near_problem(const ModelParams& params, Direction dir) {
  OdeProblem p;
  p.dimension = 3;
  p.direction = dir;
  p.rhs = [params](double, std::span<const double> y, std::span<double> dydt) {
    const NearState d = near_rhs(params, clamped(NearState{y[0], y[1], y[2]}));
    dydt[0] = d.xi;
    dydt[1] = d.u;
    dydt[2] = d.w;
  };
  return p;
}

OdeProblem far_reversed_problem(const ModelParams& params) {
  OdeProblem p;
  p.dimension = 3;
  p.direction = Direction::Forward;
  p.rhs = [params](double, std::span<const double> y, std::span<double> dydt) {
    const FarState d = far_rhs_reversed(params, FarState{y[0], y[1], y[2]});
    dydt[0] = d.x;
    dydt[1] = d.y;
    dydt[2] = d.z;
  };
  return p;
}

double max_abs3(std::span<const double> y) {
  return std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
}

// Least-squares polynomial fit of degree deg; returns the value at t = 0.
// The abscissae are rescaled to [0, 1] before forming the normal equations.
double polyfit_intercept(const std::vector<double>& t, const std::vector<double>& v, int deg) {
  const int n = deg + 1;
  const double scale = *std::max_element(t.begin(), t.end());
  std::vector<double> ata(n * n, 0.0), atb(n, 0.0);
  std::vector<double> pw(n);
  for (size_t k = 0; k < t.size(); ++k) {
    pw[0] = 1.0;
    for (int j = 1; j < n; ++j) pw[j] = pw[j - 1] * (t[k] / scale);
    for (int i = 0; i < n; ++i) {
      atb[i] += pw[i] * v[k];
      for (int j = 0; j < n; ++j) ata[i * n + j] += pw[i] * pw[j];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(ata[r * n + col]) > std::abs(ata[piv * n + col])) piv = r;
    if (ata[piv * n + col] == 0.0) throw std::runtime_error("polyfit: singular system");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(ata[piv * n + j], ata[col * n + j]);
      std::swap(atb[piv], atb[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = ata[r * n + col] / ata[col * n + col];
      for (int j = col; j < n; ++j) ata[r * n + j] -= f * ata[col * n + j];
      atb[r] -= f * atb[col];
    }
  }
  std::vector<double> coef(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = atb[r];
    for (int j = r + 1; j < n; ++j) s -= ata[r * n + j] * coef[j];
    coef[r] = s / ata[r * n + r];
  }
  return coef[0];
}

TerminationKind kind_from_status(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::NonFinite: return TerminationKind::Diverged;
    case IntegrationStatus::MaxSteps:
    case IntegrationStatus::StepFloor: return TerminationKind::BudgetExhausted;
    default: return TerminationKind::BudgetExhausted;
  }
}

void append_far_leg(ShotRecord& rec, const ModelParams& params,
                    const IntegrationOutcome& res, double clock_offset) {
  for (size_t i = 0; i < res.samples.size(); ++i) {
    const auto& y = res.samples[i];
    const FarState f{y[0], y[1], y[2]};
    const double clk = clock_offset + res.sample_times[i];
    rec.far_clock.push_back(clk);
    rec.far_trace.push_back(f);
    if (f.y > 0.0) {
      rec.near_clock.push_back(clk);
      rec.trajectory.push_back(far_to_near(params, f));
    }
  }
}

void append_near_leg(ShotRecord& rec, const ModelParams& params,
                     const IntegrationOutcome& res, double clock_offset, double clock_sign) {
  for (size_t i = 0; i < res.samples.size(); ++i) {
    const auto& y = res.samples[i];
    const NearState s{y[0], y[1], y[2]};
    const double clk = clock_offset + clock_sign * res.sample_times[i];
    rec.near_clock.push_back(clk);
    rec.trajectory.push_back(s);
    if (s.u >= kFarViewUMin) {
      rec.far_clock.push_back(clk);
      rec.far_trace.push_back(near_to_far(params, s));
    }
  }
}

}  // namespace

void validate(const ShootConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta <= 0.1))
    throw std::invalid_argument("ShootConfig: delta must lie in (0, 0.1]");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("ShootConfig: eps must be positive");
  if (!(cfg.switch_xi > 1.0)) throw std::invalid_argument("ShootConfig: switch_xi must exceed 1");
  if (!(cfg.tau_inf >= 1e3)) throw std::invalid_argument("ShootConfig: tau_inf must be >= 1e3");
  if (!(cfg.eq_tol > 0.0)) throw std::invalid_argument("ShootConfig: eq_tol must be positive");
}

const char* to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::HitU0: return "hit_u0";
    case TerminationKind::HitW0: return "hit_w0";
    case TerminationKind::NearEquilibrium: return "near_equilibrium";
    case TerminationKind::Diverged: return "diverged";
    case TerminationKind::BudgetExhausted: return "budget_exhausted";
    case TerminationKind::ReachedFarField: return "reached_far_field";
  }
  return "unknown";
}

FarState seed_far_minus(const ModelParams& params, double x0, double delta) {
  if (!(x0 > 0.0)) throw std::invalid_argument("seed_far_minus: x0 must be positive");
  const double p = params.p();
  FarState s;
  s.x = x0 + (p - p * p * x0 * x0) * delta;
  s.y = p * x0 * delta;
  s.z = delta;
  return s;
}

NearState seed_near_plus(const ModelParams& params, double A_plus, double eps) {
  if (A_plus == 0.0)
    throw std::invalid_argument("seed_near_plus: A_plus = 0 is the stationary seed");
  if (!(eps > 0.0)) throw std::invalid_argument("seed_near_plus: eps must be positive");
  const double m = params.m;
  NearState s;
  if (A_plus > 0.0) {
    const double c = params.p() * A_plus;
    s.xi = A_plus + eps;
    s.u = eps / c;
    s.w = std::pow(c, -(m + 1.0)) * std::pow(eps, m);
  } else {
    const double c = params.p() * std::abs(A_plus) * m;
    s.xi = A_plus + eps;
    s.u = std::pow(c, 1.0 / m) * std::pow(eps, 1.0 / m);
    s.w = std::pow(c, (m + 1.0) / m) * std::pow(eps, 1.0 / m) / m;
  }
  return s;
}

ShotRecord shoot_minus(const ModelParams& params, double x0, const ShootConfig& cfg) {
  if (params.branch != Branch::Minus)
    throw std::invalid_argument("shoot_minus: params must select the Minus branch");
  if (!(x0 > 0.0)) throw std::invalid_argument("shoot_minus: x0 must be positive");
  validate(cfg);

  ShotRecord rec;
  rec.params = params;
  rec.seed = x0;

  const FarState seed = seed_far_minus(params, x0, cfg.delta);
  NearState near_start;
  double clock = 0.0;

  if (xi_of(params, seed) > cfg.switch_xi) {
    // Far leg: reversed clock, terminal events for the frame switch, the two
    // exits of the continuation alternative, and the overflow guard.
    const OdeProblem prob = far_reversed_problem(params);
    std::array<EventSpec, 4> events{
        EventSpec{[params, &cfg](double, std::span<const double> y) {
                    return xi_of(params, FarState{y[0], y[1], y[2]}) - cfg.switch_xi;
                  },
                  EventDirection::Decreasing, true, "switch"},
        EventSpec{[](double, std::span<const double> y) { return y[2]; },
                  EventDirection::Any, true, "w_zero"},
        EventSpec{[&cfg](double, std::span<const double> y) { return y[1] - cfg.y_big; },
                  EventDirection::Increasing, true, "u_zero"},
        EventSpec{[&cfg](double, std::span<const double> y) {
                    return cfg.guard_minus - max_abs3(y);
                  },
                  EventDirection::Decreasing, true, "guard"},
    };
    const std::array<double, 3> y0{seed.x, seed.y, seed.z};
    IntegrationOutcome res =
        integrate(prob, y0, 0.0, cfg.far_sigma_cap, cfg.integ, events, cfg.store_trajectory);
    rec.stats = res.stats;
    if (cfg.store_trajectory) append_far_leg(rec, params, res, 0.0);

    const FarState fin{res.y_final[0], res.y_final[1], res.y_final[2]};
    if (res.status != IntegrationStatus::EventHit) {
      rec.termination.kind = kind_from_status(res.status);
      rec.termination.at_time = res.t_final;
      if (fin.y > 0.0) rec.termination.state = far_to_near(params, fin);
      return rec;
    }
    if (res.event_label == "w_zero" || res.event_label == "u_zero") {
      rec.termination.kind = res.event_label == "w_zero" ? TerminationKind::HitW0
                                                         : TerminationKind::HitU0;
      rec.termination.at_time = res.t_final;
      rec.termination.state = far_to_near(params, fin);
      if (rec.termination.kind == TerminationKind::HitW0) rec.termination.state.w = 0.0;
      return rec;
    }
    if (res.event_label == "guard") {
      rec.termination.kind = TerminationKind::Diverged;
      rec.termination.at_time = res.t_final;
      if (fin.y > 0.0) rec.termination.state = far_to_near(params, fin);
      return rec;
    }
    near_start = far_to_near(params, fin);
    clock = res.t_final;
  } else {
    near_start = far_to_near(params, seed);
  }

  // Near leg, backward in tau.
  const OdeProblem prob = near_problem(params, Direction::Backward);
  std::array<EventSpec, 4> events{
      EventSpec{[&cfg](double, std::span<const double> y) { return y[1] - cfg.u_floor; },
                EventDirection::Decreasing, true, "u_zero"},
      EventSpec{[](double, std::span<const double> y) { return y[2]; },
                EventDirection::Any, true, "w_zero"},
      EventSpec{[&cfg](double, std::span<const double> y) {
                  return std::max(y[1], std::abs(y[2])) - cfg.eq_tol;
                },
                EventDirection::Decreasing, true, "equilibrium"},
      EventSpec{[&cfg](double, std::span<const double> y) {
                  return cfg.guard_minus - max_abs3(y);
                },
                EventDirection::Decreasing, true, "guard"},
  };
  const std::array<double, 3> y0{near_start.xi, near_start.u, near_start.w};
  IntegrationOutcome res = integrate(prob, y0, 0.0, -cfg.near_sigma_cap, cfg.integ, events,
                                     cfg.store_trajectory);
  rec.stats.steps_accepted += res.stats.steps_accepted;
  rec.stats.steps_rejected += res.stats.steps_rejected;
  rec.stats.rhs_evals += res.stats.rhs_evals;
  if (cfg.store_trajectory) append_near_leg(rec, params, res, clock, -1.0);

  Termination& term = rec.termination;
  term.at_time = clock - res.t_final;
  term.state = NearState{res.y_final[0], res.y_final[1], res.y_final[2]};
  if (res.status == IntegrationStatus::ReachedTEnd) {
    // Still running at the clock cap. A parked state is an equilibrium
    // landing (re-ejection takes arbitrarily long near a connecting
    // trajectory); anything else is an exhausted budget.
    if (std::max(term.state.u, std::abs(term.state.w)) <= cfg.hover_tol) {
      term.kind = TerminationKind::NearEquilibrium;
      term.A = term.state.xi;
    } else {
      term.kind = TerminationKind::BudgetExhausted;
    }
    return rec;
  }
  if (res.status != IntegrationStatus::EventHit) {
    term.kind = kind_from_status(res.status);
    return rec;
  }
  if (res.event_label == "u_zero") {
    term.kind = TerminationKind::HitU0;
    if (term.state.w < 0.0) term.state.w = 0.0;
  } else if (res.event_label == "w_zero") {
    term.kind = TerminationKind::HitW0;
    term.state.w = 0.0;
    if (term.state.u < 0.0) term.state.u = 0.0;
  } else if (res.event_label == "equilibrium") {
    term.kind = TerminationKind::NearEquilibrium;
    term.A = term.state.xi;
  } else {
    term.kind = TerminationKind::Diverged;
  }
  return rec;
}

// Departures along the center manifold (A_plus > 0) crawl with the step size
// capped by the stable transverse rate p*A*xi, so the step count scales like
// u0^{-(m-1)}. The seed offset keeps the seeded u below an absolute cap
// (expansion validity) and above the value where the crawl exceeds the step
// budget; the residual identity error is measured by the seed-robustness
// tests.
double plus_seed_offset(const ModelParams& params, double A_plus, const ShootConfig& cfg) {
  const double m = params.m;
  // The manifold expansions hold for u small against |A| (their correction
  // coefficients carry inverse powers of A), so the seeded u is capped both
  // absolutely and relative to |A|.
  const double a = std::abs(A_plus);
  const double u0_valid = std::min(0.02, 0.02 * a);
  if (A_plus > 0.0) {
    constexpr double step_budget = 4e4;
    const double u0_budget = std::pow(
        (m + 1.0) * (m + 1.0) * a * a / (13.2 * (m - 1.0) * step_budget), 1.0 / (m - 1.0));
    const double u0_cfg = cfg.eps / (params.p() * a);
    const double u0 = std::max(std::min(u0_cfg, u0_valid), u0_budget);
    return u0 * params.p() * a;
  }
  // Unstable-manifold departures are exponential; no step-budget floor needed.
  const double scale = params.p() * a * m;
  return std::min(cfg.eps, std::pow(u0_valid, m) / scale);
}

PlusShot shoot_plus(const ModelParams& params, double A_plus, const ShootConfig& cfg) {
  if (params.branch != Branch::Plus)
    throw std::invalid_argument("shoot_plus: params must select the Plus branch");
  validate(cfg);

  PlusShot shot;
  ShotRecord& rec = shot.record;
  rec.params = params;
  rec.seed = A_plus;
  rec.eps_used = plus_seed_offset(params, A_plus, cfg);
  Termination& term = rec.termination;

  // Near-field leg, forward in tau, until xi reaches the switch threshold.
  const NearState seed = seed_near_plus(params, A_plus, rec.eps_used);
  const OdeProblem near_prob = near_problem(params, Direction::Forward);
  std::array<EventSpec, 3> near_events{
      EventSpec{[&cfg](double, std::span<const double> y) { return y[0] - cfg.switch_xi; },
                EventDirection::Increasing, true, "switch"},
      EventSpec{[](double, std::span<const double> y) { return y[2]; },
                EventDirection::Any, true, "w_vanished"},
      EventSpec{[&cfg](double, std::span<const double> y) {
                  return cfg.guard_plus - max_abs3(y);
                },
                EventDirection::Decreasing, true, "guard"},
  };
  const std::array<double, 3> y0{seed.xi, seed.u, seed.w};
  IntegrationOutcome res = integrate(near_prob, y0, 0.0, cfg.tau_inf, cfg.integ, near_events,
                                     cfg.store_trajectory);
  rec.stats = res.stats;
  if (cfg.store_trajectory) append_near_leg(rec, params, res, 0.0, 1.0);
  term.at_time = res.t_final;
  term.state = NearState{res.y_final[0], res.y_final[1], res.y_final[2]};

  if (res.status == IntegrationStatus::EventHit && res.event_label == "w_vanished")
    throw std::runtime_error("shoot_plus: w vanished along a forward shot (A_plus = " +
                             std::to_string(A_plus) + ")");
  if ((res.status == IntegrationStatus::EventHit && res.event_label == "guard") ||
      res.status == IntegrationStatus::NonFinite) {
    term.kind = TerminationKind::Diverged;
    return shot;
  }
  if (res.status != IntegrationStatus::EventHit) {
    term.kind = TerminationKind::BudgetExhausted;
    return shot;
  }

  // Far-field leg, forward in s, until z decays to the readout window floor.
  const FarState far_start =
      near_to_far(params, NearState{res.y_final[0], res.y_final[1], res.y_final[2]});
  OdeProblem far_prob;
  far_prob.dimension = 3;
  far_prob.direction = Direction::Forward;
  far_prob.rhs = [params](double, std::span<const double> y, std::span<double> dydt) {
    const FarState d = far_rhs(params, FarState{y[0], y[1], y[2]});
    dydt[0] = d.x;
    dydt[1] = d.y;
    dydt[2] = d.z;
  };
  std::array<EventSpec, 2> far_events{
      EventSpec{[&cfg](double, std::span<const double> y) { return y[2] - cfg.plus_z_stop; },
                EventDirection::Decreasing, true, "z_stop"},
      EventSpec{[&cfg](double, std::span<const double> y) {
                  return cfg.guard_plus - max_abs3(y);
                },
                EventDirection::Decreasing, true, "guard"},
  };
  const double clock0 = res.t_final;
  const std::array<double, 3> f0{far_start.x, far_start.y, far_start.z};
  IntegrationOutcome far_res = integrate(far_prob, f0, 0.0,
                                         std::numeric_limits<double>::infinity(), cfg.integ,
                                         far_events, /*store_samples=*/true);
  rec.stats.steps_accepted += far_res.stats.steps_accepted;
  rec.stats.steps_rejected += far_res.stats.steps_rejected;
  rec.stats.rhs_evals += far_res.stats.rhs_evals;
  if (cfg.store_trajectory) {
    for (size_t i = 0; i < far_res.samples.size(); ++i) {
      const auto& y = far_res.samples[i];
      const FarState f{y[0], y[1], y[2]};
      const double clk = clock0 + far_res.sample_times[i];
      rec.far_clock.push_back(clk);
      rec.far_trace.push_back(f);
      if (f.y > 0.0) {
        rec.near_clock.push_back(clk);
        rec.trajectory.push_back(far_to_near(params, f));
      }
    }
  }
  const FarState f_fin{far_res.y_final[0], far_res.y_final[1], far_res.y_final[2]};
  term.at_time = clock0 + far_res.t_final;
  if (f_fin.y > 0.0) term.state = far_to_near(params, f_fin);

  if (far_res.status != IntegrationStatus::EventHit || far_res.event_label != "z_stop") {
    term.kind = far_res.status == IntegrationStatus::NonFinite ||
                        (far_res.status == IntegrationStatus::EventHit &&
                         far_res.event_label == "guard")
                    ? TerminationKind::Diverged
                    : TerminationKind::BudgetExhausted;
    return shot;
  }

  // On the center manifold x is a smooth function of z; a least-squares cubic
  // over the trailing window extrapolates x to the equilibrium value at z = 0.
  const double z_hi = cfg.plus_z_stop * cfg.plus_fit_span;
  std::vector<double> zs, xs;
  for (size_t i = 0; i < far_res.samples.size(); ++i) {
    const double z = far_res.samples[i][2];
    if (z >= cfg.plus_z_stop && z <= z_hi) {
      zs.push_back(z);
      xs.push_back(far_res.samples[i][0]);
    }
  }
  if (zs.size() < 8)
    throw std::runtime_error("shoot_plus: too few samples in the x(z) readout window");
  shot.x0_estimate = polyfit_intercept(zs, xs, 3);
  rec.x0_estimate = shot.x0_estimate;
  term.kind = TerminationKind::ReachedFarField;
  return shot;
}

namespace {

struct LineFit {
  double slope = 0.0, intercept_u = 0.0, rms = 1e300;
  int n = 0;
};

LineFit fit_line(std::span<const std::pair<double, double>> pts) {
  LineFit f;
  f.n = static_cast<int>(pts.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, u] : pts) {
    sx += x;
    sy += u;
    sxx += x * x;
    sxy += x * u;
  }
  const double n = f.n;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept_u = (sy * sxx - sx * sxy) / denom;
  double rss = 0.0;
  for (const auto& [x, u] : pts) {
    const double r = u - (f.slope * x + f.intercept_u);
    rss += r * r;
  }
  f.rms = std::sqrt(rss / n);
  return f;
}

std::vector<std::pair<double, double>> returning_leg(const ShotRecord& record) {
  size_t i_max = 0;
  for (size_t i = 1; i < record.trajectory.size(); ++i)
    if (record.trajectory[i].u > record.trajectory[i_max].u) i_max = i;
  std::vector<std::pair<double, double>> pts;
  for (size_t i = i_max; i < record.trajectory.size(); ++i)
    pts.emplace_back(record.trajectory[i].xi, record.trajectory[i].u);
  return pts;
}

}  // namespace

// A limiting trajectory hugs the connecting one over some stretch of small u
// and peels off both below (re-ejection from the equilibrium) and above
// (higher-order terms). Candidate slabs [a, 1.6a] are screened for
// consistency with the near-interface asymptotics, whose slope and
// xi-intercept are tied by slope = 2/((m+1)|A|); among consistent slabs the
// one with the smallest relative fit residual wins.
std::pair<double, double> default_fit_window(const ShotRecord& record) {
  const auto leg = returning_leg(record);
  double u_max = 0.0;
  for (const auto& [xi, u] : leg) u_max = std::max(u_max, u);
  const double m = record.params.m;
  const double a_lo = 1e-3 * u_max, a_hi = 0.5 * u_max;
  constexpr int n_cand = 48;
  constexpr double ratio = 1.6;
  double best_score = 1e300;
  std::pair<double, double> best{0.15 * 0.2 / (m + 1.0), 0.2 / (m + 1.0)};
  for (int k = 0; k < n_cand; ++k) {
    const double a = a_lo * std::pow(a_hi / a_lo, k / static_cast<double>(n_cand - 1));
    std::vector<std::pair<double, double>> pts;
    double xi_min = 1e300;
    for (const auto& q : leg)
      if (q.second >= a && q.second <= ratio * a) {
        pts.push_back(q);
        xi_min = std::min(xi_min, q.first);
      }
    if (pts.size() < 8) continue;
    const LineFit f = fit_line(pts);
    if (!(f.slope > 0.0)) continue;
    const double A_fit = -f.intercept_u / f.slope;
    if (!(A_fit < xi_min)) continue;
    if (std::abs(f.slope * (m + 1.0) * std::abs(A_fit) / 2.0 - 1.0) > 0.35) continue;
    const double score = f.rms / (a * (ratio - 1.0));
    if (score < best_score) {
      best_score = score;
      best = {a, ratio * a};
    }
  }
  return best;
}

double extrapolate_A_minus(const ShotRecord& record, double u_lo, double u_hi) {
  if (!(u_lo > 0.0 && u_hi > u_lo))
    throw std::invalid_argument("extrapolate_A_minus: need 0 < u_lo < u_hi");
  if (record.trajectory.empty())
    throw std::invalid_argument("extrapolate_A_minus: record has no stored trajectory");

  const auto leg = returning_leg(record);
  std::vector<std::pair<double, double>> pts;
  for (const auto& q : leg)
    if (q.second >= u_lo && q.second <= u_hi) pts.push_back(q);
  if (pts.size() < 8)
    throw std::runtime_error("extrapolate_A_minus: fewer than 8 samples in the fit window");

  const LineFit f = fit_line(pts);
  if (f.slope == 0.0) throw std::runtime_error("extrapolate_A_minus: degenerate fit");
  if (f.rms > 0.05 * (u_hi - u_lo))
    throw std::runtime_error("extrapolate_A_minus: fit residual exceeds 5% of window height");
  return -f.intercept_u / f.slope;
}

}  // namespace revint
