#include "revint/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace revint {

namespace {

// Dormand-Prince RK5(4)7M coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// 4th-order weights for the embedded error estimate.
constexpr double e1 = 35.0 / 384.0 - 5179.0 / 57600.0;
constexpr double e3 = 500.0 / 1113.0 - 7571.0 / 16695.0;
constexpr double e4 = 125.0 / 192.0 - 393.0 / 640.0;
constexpr double e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
constexpr double e6 = 11.0 / 84.0 - 187.0 / 2100.0;
constexpr double e7 = -1.0 / 40.0;

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

struct StepWorkspace {
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp;
  explicit StepWorkspace(int n)
      : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n) {}
};

// Stages k2..k7 of a DOPRI5 step, with k1 supplied (FSAL). Fills y_high and
// err; k7 is the rhs at (t+h, y_high). Returns false on a non-finite stage.
bool dopri5_stages(const OdeProblem& p, double t, std::span<const double> y, double h,
                   StepWorkspace& w, std::span<double> y_high, std::span<double> err,
                   IntegrationStats& stats) {
  const int n = p.dimension;
  auto& k1 = w.k1;
  auto& ytmp = w.ytmp;

  for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
  if (!all_finite(ytmp)) return false;
  p.rhs(t + c2 * h, ytmp, w.k2);
  for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * w.k2[i]);
  if (!all_finite(ytmp)) return false;
  p.rhs(t + c3 * h, ytmp, w.k3);
  for (int i = 0; i < n; ++i)
    ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
  if (!all_finite(ytmp)) return false;
  p.rhs(t + c4 * h, ytmp, w.k4);
  for (int i = 0; i < n; ++i)
    ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * w.k2[i] + a53 * w.k3[i] + a54 * w.k4[i]);
  if (!all_finite(ytmp)) return false;
  p.rhs(t + c5 * h, ytmp, w.k5);
  for (int i = 0; i < n; ++i)
    ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * w.k2[i] + a63 * w.k3[i] + a64 * w.k4[i] +
                          a65 * w.k5[i]);
  if (!all_finite(ytmp)) return false;
  p.rhs(t + h, ytmp, w.k6);
  for (int i = 0; i < n; ++i)
    y_high[i] = y[i] + h * (b1 * k1[i] + b3 * w.k3[i] + b4 * w.k4[i] + b5 * w.k5[i] +
                            b6 * w.k6[i]);
  if (!all_finite(y_high)) return false;
  p.rhs(t + h, y_high, w.k7);
  stats.rhs_evals += 6;
  if (!all_finite(w.k7)) return false;
  for (int i = 0; i < n; ++i)
    err[i] = h * (e1 * k1[i] + e3 * w.k3[i] + e4 * w.k4[i] + e5 * w.k5[i] + e6 * w.k6[i] +
                  e7 * w.k7[i]);
  return true;
}

// Cubic Hermite interpolant on [t0, t0+h] from endpoint values and slopes.
void hermite_eval(std::span<const double> y0, std::span<const double> f0,
                  std::span<const double> y1, std::span<const double> f1, double h,
                  double theta, std::span<double> out) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

double error_norm(std::span<const double> err, std::span<const double> y0,
                  std::span<const double> y1, double atol, double rtol) {
  double s = 0.0;
  const size_t n = err.size();
  for (size_t i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(n));
}

bool sign_change(double g_prev, double g_new, EventDirection dir) {
  if (!std::isfinite(g_prev) || !std::isfinite(g_new)) return false;
  const bool down = g_prev > 0.0 && g_new <= 0.0;
  const bool up = g_prev < 0.0 && g_new >= 0.0;
  switch (dir) {
    case EventDirection::Decreasing: return down;
    case EventDirection::Increasing: return up;
    case EventDirection::Any: return down || up;
  }
  return false;
}

}  // namespace

bool step_embedded(const OdeProblem& problem, double t, std::span<const double> y, double h,
                   std::span<double> y_high, std::span<double> err) {
  if (h == 0.0) throw std::invalid_argument("step_embedded: h must be nonzero");
  if (!all_finite(y)) return false;
  const int n = problem.dimension;
  StepWorkspace w(n);
  IntegrationStats stats;
  problem.rhs(t, y, w.k1);
  if (!all_finite(w.k1)) return false;
  return dopri5_stages(problem, t, y, h, w, y_high, err, stats);
}

IntegrationOutcome integrate(const OdeProblem& problem, std::span<const double> y0, double t0,
                             double t_end, const IntegrationConfig& config,
                             std::span<const EventSpec> events, bool store_samples) {
  const int n = problem.dimension;
  if (static_cast<int>(y0.size()) != n)
    throw std::invalid_argument("integrate: state size does not match problem dimension");
  const double sgn = problem.direction == Direction::Forward ? 1.0 : -1.0;
  if (std::isfinite(t_end) && (t_end - t0) * sgn <= 0.0)
    throw std::invalid_argument("integrate: t_end is not ahead of t0 in integration direction");
  if (!std::isfinite(t_end) && t_end * sgn < 0.0)
    throw std::invalid_argument("integrate: infinite t_end opposes integration direction");

  IntegrationOutcome out;
  out.y_final.assign(y0.begin(), y0.end());
  out.t_final = t0;
  if (!all_finite(y0)) {
    out.status = IntegrationStatus::NonFinite;
    return out;
  }

  StepWorkspace w(n);
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> y_new(n), err(n), y_probe(n);
  std::vector<double> g_prev(events.size()), g_new(events.size());
  double t = t0;

  problem.rhs(t, y, w.k1);
  out.stats.rhs_evals += 1;
  if (!all_finite(w.k1)) {
    out.status = IntegrationStatus::NonFinite;
    return out;
  }
  for (size_t j = 0; j < events.size(); ++j) g_prev[j] = events[j].g(t, y);

  if (store_samples) {
    out.sample_times.push_back(t);
    out.samples.push_back(y);
  }

  double h = sgn * std::clamp(std::abs(config.h_init), config.h_min, config.h_max);
  double err_prev = 1.0;
  bool have_err_prev = false;

  auto step_floor = [&](double at) {
    return std::max(config.h_min, std::abs(at) * 4.0 * std::numeric_limits<double>::epsilon());
  };

  while (true) {
    if (out.stats.steps_accepted + out.stats.steps_rejected >= config.max_steps) {
      out.status = IntegrationStatus::MaxSteps;
      out.t_final = t;
      out.y_final = y;
      return out;
    }

    bool last_step = false;
    if (std::isfinite(t_end)) {
      const double remaining = t_end - t;
      if (std::abs(h) >= std::abs(remaining)) {
        h = remaining;
        last_step = true;
      }
    }

    const bool stages_ok = dopri5_stages(problem, t, y, h, w, y_new, err, out.stats);
    double enorm = std::numeric_limits<double>::infinity();
    if (stages_ok) enorm = error_norm(err, y, y_new, config.atol, config.rtol);

    if (!(enorm <= 1.0)) {
      // Rejected trial; shrink. A persistent non-finite trial means the
      // solution itself is blowing up.
      out.stats.steps_rejected += 1;
      const double floor_h = step_floor(t);
      double shrink = stages_ok ? std::max(0.2, 0.9 * std::pow(enorm, -0.2)) : 0.25;
      h *= shrink;
      last_step = false;
      if (std::abs(h) < floor_h) {
        out.status = stages_ok ? IntegrationStatus::StepFloor : IntegrationStatus::NonFinite;
        out.t_final = t;
        out.y_final = y;
        return out;
      }
      continue;
    }

    const double t_new = t + h;
    out.stats.steps_accepted += 1;

    // Event scan across the accepted step.
    int best_event = -1;
    double best_t = 0.0;
    std::vector<EventHitInfo> step_hits;
    for (size_t j = 0; j < events.size(); ++j) {
      g_new[j] = events[j].g(t_new, y_new);
      if (!sign_change(g_prev[j], g_new[j], events[j].direction)) continue;

      // Bisection on the dense output until the bracket is tight.
      double lo = 0.0, hi = 1.0;
      double g_lo = g_prev[j];
      const double tol = config.event_tol;
      for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(hi - lo) * std::abs(h) <= tol * std::max(1.0, std::abs(t))) break;
        const double mid = 0.5 * (lo + hi);
        hermite_eval(y, w.k1, y_new, w.k7, h, mid, y_probe);
        const double g_mid = events[j].g(t + mid * h, y_probe);
        const bool crossed =
            (g_lo > 0.0 && g_mid <= 0.0) || (g_lo < 0.0 && g_mid >= 0.0);
        if (crossed) {
          hi = mid;
        } else {
          lo = mid;
          g_lo = g_mid;
        }
      }
      const double theta_star = hi;
      const double t_star = t + theta_star * h;
      if (events[j].terminal) {
        if (best_event < 0 || std::abs(t_star - t) < std::abs(best_t - t)) {
          best_event = static_cast<int>(j);
          best_t = t_star;
        }
      } else {
        EventHitInfo hit;
        hit.label = events[j].label;
        hit.t = t_star;
        hermite_eval(y, w.k1, y_new, w.k7, h, theta_star, y_probe);
        hit.y = y_probe;
        step_hits.push_back(std::move(hit));
      }
    }

    for (auto& hit : step_hits) {
      if (best_event >= 0 && std::abs(hit.t - t) > std::abs(best_t - t)) continue;
      out.nonterminal_hits.push_back(std::move(hit));
    }

    if (best_event >= 0) {
      const double theta = (best_t - t) / h;
      hermite_eval(y, w.k1, y_new, w.k7, h, theta, y_probe);
      out.status = IntegrationStatus::EventHit;
      out.event_label = events[best_event].label;
      out.t_final = best_t;
      out.y_final = y_probe;
      if (store_samples) {
        out.sample_times.push_back(best_t);
        out.samples.push_back(y_probe);
      }
      return out;
    }

    t = t_new;
    y.swap(y_new);
    w.k1.swap(w.k7);  // FSAL
    g_prev.swap(g_new);
    if (store_samples) {
      out.sample_times.push_back(t);
      out.samples.push_back(y);
    }

    if (last_step) {
      out.status = IntegrationStatus::ReachedTEnd;
      out.t_final = t;
      out.y_final = y;
      return out;
    }

    // PI controller (safety 0.9, growth clamped to [0.2, 5]).
    const double e_now = std::max(enorm, 1e-16);
    double factor = 0.9 * std::pow(e_now, -0.17);
    if (have_err_prev) factor *= std::pow(err_prev, 0.04);
    factor = std::clamp(factor, 0.2, 5.0);
    err_prev = e_now;
    have_err_prev = true;
    h *= factor;
    if (std::abs(h) > config.h_max) h = sgn * config.h_max;
    const double floor_h = step_floor(t);
    if (std::abs(h) < floor_h) h = sgn * floor_h;
  }
}

}  // namespace revint
