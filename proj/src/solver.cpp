#include "revint/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace revint {

namespace {

// Terminal landing closer to the equilibrium than this reads A off xi directly.
constexpr double kLandingTol = 1e-3;
constexpr double kBisectRelWidth = 1e-13;

std::optional<int> classification_sign(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::HitW0: return +1;
    case TerminationKind::HitU0: return -1;
    case TerminationKind::NearEquilibrium: return 0;
    default: return std::nullopt;
  }
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      const int lo = static_cast<int>(static_cast<long long>(n) * t / threads);
      const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> log_grid(double lo, double hi, int pts_per_decade) {
  const int n =
      std::max(2, static_cast<int>(std::ceil(pts_per_decade * std::log10(hi / lo))) + 1);
  std::vector<double> g(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / static_cast<double>(n - 1));
  return g;
}

struct ACandidate {
  int tier;  // 0 equilibrium, 1 terminal landing, 2 extrapolation
  double A;
  double landing;
};

std::optional<ACandidate> a_candidate(const ShotRecord& rec) {
  const Termination& t = rec.termination;
  if (t.kind == TerminationKind::NearEquilibrium)
    return ACandidate{0, t.A, std::max(t.state.u, std::abs(t.state.w))};
  if (t.kind != TerminationKind::HitU0 && t.kind != TerminationKind::HitW0)
    return std::nullopt;
  const double landing = std::max(t.state.u, std::abs(t.state.w));
  if (landing <= kLandingTol) return ACandidate{1, t.state.xi, landing};
  try {
    const auto [u_lo, u_hi] = default_fit_window(rec);
    return ACandidate{2, extrapolate_A_minus(rec, u_lo, u_hi), landing};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

const char* method_name(int tier) {
  switch (tier) {
    case 0: return "equilibrium";
    case 1: return "terminal";
    default: return "extrapolation";
  }
}

}  // namespace

double residual_minus(const ModelParams& params, double x0, const ShootConfig& cfg) {
  ShootConfig c = cfg;
  c.store_trajectory = false;
  const ShotRecord rec = shoot_minus(params, x0, c);
  switch (rec.termination.kind) {
    case TerminationKind::HitW0: return rec.termination.state.u;
    case TerminationKind::HitU0: return -rec.termination.state.w;
    case TerminationKind::NearEquilibrium: return 0.0;
    default:
      throw NonEvaluableShot("residual_minus: shot at x0 = " + std::to_string(x0) +
                             " ended " + to_string(rec.termination.kind));
  }
}

std::vector<ConnectionMapSample> trace_map_minus(const ModelParams& params,
                                                 std::span<const double> x0_grid,
                                                 const ShootConfig& cfg, int threads) {
  ShootConfig c = cfg;
  c.store_trajectory = false;
  std::vector<ConnectionMapSample> out(x0_grid.size());
  parallel_for(static_cast<int>(x0_grid.size()), threads, [&](int i) {
    const double x0 = x0_grid[i];
    ConnectionMapSample& s = out[i];
    s.x0 = x0;
    const ShotRecord rec = shoot_minus(params, x0, c);
    const Termination& t = rec.termination;
    s.kind = t.kind;
    s.xi_term = t.state.xi;
    if (t.kind == TerminationKind::HitW0) {
      s.evaluable = true;
      s.val_term = t.state.u;
    } else if (t.kind == TerminationKind::HitU0) {
      s.evaluable = true;
      s.val_term = t.state.w;
    } else if (t.kind == TerminationKind::NearEquilibrium) {
      s.evaluable = true;
      s.val_term = 0.0;
    }
  });
  return out;
}

FindResult find_x0_star(const ModelParams& params, double lo, double hi,
                        const ShootConfig& cfg) {
  if (!(0.0 < lo && lo < hi))
    throw std::invalid_argument("find_x0_star: need 0 < lo < hi");
  ShootConfig scan = cfg;
  scan.store_trajectory = false;
  ShootConfig full = cfg;
  full.store_trajectory = true;

  auto sign_at = [&](double x0) -> int {
    const ShotRecord rec = shoot_minus(params, x0, scan);
    const auto s = classification_sign(rec.termination.kind);
    if (!s)
      throw std::runtime_error("find_x0_star: residual non-evaluable at x0 = " +
                               std::to_string(x0) + " (" +
                               to_string(rec.termination.kind) + ")");
    return *s;
  };
  auto tol_at = [](double x) { return kBisectRelWidth * std::max(1.0, x); };

  int s_lo = sign_at(lo);
  int s_hi = sign_at(hi);
  if (s_lo == 0 || s_hi == 0)
    throw std::runtime_error("find_x0_star: a bracket endpoint already lands on the "
                             "equilibrium; shrink the bracket");
  if (s_lo == s_hi)
    throw std::runtime_error("find_x0_star: residual has the same sign at both ends of [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");

  // Plain sign bisection until either the bracket is tight or a midpoint
  // lands on the equilibrium (residual 0). Landings happen on a small but
  // finite x0 band around a connecting trajectory with A > 0; when one is
  // seen, both band edges are resolved and the band center is reported.
  double band = std::numeric_limits<double>::quiet_NaN();
  while ((hi - lo) > tol_at(0.5 * (lo + hi))) {
    const double mid = 0.5 * (lo + hi);
    const int s_mid = sign_at(mid);
    if (s_mid == 0) {
      band = mid;
      break;
    }
    if (s_mid == s_lo)
      lo = mid;
    else
      hi = mid;
  }

  if (std::isfinite(band)) {
    double a = lo, b = band;
    while ((b - a) > tol_at(b)) {
      const double mid = 0.5 * (a + b);
      if (sign_at(mid) == s_lo)
        a = mid;
      else
        b = mid;
    }
    double c = band, d = hi;
    while ((d - c) > tol_at(d)) {
      const double mid = 0.5 * (c + d);
      if (sign_at(mid) == s_hi)
        d = mid;
      else
        c = mid;
    }
    FindResult r;
    r.x0_star = 0.5 * (b + c);
    r.rec_lo = shoot_minus(params, r.x0_star, full);
    r.rec_hi = r.rec_lo;
    const Termination& t = r.rec_lo.termination;
    if (t.kind == TerminationKind::NearEquilibrium) {
      r.A_minus = t.A;
      r.a_method = "equilibrium";
      return r;
    }
    const auto cand = a_candidate(r.rec_lo);
    if (!cand)
      throw std::runtime_error("find_x0_star: could not recover A_minus at the band center");
    r.A_minus = cand->A;
    r.a_method = method_name(cand->tier);
    return r;
  }

  FindResult r;
  r.x0_star = 0.5 * (lo + hi);
  r.rec_lo = shoot_minus(params, lo, full);
  r.rec_hi = shoot_minus(params, hi, full);

  const auto c_lo = a_candidate(r.rec_lo);
  const auto c_hi = a_candidate(r.rec_hi);
  if (!c_lo && !c_hi)
    throw std::runtime_error("find_x0_star: could not recover A_minus from either limiting "
                             "trajectory at x0 = " +
                             std::to_string(r.x0_star));
  if (c_lo && c_hi) {
    if (c_lo->tier == 2 && c_hi->tier == 2) {
      r.A_minus = 0.5 * (c_lo->A + c_hi->A);
      r.a_method = "extrapolation";
    } else {
      const ACandidate& best =
          (c_lo->tier != c_hi->tier) ? (c_lo->tier < c_hi->tier ? *c_lo : *c_hi)
                                     : (c_lo->landing <= c_hi->landing ? *c_lo : *c_hi);
      r.A_minus = best.A;
      r.a_method = method_name(best.tier);
    }
  } else {
    const ACandidate& only = c_lo ? *c_lo : *c_hi;
    r.A_minus = only.A;
    r.a_method = method_name(only.tier);
  }
  return r;
}

std::pair<double, double> auto_bracket_plus(const ModelParams& params, double x0_target,
                                            const ShootConfig& cfg) {
  if (!(x0_target > 0.0))
    throw std::invalid_argument("auto_bracket_plus: target must be positive");
  ShootConfig c = cfg;
  c.store_trajectory = false;
  const double xq = params.x_q();
  if (x0_target == xq)
    throw std::runtime_error("auto_bracket_plus: target equals x_Q (stationary solution)");
  auto F = [&](double A) { return shoot_plus(params, A, c).x0_estimate; };

  if (x0_target > xq) {
    double a = 1e-4;
    while (F(a) >= x0_target) {
      a *= 0.1;
      if (a < 1e-12)
        throw std::runtime_error("auto_bracket_plus: could not bracket from below");
    }
    double b = 1.0;
    while (F(b) <= x0_target) {
      b *= 2.0;
      if (b > 1e6) throw std::runtime_error("auto_bracket_plus: could not bracket from above");
    }
    return {a, b};
  }
  double b = -1e-4;
  while (F(b) <= x0_target) {
    b *= 0.1;
    if (b > -1e-12)
      throw std::runtime_error("auto_bracket_plus: could not bracket from above");
  }
  double a = -1.0;
  while (F(a) >= x0_target) {
    a *= 2.0;
    if (a < -1e6) throw std::runtime_error("auto_bracket_plus: could not bracket from below");
  }
  return {a, b};
}

double match_plus(const ModelParams& params, double x0_target, double A_lo, double A_hi,
                  const ShootConfig& cfg) {
  if (!(A_lo < A_hi)) throw std::invalid_argument("match_plus: need A_lo < A_hi");
  if (A_lo <= 0.0 && A_hi >= 0.0)
    throw std::invalid_argument("match_plus: bracket must not contain A_plus = 0");
  const double xq = params.x_q();
  if (x0_target > xq && A_hi < 0.0)
    throw std::runtime_error("match_plus: target above x_Q requires a positive bracket");
  if (x0_target < xq && A_lo > 0.0)
    throw std::runtime_error("match_plus: target below x_Q requires a negative bracket");

  ShootConfig c = cfg;
  c.store_trajectory = false;
  auto F = [&](double A) {
    const PlusShot s = shoot_plus(params, A, c);
    if (s.record.termination.kind != TerminationKind::ReachedFarField)
      throw NonEvaluableShot("match_plus: forward shot at A = " + std::to_string(A) +
                             " ended " + to_string(s.record.termination.kind));
    return s.x0_estimate - x0_target;
  };

  double a = A_lo, b = A_hi;
  double fa = F(a), fb = F(b);
  constexpr double tol = 1e-8;
  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;
  if (fa > 0.0 || fb < 0.0)
    throw std::runtime_error("match_plus: x0 estimates at the bracket ends do not straddle "
                             "the target");

  double width_prev = b - a;
  for (int iter = 0; iter < 200; ++iter) {
    double cand = b - fb * (b - a) / (fb - fa);  // secant on the current bracket
    const double margin = 1e-3 * (b - a);
    if (!std::isfinite(cand) || cand <= a + margin || cand >= b - margin ||
        (iter % 3 == 2 && (b - a) > 0.5 * width_prev)) {
      cand = 0.5 * (a + b);
    }
    if (iter % 3 == 2) width_prev = b - a;
    const double fc = F(cand);
    if (std::abs(fc) <= tol) return cand;
    if (fc < 0.0) {
      a = cand;
      fa = fc;
    } else {
      b = cand;
      fb = fc;
    }
    if ((b - a) <= 1e-14 * std::max({1.0, std::abs(a), std::abs(b)})) {
      const double best = std::abs(fa) < std::abs(fb) ? a : b;
      if (std::min(std::abs(fa), std::abs(fb)) <= 10.0 * tol) return best;
      throw std::runtime_error("match_plus: bracket collapsed before reaching tolerance");
    }
  }
  throw std::runtime_error("match_plus: did not converge");
}

namespace {

std::vector<ProfilePoint> build_profile(std::vector<NearState> ascending, double A,
                                        double xi_cap, int n_points) {
  std::vector<ProfilePoint> prof;
  prof.push_back({A, 0.0});
  double last_xi = A, last_H = 0.0;
  for (const auto& s : ascending) {
    if (!(std::isfinite(s.xi) && std::isfinite(s.u))) continue;
    if (s.xi > xi_cap) break;
    if (s.xi <= last_xi || s.u <= last_H) continue;
    prof.push_back({s.xi, s.u});
    last_xi = s.xi;
    last_H = s.u;
  }
  if (static_cast<int>(prof.size()) > n_points) {
    std::vector<ProfilePoint> thin;
    thin.reserve(n_points);
    const double stride = static_cast<double>(prof.size() - 1) / (n_points - 1);
    for (int i = 0; i < n_points; ++i)
      thin.push_back(prof[static_cast<size_t>(std::llround(i * stride))]);
    prof = std::move(thin);
  }
  return prof;
}

struct MinusRoots {
  std::vector<FindResult> roots;
  std::vector<std::string> warnings;
};

MinusRoots find_minus_roots(const ModelParams& params, const SearchConfig& cfg,
                            std::span<const std::pair<double, double>> extra_brackets,
                            bool xq_patch) {
  ShootConfig scan = cfg.shoot;
  scan.store_trajectory = false;

  std::vector<double> grid = log_grid(cfg.x0_lo, cfg.x0_hi, cfg.pts_per_decade);
  if (xq_patch) {
    const double xq = params.x_q();
    const double plo = std::max(cfg.x0_lo, 0.92 * xq);
    const double phi = std::min(cfg.x0_hi, 1.08 * xq);
    const int n_patch = 600;
    for (int i = 0; i <= n_patch; ++i)
      grid.push_back(plo + (phi - plo) * i / static_cast<double>(n_patch));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }

  std::vector<std::optional<int>> signs(grid.size());
  parallel_for(static_cast<int>(grid.size()), cfg.threads, [&](int i) {
    const ShotRecord rec = shoot_minus(params, grid[i], scan);
    signs[i] = classification_sign(rec.termination.kind);
  });

  std::vector<std::pair<double, double>> brackets(extra_brackets.begin(),
                                                  extra_brackets.end());
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!signs[i] || !signs[i + 1]) continue;
    if (*signs[i] == 0) {
      brackets.emplace_back(grid[i], grid[i]);
      continue;
    }
    if (*signs[i] * *signs[i + 1] < 0) brackets.emplace_back(grid[i], grid[i + 1]);
  }

  MinusRoots out;
  const double xq = params.x_q();
  for (const auto& [blo, bhi] : brackets) {
    try {
      FindResult r = blo == bhi ? find_x0_star(params, blo * (1.0 - 1e-9), blo * (1.0 + 1e-9),
                                               cfg.shoot)
                                : find_x0_star(params, blo, bhi, cfg.shoot);
      if (std::abs(r.x0_star - xq) <= cfg.xq_dedupe_tol * std::max(1.0, xq)) continue;
      const bool dup = std::any_of(out.roots.begin(), out.roots.end(), [&](const FindResult& q) {
        return std::abs(q.x0_star - r.x0_star) <= 1e-8 * std::max(1.0, r.x0_star);
      });
      if (!dup) out.roots.push_back(std::move(r));
    } catch (const std::exception& e) {
      out.warnings.push_back(std::string("bracket [") + std::to_string(blo) + ", " +
                             std::to_string(bhi) + "]: " + e.what());
    }
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const FindResult& a, const FindResult& b) { return a.x0_star > b.x0_star; });
  return out;
}

}  // namespace

const char* to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::Reversing: return "reversing";
    case SolutionKind::AntiReversing: return "anti_reversing";
    case SolutionKind::Stationary: return "stationary";
  }
  return "unknown";
}

std::vector<SimilaritySolution> solve_pair(double m, const SearchConfig& cfg) {
  if (!(m > 1.0)) throw std::invalid_argument("solve_pair: requires m > 1");
  const ModelParams minus{m, Branch::Minus};
  const ModelParams plus{m, Branch::Plus};
  const double xq = minus.x_q();

  MinusRoots found = find_minus_roots(minus, cfg, {}, /*xq_patch=*/false);

  std::vector<SimilaritySolution> solutions;
  for (const FindResult& root : found.roots) {
    SimilaritySolution sol;
    sol.m = m;
    sol.x0_star = root.x0_star;
    sol.A_minus = root.A_minus;
    sol.a_minus_method = root.a_method;

    const auto [A_lo, A_hi] = auto_bracket_plus(plus, root.x0_star, cfg.shoot);
    sol.A_plus = match_plus(plus, root.x0_star, A_lo, A_hi, cfg.shoot);

    ShootConfig full = cfg.shoot;
    full.store_trajectory = true;
    const PlusShot plus_shot = shoot_plus(plus, sol.A_plus, full);

    // Profile of H-: prefer the limiting trajectory that lands closest to the
    // near-field equilibrium.
    const auto c_lo = a_candidate(root.rec_lo);
    const auto c_hi = a_candidate(root.rec_hi);
    const ShotRecord& minus_rec =
        (c_lo && (!c_hi || c_lo->landing <= c_hi->landing)) ? root.rec_lo : root.rec_hi;

    const double xi_cap = std::max({cfg.shoot.switch_xi, 1.5 * std::abs(sol.A_minus),
                                    1.5 * std::abs(sol.A_plus)});
    std::vector<NearState> minus_ascending(minus_rec.trajectory.rbegin(),
                                           minus_rec.trajectory.rend());
    sol.profile_minus =
        build_profile(std::move(minus_ascending), sol.A_minus, xi_cap, cfg.profile_points);
    sol.profile_plus = build_profile(plus_shot.record.trajectory, sol.A_plus, xi_cap,
                                     cfg.profile_points);

    const bool consistent = (sol.A_minus > 0.0 && sol.A_plus > 0.0 && sol.x0_star > xq) ||
                            (sol.A_minus < 0.0 && sol.A_plus < 0.0 && sol.x0_star < xq);
    sol.kind = sol.A_minus > 0.0 ? SolutionKind::Reversing : SolutionKind::AntiReversing;
    sol.rejected = !consistent;
    solutions.push_back(std::move(sol));
  }
  return solutions;
}

std::vector<BranchPoint> sweep_branches(double m_lo, double m_hi, double m_step,
                                        const SearchConfig& cfg) {
  if (!(m_lo > 1.0 && m_hi >= m_lo && m_step > 0.0))
    throw std::invalid_argument("sweep_branches: need 1 < m_lo <= m_hi and m_step > 0");

  std::vector<BranchPoint> points;
  std::vector<double> prev_roots;
  const int n_m = static_cast<int>(std::floor((m_hi - m_lo) / m_step + 1e-9)) + 1;
  for (int i = 0; i < n_m; ++i) {
    const double m = m_lo + i * m_step;
    const ModelParams minus{m, Branch::Minus};

    std::vector<std::pair<double, double>> seeds;
    for (double r : prev_roots) {
      const double a = std::max(cfg.x0_lo, r * 0.97);
      const double b = std::min(cfg.x0_hi, r * 1.03);
      if (a < b) seeds.emplace_back(a, b);
    }
    MinusRoots found = find_minus_roots(minus, cfg, seeds, /*xq_patch=*/true);

    points.push_back({m, minus.x_q(), 0.0, "A-zero"});
    prev_roots.clear();
    for (const FindResult& r : found.roots) {
      prev_roots.push_back(r.x0_star);
      points.push_back(
          {m, r.x0_star, r.A_minus, r.A_minus > 0.0 ? "A-positive" : "A-negative"});
    }
  }
  return points;
}

}  // namespace revint
