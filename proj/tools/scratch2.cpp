// Temporary bring-up probe; removed before release.
#include <cstdio>

#include "revint/shooting.hpp"

using namespace revint;

int main() {
  ModelParams minus{3.0, Branch::Minus};
  ShootConfig cfg;
  cfg.integ.max_steps = 400000;
  cfg.store_trajectory = true;

  for (double x0 : {0.7666, 0.766611, 0.7667}) {
    const ShotRecord rec = shoot_minus(minus, x0, cfg);
    std::printf("x0=%.6f -> %s at shot-clock %.3e steps=%lld\n", x0,
                to_string(rec.termination.kind), rec.termination.at_time,
                static_cast<long long>(rec.stats.steps_accepted));
    std::printf("  term state: xi=% .6e u=%.3e w=% .3e\n", rec.termination.state.xi,
                rec.termination.state.u, rec.termination.state.w);
    // minimum of max(u,|w|) along the near trajectory and clock milestones
    double best = 1e300, best_clk = 0, best_xi = 0;
    size_t n = rec.trajectory.size();
    for (size_t i = 0; i < n; ++i) {
      const auto& s = rec.trajectory[i];
      const double q = std::max(s.u, std::abs(s.w));
      if (q < best) { best = q; best_clk = rec.near_clock[i]; best_xi = s.xi; }
    }
    std::printf("  min max(u,|w|)=%.3e at clock %.3e (xi=%.6f), %zu samples\n", best,
                best_clk, best_xi, n);
    for (size_t i = 0; i < n; i += n / 12 + 1) {
      const auto& s = rec.trajectory[i];
      std::printf("    clk=%.4e xi=% .5e u=%.4e w=% .4e\n", rec.near_clock[i], s.xi, s.u,
                  s.w);
    }
  }
  return 0;
}
