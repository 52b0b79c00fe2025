// Temporary bring-up probe; removed before release.
#include <cstdio>

#include "revint/solver.hpp"

using namespace revint;

int main() {
  ModelParams minus{2.0, Branch::Minus};
  ShootConfig cfg;
  cfg.store_trajectory = true;

  // limiting shots just either side of the refined root
  for (double x0 : {0.3380939701 - 1e-11, 0.3380939701 + 1e-11}) {
    const ShotRecord rec = shoot_minus(minus, x0, cfg);
    std::printf("x0=%.11f -> %s (term xi=%.5f u=%.4e w=%.4e)\n", x0,
                to_string(rec.termination.kind), rec.termination.state.xi,
                rec.termination.state.u, rec.termination.state.w);
    // walk the low-u tail of the near trajectory
    size_t i_max = 0;
    for (size_t i = 1; i < rec.trajectory.size(); ++i)
      if (rec.trajectory[i].u > rec.trajectory[i_max].u) i_max = i;
    int printed = 0;
    for (size_t i = i_max; i < rec.trajectory.size(); ++i) {
      const auto& s = rec.trajectory[i];
      if (s.u < 0.35 && printed < 40 && i % 2 == 0) {
        std::printf("   xi=% .6f u=%.6f w=% .6e\n", s.xi, s.u, s.w);
        ++printed;
      }
    }
  }
  return 0;
}
