// Temporary bring-up probe; removed before release.
#include <cstdio>

#include "revint/shooting.hpp"

using namespace revint;

int main() {
  ModelParams plus{3.0, Branch::Plus};
  ShootConfig cfg;
  cfg.store_trajectory = true;

  for (double A : {1e-4, 1e-3, 1e-2, 0.05}) {
    const PlusShot s = shoot_plus(plus, A, cfg);
    const auto& rec = s.record;
    std::printf("A+=%.5f eps_used=%.3e -> %s x0=%.8f steps=%lld\n", A, rec.eps_used,
                to_string(rec.termination.kind), s.x0_estimate,
                (long long)rec.stats.steps_accepted);
    // far-leg samples: (s, x, y, z) around the readout window
    const size_t n = rec.far_trace.size();
    std::printf("  far samples: %zu\n", n);
    for (size_t i = 0; i < n; i += n / 15 + 1) {
      const auto& f = rec.far_trace[i];
      std::printf("    clk=%.5e x=%.8f y=%.5e z=%.5e\n", rec.far_clock[i], f.x, f.y, f.z);
    }
    if (n) {
      const auto& f = rec.far_trace.back();
      std::printf("    last x=%.8f y=%.5e z=%.5e\n", f.x, f.y, f.z);
    }
  }
  return 0;
}
