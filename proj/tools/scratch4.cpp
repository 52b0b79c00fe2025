// Temporary bring-up probe; removed before release.
#include <chrono>
#include <cstdio>

#include "revint/solver.hpp"

using namespace revint;

static double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

int main(int argc, char** argv) {
  ShootConfig cfg;
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;

  if (which == 0 || which == 4) {
    ModelParams minus{4.0, Branch::Minus};
    ModelParams plus{4.0, Branch::Plus};
    auto t0 = std::chrono::steady_clock::now();
    const FindResult fr = find_x0_star(minus, 1.0, 1.3, cfg);
    std::printf("m=4 find: x0*=%.10f A-=%.6f (%s) [%.0f ms]\n", fr.x0_star, fr.A_minus,
                fr.a_method.c_str(), ms_since(t0));
    t0 = std::chrono::steady_clock::now();
    const auto [alo, ahi] = auto_bracket_plus(plus, fr.x0_star, cfg);
    const double ap = match_plus(plus, fr.x0_star, alo, ahi, cfg);
    std::printf("m=4 match: A+=%.6f [%.0f ms]\n", ap, ms_since(t0));
  }

  if (which == 0 || which == 5) {
    ModelParams minus{5.0, Branch::Minus};
    auto t0 = std::chrono::steady_clock::now();
    const FindResult fr = find_x0_star(minus, 1.45, 1.85, cfg);
    std::printf("m=5 find: x0*=%.10f A-=%.6f (%s) [%.0f ms]\n", fr.x0_star, fr.A_minus,
                fr.a_method.c_str(), ms_since(t0));
  }

  if (which == 0 || which == 2) {
    ModelParams minus{2.0, Branch::Minus};
    ModelParams plus{2.0, Branch::Plus};
    // coarse picture first
    auto t0 = std::chrono::steady_clock::now();
    for (double x0 :
         {0.03, 0.05, 0.0592, 0.08, 0.1, 0.137, 0.2, 0.3, 0.338, 0.4, 0.6, 0.8165, 0.9}) {
      const ShotRecord rec = shoot_minus(minus, x0, cfg);
      std::printf("m=2 x0=%.4f -> %-17s xi=% .5e u=%.3e w=%.3e steps=%lld\n", x0,
                  to_string(rec.termination.kind), rec.termination.state.xi,
                  rec.termination.state.u, rec.termination.state.w,
                  (long long)rec.stats.steps_accepted);
    }
    std::printf("m=2 scan: %.0f ms\n", ms_since(t0));
    for (auto [lo, hi] : {std::pair{0.30, 0.37}, {0.12, 0.15}, {0.05, 0.07}}) {
      t0 = std::chrono::steady_clock::now();
      try {
        const FindResult fr = find_x0_star(minus, lo, hi, cfg);
        std::printf("m=2 find [%.2f,%.2f]: x0*=%.10f A-=%.6f (%s) [%.0f ms]\n", lo, hi,
                    fr.x0_star, fr.A_minus, fr.a_method.c_str(), ms_since(t0));
        auto t1 = std::chrono::steady_clock::now();
        const auto [alo, ahi] = auto_bracket_plus(plus, fr.x0_star, cfg);
        const double ap = match_plus(plus, fr.x0_star, alo, ahi, cfg);
        std::printf("m=2 match: A+=%.6f [%.0f ms]\n", ap, ms_since(t1));
      } catch (const std::exception& e) {
        std::printf("m=2 find [%.2f,%.2f]: FAILED: %s\n", lo, hi, e.what());
      }
    }
  }
  return 0;
}
