// Temporary bring-up driver; removed before release.
#include <chrono>
#include <cstdio>

#include "revint/solver.hpp"

using namespace revint;

int main() {
  ModelParams minus{3.0, Branch::Minus};
  ModelParams plus{3.0, Branch::Plus};
  ShootConfig cfg;

  auto t0 = std::chrono::steady_clock::now();
  for (double x0 : {0.60, 0.70, 0.7071067811865476, 0.75, 0.80, 0.82, 0.90}) {
    const ShotRecord rec = shoot_minus(minus, x0, cfg);
    std::printf("m=3 x0=%.10f -> %-18s xi=% .6e u=%.3e w=%.3e A=%.6f steps=%lld\n", x0,
                to_string(rec.termination.kind), rec.termination.state.xi,
                rec.termination.state.u, rec.termination.state.w, rec.termination.A,
                static_cast<long long>(rec.stats.steps_accepted));
  }
  auto t1 = std::chrono::steady_clock::now();
  std::printf("7 shots: %.1f ms\n",
              std::chrono::duration<double, std::milli>(t1 - t0).count());

  t0 = std::chrono::steady_clock::now();
  const FindResult fr = find_x0_star(minus, 0.71, 0.82, cfg);
  t1 = std::chrono::steady_clock::now();
  std::printf("find_x0_star: x0*=%.12f A-=%.6f (%s)  [%.1f ms]\n", fr.x0_star, fr.A_minus,
              fr.a_method.c_str(), std::chrono::duration<double, std::milli>(t1 - t0).count());

  t0 = std::chrono::steady_clock::now();
  for (double A : {0.05, 0.154, 0.3, -0.1, 1e-4, -1e-4}) {
    const PlusShot s = shoot_plus(plus, A, cfg);
    std::printf("m=3 A+=%.4f -> x0=%.10f (steps=%lld, tau_end=%.3e)\n", A, s.x0_estimate,
                static_cast<long long>(s.record.stats.steps_accepted),
                s.record.termination.at_time);
  }
  t1 = std::chrono::steady_clock::now();
  std::printf("6 plus shots: %.1f ms\n",
              std::chrono::duration<double, std::milli>(t1 - t0).count());

  t0 = std::chrono::steady_clock::now();
  const auto [alo, ahi] = auto_bracket_plus(plus, fr.x0_star, cfg);
  const double A_plus = match_plus(plus, fr.x0_star, alo, ahi, cfg);
  t1 = std::chrono::steady_clock::now();
  std::printf("match_plus: A+=%.6f  [%.1f ms]\n", A_plus,
              std::chrono::duration<double, std::milli>(t1 - t0).count());
  return 0;
}
