// Temporary bring-up probe; removed before release.
#include <algorithm>
#include <cstdio>
#include <vector>

#include "revint/solver.hpp"

using namespace revint;

// Interpolate u at a given xi from a record's near-frame trajectory.
static double u_at_xi(const ShotRecord& rec, double xi_q) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : rec.trajectory) pts.emplace_back(s.xi, s.u);
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].first <= xi_q && xi_q <= pts[i + 1].first) {
      const double t = (xi_q - pts[i].first) / (pts[i + 1].first - pts[i].first);
      return pts[i].second + t * (pts[i + 1].second - pts[i].second);
    }
  }
  return -1.0;
}

int main(int argc, char** argv) {
  const double m = argc > 1 ? std::atof(argv[1]) : 4.0;
  ShootConfig cfg;
  cfg.store_trajectory = true;

  ModelParams minus{m, Branch::Minus};
  ModelParams plus{m, Branch::Plus};
  double blo = 1.0, bhi = 1.3;
  if (m == 3.0) { blo = 0.71; bhi = 0.82; }
  const FindResult fr = find_x0_star(minus, blo, bhi, cfg);
  std::printf("m=%g: x0*=%.10f A-=%.6f (%s)\n", m, fr.x0_star, fr.A_minus,
              fr.a_method.c_str());

  const ShotRecord& mrec = fr.rec_lo;
  std::vector<double> cands;
  if (m == 4.0) cands = {0.70, 0.794, 0.85, 0.9079, 0.95};
  else cands = {0.10, 0.154, 0.1546, 0.20};

  for (double ap : cands) {
    const PlusShot ps = shoot_plus(plus, ap, cfg);
    std::printf("A+=%.4f -> x0_est=%.8f | ratio H+/H- at xi: ", ap, ps.x0_estimate);
    for (double xiq : {50.0, 200.0, 1000.0, 5000.0}) {
      const double um = u_at_xi(mrec, xiq);
      const double up = u_at_xi(ps.record, xiq);
      if (um > 0 && up > 0)
        std::printf("%g:%.5f ", xiq, up / um);
      else
        std::printf("%g:n/a ", xiq);
    }
    std::printf("\n");
  }
  return 0;
}
