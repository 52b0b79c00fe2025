#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace revint {

enum class Direction { Forward, Backward };

using RhsFn = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeProblem {
  int dimension = 0;
  RhsFn rhs;
  Direction direction = Direction::Forward;
};

struct IntegrationConfig {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 1e-4;
  double h_min = 1e-14;
  double h_max = 1e30;
  std::int64_t max_steps = 2'000'000;
  double event_tol = 1e-12;
};

enum class EventDirection { Any, Decreasing, Increasing };

using EventFn = std::function<double(double t, std::span<const double> y)>;

struct EventSpec {
  EventFn g;
  EventDirection direction = EventDirection::Any;
  bool terminal = true;
  std::string label;
};

enum class IntegrationStatus { EventHit, MaxSteps, StepFloor, NonFinite, ReachedTEnd };

struct IntegrationStats {
  std::int64_t steps_accepted = 0;
  std::int64_t steps_rejected = 0;
  std::int64_t rhs_evals = 0;
};

struct EventHitInfo {
  std::string label;
  double t = 0.0;
  std::vector<double> y;
};

struct IntegrationOutcome {
  IntegrationStatus status = IntegrationStatus::ReachedTEnd;
  double t_final = 0.0;
  std::vector<double> y_final;
  std::string event_label;  // terminal event label when status == EventHit
  std::vector<EventHitInfo> nonterminal_hits;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;
  IntegrationStats stats;
};

/// One embedded Dormand-Prince 5(4) step from (t, y) with signed step h.
/// Writes the 5th-order advance into y_high and the componentwise embedded
/// 4th/5th difference into err. Returns false if any stage is non-finite.
bool step_embedded(const OdeProblem& problem, double t, std::span<const double> y, double h,
                   std::span<double> y_high, std::span<double> err);

/// Adaptive integration with PI step control and event detection.
///
/// Terminal event crossings are refined by bisection on the cubic-Hermite
/// dense output of the accepted step until the bracket width falls below
/// event_tol (scaled by |t| once |t| > 1). t_end may be +/-infinity, in which
/// case a terminal event or the step budget must end the run.
IntegrationOutcome integrate(const OdeProblem& problem, std::span<const double> y0, double t0,
                             double t_end, const IntegrationConfig& config,
                             std::span<const EventSpec> events, bool store_samples = true);

}  // namespace revint
