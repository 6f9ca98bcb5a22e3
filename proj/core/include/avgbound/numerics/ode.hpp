#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avgbound/numerics/linalg.hpp"
#include "avgbound/numerics/sampled_curve.hpp"

namespace avgbound::numerics {

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects the step automatically
  std::size_t max_steps = 50'000'000;
  double max_step = std::numeric_limits<double>::infinity();
  bool dense_output = true;

  /// Throws DomainError unless tolerances and the step budget are positive.
  void validate() const;
};

/// dy/dt written into the third argument (already sized).
using OdeField = std::function<void(double t, const Vector& y, Vector& dydt)>;

/// Returns a description of the violated condition, or nothing when (t, y) is admissible.
using DomainGuard = std::function<std::optional<std::string>(double t, const Vector& y)>;

/// Called at the initial point and at the end of every accepted step.
using StepObserver = std::function<void(double t, const Vector& y)>;

struct IvpOptions {
  DomainGuard guard;
  StepObserver observer;
  /// When nonempty, the returned curve holds exactly these abscissae (sorted,
  /// within the span) filled from the continuous extension, and no step nodes.
  std::vector<double> output_times;
};

enum class StopReason { completed, guard };

struct IvpStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

struct IvpResult {
  SampledCurve curve;
  StopReason stop = StopReason::completed;
  /// End of the span when completed; otherwise the located first failing time.
  double stop_time = 0.0;
  std::string guard_message;
  IvpStats stats;

  bool completed() const noexcept { return stop == StopReason::completed; }
};

/// Dormand-Prince 5(4) with proportional step control and continuous extension.
///
/// Throws IntegrationError when the step budget is exhausted or the field stays
/// non-finite under step reduction. A guard violation is not an error here: the
/// trajectory up to the last admissible step is returned with stop == guard.
IvpResult integrate_ivp(const OdeField& field, const Vector& y0, double t0, double t1,
                        const IntegratorConfig& cfg, const IvpOptions& options = {});

}  // namespace avgbound::numerics
