#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "avgbound/averaging/a0.hpp"
#include "avgbound/averaging/estimator.hpp"
#include "avgbound/j2/j2_system.hpp"
#include "avgbound/numerics/sampled_curve.hpp"

namespace avgbound::runner {

struct NTimings {
  double a0 = 0.0;
  double fixed_point = 0.0;
  double estimator = 0.0;
  double total = 0.0;  // wall-clock seconds of the whole N-operation
};

struct RunArtifacts {
  j2::J2Config config;
  std::shared_ptr<const j2::J2System> system;
  std::optional<averaging::A0Table> a0;
  averaging::FixedPointReport fixed_point;
  averaging::EstimatorCurves estimator;
  NTimings timings;

  /// True when the estimator reached U and every fixed-point hypothesis holds.
  bool verified() const noexcept { return estimator.completed && fixed_point.hypotheses_ok(); }
};

/// a0 tabulation, fixed point and estimator ODE. Numerical failures of the
/// estimator are recorded in the result; fixed-point non-convergence throws.
RunArtifacts run_n_operation(const j2::J2Config& config);

struct LOptions {
  double max_orbits = 10000.0;  // budget; larger horizons are refused
  std::size_t grid_points = 2048;
};

struct LOperation {
  double horizon = 0.0;               // in orbits
  numerics::SampledCurve grid;        // L on the comparison grid (continuous-extension values)
  std::vector<double> step_times;     // every accepted integrator step
  std::vector<Eigen::Vector3d> step_values;
  numerics::IvpStats stats;
  double seconds = 0.0;
};

/// Integrates dL/dt = f(J(eps t) + eps L, 2 pi t) - fbar(J(eps t)), L(0) = 0,
/// at the config's rk tolerances. Throws DomainError over budget.
LOperation run_l_operation(const j2::J2Config& config, const LOptions& options = {});

struct ComparisonReport {
  std::vector<double> t_orbits;                // common grid
  std::vector<Eigen::Vector3d> abs_L;          // |L^i(t)|
  std::vector<Eigen::Vector3d> envelope;       // n^i(eps t)
  std::array<bool, 3> dominance{};             // over the grid and every step point
  std::array<double, 3> max_ratio{};           // max |L^i| / n^i
  std::array<double, 3> max_ratio_time{};
  std::optional<double> first_violation;       // smallest t where some component fails
  std::size_t checked_points = 0;
  double slack = 0.0;

  bool all_dominated() const noexcept { return dominance[0] && dominance[1] && dominance[2]; }
};

/// Per-sample check |L^i(t)| <= (1 + slack) n^i(eps t). Throws DomainError
/// when the curves do not cover the same horizon or the estimator stopped early.
ComparisonReport compare(const averaging::EstimatorCurves& estimator, const LOperation& l, const j2::J2Config& config,
                         double slack = 0.0);

}  // namespace avgbound::runner
