#pragma once

#include <cstddef>
#include <vector>

#include "avgbound/averaging/averaged_flow.hpp"
#include "avgbound/averaging/periodic_system.hpp"
#include "avgbound/numerics/interpolation.hpp"

namespace avgbound::averaging {

struct A0Options {
  std::size_t Q = 30;   // angle grid
  std::size_t N = 100;  // tau cells; nodes are U n / N, n = 0..N
  numerics::InterpMode mode = numerics::InterpMode::cubic;
  bool refine = false;  // golden-section refinement of each grid max
};

/// Interpolated upper bounds a0^i(tau) of |s(J(tau), theta) - R(tau) s(I0, 0) - K(tau)|^i.
class A0Table {
 public:
  A0Table(std::vector<double> nodes, std::vector<std::vector<double>> values, numerics::InterpMode mode);

  std::size_t dimension() const noexcept { return values_.size(); }
  double horizon() const noexcept { return nodes_.back(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  /// Tabulated values of component i.
  const std::vector<double>& values(std::size_t i) const { return values_.at(i); }
  numerics::InterpMode mode() const noexcept { return mode_; }

  Vector value(double tau) const;
  Vector derivative(double tau) const;

 private:
  std::vector<double> nodes_;
  std::vector<std::vector<double>> values_;
  numerics::InterpMode mode_;
  std::vector<numerics::Interpolant> interp_;
};

/// The grid-max-then-interpolate construction, with theta_0 = 0.
A0Table a0_build(const PeriodicSystem& system, const AveragedFlow& flow, const A0Options& options = {});

}  // namespace avgbound::averaging
