#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "avgbound/averaging/a0.hpp"
#include "avgbound/averaging/periodic_system.hpp"
#include "avgbound/numerics/ode.hpp"
#include "avgbound/numerics/sampled_curve.hpp"

namespace avgbound::averaging {

/// alpha(tau, r) = a0(tau) + a(r) r + eps b(r). Throws DomainError unless
/// 0 <= r < rho(tau) componentwise.
Vector alpha_eval(const A0Table& a0, const PeriodicSystem& system, double eps, double tau, const Vector& r);

/// gamma(r, l) = c(r) + d(r) l + (1/2) e(r)(l, l).
Vector gamma_eval(const PeriodicSystem& system, double tau, const Vector& r, const Vector& ell);
Vector gamma_eval(const BoundValues& bv, const Vector& ell);

/// Throws DomainError unless 0 <= r^i < rho^i(tau) for every i.
void check_cap(const PeriodicSystem& system, double tau, const Vector& r);

struct SigmaBox {
  Vector center;      // l_*
  Vector half_width;  // sigma
};

/// l_* = a0(0) + eps b(0); sigma = l_* shrunk by 1e-9 relative (the box
/// reaches down to 0+), clipped so that l_* + sigma <= 0.99 rho(0)/eps.
SigmaBox default_sigma_box(const PeriodicSystem& system, const A0Table& a0, double eps);

struct FixedPointOptions {
  double tol = 1e-13;
  std::size_t max_iter = 200;
  std::size_t samples_per_axis = 9;
  double inflation = 1.05;
};

struct FixedPointReport {
  Vector ell0;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||alpha(0, eps l0) - l0||_inf
  bool converged = false;
  std::vector<double> step_norms;  // ||l_n - l_{n-1}||_inf, n = 2, 3, ...

  SigmaBox sigma;
  Matrix A;                  // sampled sup of |d alpha^i/d r^j| over the box, inflated
  double contraction = 0.0;  // eps * max_i sum_j A^i_j
  Vector self_map_slack;     // sigma^i - |alpha^i(0, eps l_*) - l_*^i| - eps sum_j A^i_j sigma^j

  bool box_inside_caps = false;
  bool contraction_ok = false;
  bool self_map_ok = false;
  bool ell0_in_box = false;

  bool hypotheses_ok() const noexcept { return box_inside_caps && contraction_ok && self_map_ok && ell0_in_box; }
};

/// Contraction iteration l_n = alpha(0, eps l_{n-1}) from l_1 = a0(0), and
/// machine checks of the box hypotheses. Throws ConvergenceError when the
/// tolerance is not reached in max_iter iterations; hypothesis failures are
/// only flagged.
FixedPointReport fixed_point(const PeriodicSystem& system, const A0Table& a0, double eps, const SigmaBox& box,
                             const FixedPointOptions& options = {});

enum class InverseMode { approx, exact };

InverseMode parse_inverse_mode(std::string_view name);
std::string_view to_string(InverseMode mode);

struct EstimatorOptions {
  numerics::IntegratorConfig integrator{1e-8, 1e-8};
  InverseMode inverse = InverseMode::approx;
  std::size_t samples = 512;
};

struct EstimatorCurves {
  double eps = 0.0;
  double horizon = 0.0;
  Vector ell0;
  /// (m, n) stacked; dense over [0, reached].
  numerics::SampledCurve state;
  std::vector<double> sample_tau;
  std::vector<Vector> sample_m;
  std::vector<Vector> sample_n;

  bool completed = false;
  double reached = 0.0;  // last tau covered
  std::string failure;   // guard message or integrator error

  Vector min_cap_margin;  // min over steps of rho^i - eps n^i (inf for unbounded caps)
  double min_determinant = 0.0;
  std::size_t steps = 0;

  Vector n(double tau) const;
  Vector m(double tau) const;
};

/// Integrates the (m, n) system of the estimator with its domain guard.
/// A guard violation or integrator failure is recorded in the result
/// (completed == false, failure, reached) rather than thrown.
EstimatorCurves estimator_ode(const PeriodicSystem& system, const A0Table& a0, double eps, const Vector& ell0,
                              const EstimatorOptions& options = {});

}  // namespace avgbound::averaging
