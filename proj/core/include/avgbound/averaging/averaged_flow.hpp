#pragma once

#include <memory>

#include "avgbound/averaging/periodic_system.hpp"
#include "avgbound/numerics/ode.hpp"
#include "avgbound/numerics/sampled_curve.hpp"

namespace avgbound::averaging {

/// Solves dJ/dtau = fbar(J), J(0) = I0 on [0, U]. Throws DomainError when the
/// averaged solution leaves the system's domain before U.
numerics::SampledCurve averaged_solution(const PeriodicSystem& system, const Vector& I0, double U,
                                         const numerics::IntegratorConfig& cfg);

/// Solves dR/dtau = (dfbar/dI)(J) R, R(0) = 1. Components are R stored column-major.
numerics::SampledCurve fundamental_matrices(const PeriodicSystem& system, const numerics::SampledCurve& J,
                                            double U, const numerics::IntegratorConfig& cfg);

/// Solves dK/dtau = (dfbar/dI)(J) K + pbar(J), K(0) = 0.
numerics::SampledCurve particular_K(const PeriodicSystem& system, const numerics::SampledCurve& J, double U,
                                    const numerics::IntegratorConfig& cfg);

/// Reshapes a column-major sample of a d x d matrix curve.
Matrix matrix_at(const numerics::SampledCurve& curve, double tau, std::size_t d);

/// J, R, R^{-1}, K along the averaged solution, from the system's closed
/// forms when it supplies them, otherwise from the three Cauchy problems.
class AveragedFlow {
 public:
  static AveragedFlow build(std::shared_ptr<const PeriodicSystem> system, const Vector& I0, double U,
                            const numerics::IntegratorConfig& cfg, bool prefer_closed_form = true);

  Vector J(double tau) const;
  Matrix R(double tau) const;
  /// Throws DomainError when |det R| < 1e-12.
  Matrix R_inverse(double tau) const;
  Vector K(double tau) const;
  double horizon() const noexcept { return U_; }
  const Vector& initial() const noexcept { return I0_; }
  bool closed_form() const noexcept { return closed_; }

 private:
  AveragedFlow() = default;
  void check(double tau) const;

  std::shared_ptr<const PeriodicSystem> system_;
  Vector I0_;
  double U_ = 0.0;
  bool closed_ = false;
  numerics::SampledCurve J_, R_, K_;
};

}  // namespace avgbound::averaging
