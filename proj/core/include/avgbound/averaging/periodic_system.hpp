#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "avgbound/numerics/linalg.hpp"

namespace avgbound::averaging {

/// Majorant values at one point (tau, r) of the cap region.
struct BoundValues {
  Matrix a;               // a(i, j): coefficient of r^j in the linear part of alpha^i
  Vector b;
  Vector c;
  Matrix d;               // d(i, j)
  std::vector<Matrix> e;  // e[i](j, k), symmetric in (j, k)
};

/// Closed-form fundamental data of the averaged flow, when available.
struct FlowPoint {
  Vector J;
  Matrix R;
  Matrix R_inverse;
  Vector K;
};

/// One-frequency periodic system dI/dt = eps f(I, 2 pi t) together with the
/// auxiliary data needed by the first-order error estimator.
///
/// Implementations must keep every method pure; the estimator may call them
/// from several threads.
class PeriodicSystem {
 public:
  virtual ~PeriodicSystem() = default;

  virtual std::size_t dimension() const = 0;
  virtual bool in_domain(const Vector& I) const = 0;

  virtual Vector field(const Vector& I, double theta) const = 0;
  virtual Vector averaged_field(const Vector& I) const = 0;
  /// Zero-mean s with 2 pi ds/dtheta = f - fbar.
  virtual Vector s(const Vector& I, double theta) const = 0;
  /// Angular mean of (ds/dI) f.
  virtual Vector pbar(const Vector& I) const = 0;
  virtual Matrix jac_averaged_field(const Vector& I) const = 0;

  /// Cap radii rho(tau); +infinity marks an unbounded component.
  virtual Vector caps(double tau) const = 0;
  /// Throws DomainError outside the cap region.
  virtual BoundValues bounds(double tau, const Vector& r) const = 0;

  /// Entrywise bounds on |R(tau)| and |R^{-1}(tau)|, and d/dtau of the former.
  virtual Matrix R_bound(double tau) const = 0;
  virtual Matrix P_bound(double tau) const = 0;
  virtual Matrix R_bound_derivative(double tau) const = 0;

  /// Closed-form J, R, R^{-1}, K along the averaged solution from I0.
  virtual std::optional<FlowPoint> closed_flow(const Vector& I0, double tau) const;

  /// d alpha^i / d r^j at (tau, r) for alpha = a0(tau) + a(r) r + eps b(r);
  /// a0 does not depend on r. Default: central differences of the bounds.
  virtual Matrix alpha_r_jacobian(double tau, const Vector& r, double eps) const;

  /// Inverse of (1 - eps d alpha/dr) at r. Default: LU inversion.
  virtual Matrix estimator_inverse(double tau, const Vector& r, double eps, bool exact) const;
};

/// alpha(tau, r) - a0(tau) = a(r) r + eps b(r).
Vector alpha_linear_part(const BoundValues& bv, const Vector& r, double eps);

}  // namespace avgbound::averaging
