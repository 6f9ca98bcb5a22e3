#include "avgbound/averaging/periodic_system.hpp"

#include <algorithm>
#include <cmath>

namespace avgbound::averaging {

std::optional<FlowPoint> PeriodicSystem::closed_flow(const Vector&, double) const { return std::nullopt; }

Vector alpha_linear_part(const BoundValues& bv, const Vector& r, double eps) {
  return bv.a * r + eps * bv.b;
}

Matrix PeriodicSystem::alpha_r_jacobian(double tau, const Vector& r, double eps) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  const Vector rho = caps(tau);
  Matrix jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(r[j]));
    Vector rp = r, rm = r;
    rp[j] += h;
    rm[j] -= h;
    double span = 2.0 * h;
    // One-sided at the lower edge of the cap region.
    if (rm[j] < 0.0) {
      rm[j] = r[j];
      span = h;
    }
    if (std::isfinite(rho[j]) && rp[j] >= rho[j]) {
      rp[j] = r[j];
      span -= h;
    }
    const Vector fp = alpha_linear_part(bounds(tau, rp), rp, eps);
    const Vector fm = alpha_linear_part(bounds(tau, rm), rm, eps);
    jac.col(j) = (fp - fm) / span;
  }
  return jac;
}

Matrix PeriodicSystem::estimator_inverse(double tau, const Vector& r, double eps, bool) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  const Matrix m = Matrix::Identity(d, d) - eps * alpha_r_jacobian(tau, r, eps);
  return m.partialPivLu().inverse();
}

}  // namespace avgbound::averaging
