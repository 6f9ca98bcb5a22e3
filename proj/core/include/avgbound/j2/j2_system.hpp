#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "avgbound/averaging/estimator.hpp"
#include "avgbound/averaging/periodic_system.hpp"
#include "avgbound/kepler/kepler.hpp"
#include "avgbound/numerics/interpolation.hpp"

namespace avgbound::j2 {

/// Component order used throughout: P = 0, E = 1, Y = 2.
enum Component : Eigen::Index { kP = 0, kE = 1, kY = 2 };

struct J2Config {
  double P0 = 3.0;
  double E0 = 0.6640;
  double Y0 = 0.0;
  double epsilon = 5.457e-4;
  double orbits = 3000.0;  // U / epsilon
  std::size_t Q = 30;
  std::size_t N = 100;
  numerics::InterpMode interp = numerics::InterpMode::cubic;
  averaging::InverseMode inverse = averaging::InverseMode::approx;
  bool grid_refine = true;  // golden-section polish of each grid max
  double est_abs_tol = 1e-8;
  double est_rel_tol = 1e-8;
  double rk_abs_tol = 1e-10;  // L-operation
  double rk_rel_tol = 1e-10;
  std::size_t samples = 512;
  kepler::PlanetModel planet = kepler::earth();

  double U() const noexcept { return epsilon * orbits; }
  Eigen::Vector3d I0() const noexcept { return {P0, E0, Y0}; }
  /// Throws DomainError on violated invariants.
  void validate() const;
};

/// Polar and Cos-B initial data with Earth constants.
J2Config preset_polar();
J2Config preset_cosb();

/// One majorant coef * [p0(E+) + (P+/P0)^3 p1(E+)] / (P-^p E-^q), with
/// E+- = E0 +- r^E and P+- = P0 +- r^P.
struct Majorant {
  double coef = 0.0;
  std::vector<double> p0;  // ascending powers of E+
  std::vector<double> p1;
  int p = 0;
  int q = 0;

  double value(double P0, double E0, double rP, double rE) const;
  /// (d/dr^P, d/dr^E)
  std::array<double, 2> gradient(double P0, double E0, double rP, double rE) const;
};

/// Closed-form majorizing functions; every entry not listed is zero.
struct BoundTable {
  std::array<std::array<Majorant, 3>, 3> a;
  std::array<Majorant, 3> b;
  std::array<Majorant, 3> c;
  std::array<std::array<Majorant, 3>, 3> d;
  Majorant e_YPP;
};

const BoundTable& bound_table();

/// Matrices of the third-order approximate inverse at (P0, E0).
struct InverseMatrices {
  Eigen::Matrix3d M;
  std::array<Eigen::Matrix3d, 3> N;  // N_(P), N_(E), N_(Y)
  Eigen::Matrix3d Q;
};

InverseMatrices inverse_matrices(double P0, double E0);

Eigen::Vector3d s_closed(double P, double E, double Y, double theta);

struct PbarJacHess {
  Eigen::Vector3d pbar;
  Eigen::Matrix3d jac;  // d fbar / dI
  double hess_YPP;      // d^2 fbar^Y / dP^2, the only nonzero entry
};

PbarJacHess pbar_jac_hess(double P, double E, double Y);

struct ClosedRK {
  Eigen::Matrix3d R;
  Eigen::Matrix3d R_inverse;
  Eigen::Vector3d K;
};

ClosedRK closed_R_K(const J2Config& cfg, double tau);

/// Closed forms of v^P and u^P.
double vP_closed(double P, double E, double Y, double theta);
double uP_closed(double P, double E, double Y, double theta);

/// The polar J2 problem as a PeriodicSystem.
class J2System final : public averaging::PeriodicSystem {
 public:
  explicit J2System(const J2Config& cfg);

  const J2Config& config() const noexcept { return cfg_; }

  std::size_t dimension() const override { return 3; }
  bool in_domain(const Vector& I) const override;
  Vector field(const Vector& I, double theta) const override;
  Vector averaged_field(const Vector& I) const override;
  Vector s(const Vector& I, double theta) const override;
  Vector pbar(const Vector& I) const override;
  Matrix jac_averaged_field(const Vector& I) const override;
  Vector caps(double tau) const override;
  averaging::BoundValues bounds(double tau, const Vector& r) const override;
  Matrix R_bound(double tau) const override;
  Matrix P_bound(double tau) const override;
  Matrix R_bound_derivative(double tau) const override;
  std::optional<averaging::FlowPoint> closed_flow(const Vector& I0, double tau) const override;
  /// Analytic partials of the majorants.
  Matrix alpha_r_jacobian(double tau, const Vector& r, double eps) const override;
  /// approx: 1 + eps M + eps r^k N_(k) + eps^2 Q; exact: adjugate inverse.
  Matrix estimator_inverse(double tau, const Vector& r, double eps, bool exact) const override;

  const InverseMatrices& inverse_data() const noexcept { return inv_; }

 private:
  J2Config cfg_;
  InverseMatrices inv_;
};

std::shared_ptr<const J2System> make_system(const J2Config& cfg);

/// d alpha/dr for the J2 majorants (raw partials, no identity).
Eigen::Matrix3d alpha_partials(const J2Config& cfg, double eps, const Eigen::Vector3d& r);

Eigen::Matrix3d approx_inverse(const J2Config& cfg, double eps, const Eigen::Vector3d& r);
Eigen::Matrix3d exact_inverse(const J2Config& cfg, double eps, const Eigen::Vector3d& r);

}  // namespace avgbound::j2
