#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "avgbound/numerics/ode.hpp"
#include "avgbound/numerics/sampled_curve.hpp"

namespace avgbound::kepler {

struct PlanetModel {
  double GM;       // m^3/s^2
  double R;        // m
  double epsilon;  // J2/2

  void validate() const;
};

/// Earth constants used by both presets.
PlanetModel earth();

struct PlanarState {
  double rho_dot;    // m/s
  double theta_dot;  // rad/s
  double rho;        // m
  double theta;      // rad

  /// Prograde with negative unperturbed energy.
  bool in_domain(const PlanetModel& planet) const;
};

struct KeplerElements {
  double P;
  double E;
  double Y;  // lifted to the reals
  double theta;
};

struct OrbitGeometry {
  double rho_plus;   // m
  double rho_minus;  // m
  double T_orb;      // s
};

struct ParameterEccentricity {
  double P;
  double E;
};

/// Throws DomainError outside the elliptic prograde domain, or when the
/// eccentricity is numerically 0 or reaches 1.
KeplerElements elements_from_state(const PlanarState& state, const PlanetModel& planet);

/// Throws DomainError unless P > 0 and 0 < E < 1.
PlanarState state_from_elements(const KeplerElements& elems, const PlanetModel& planet);

OrbitGeometry apsides_and_period(double P, double E, const PlanetModel& planet);
ParameterEccentricity elements_from_apsides(double rho_plus, double rho_minus, const PlanetModel& planet);

/// J2/2 of a homogeneous oblate ellipsoid with polar-to-equatorial axis ratio alpha.
double j2_epsilon_ellipsoid(double alpha);

/// The J2 perturbing potential (specific energy, J/kg); theta is measured from the pole.
double j2_potential_W(double rho, double theta, const PlanetModel& planet);

/// A planar perturbing potential with its analytic partials.
struct PotentialModel {
  std::function<double(double rho, double theta)> dW_drho;
  std::function<double(double rho, double theta)> dW_dtheta;
};

PotentialModel j2_potential(const PlanetModel& planet);
PotentialModel zero_potential();

/// The orbit-counter right-hand sides (epsilon factored out) generated by the
/// Lagrangian components Q_rho = -dW/drho, Q_theta = -dW/dtheta.
Eigen::Vector3d field_from_potential(const KeplerElements& elems, double theta,
                                     const PlanetModel& planet, const PotentialModel& potential);

/// Closed-form J2 field f(I, theta).
Eigen::Vector3d j2_field(double P, double E, double Y, double theta);

/// Elapsed physical time (s) at each node of an element trajectory
/// parametrised by the orbit counter; rows of the curve are (P, E, Y).
std::vector<double> physical_time(const numerics::SampledCurve& elements, const PlanetModel& planet,
                                  const numerics::IntegratorConfig& cfg = {1e-12, 1e-12});

}  // namespace avgbound::kepler
