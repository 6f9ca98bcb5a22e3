#include "avgbound/kepler/kepler.hpp"

#include <cmath>
#include <numbers>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::kepler {

using std::cos;
using std::sin;
using std::sqrt;
constexpr double pi = std::numbers::pi;

void PlanetModel::validate() const {
  if (!(GM > 0.0) || !(R > 0.0) || !(epsilon > 0.0)) {
    throw DomainError("PlanetModel: GM, R and epsilon must be positive");
  }
}

PlanetModel earth() { return {3.98600442e14, 6.378135e6, 5.457e-4}; }

bool PlanarState::in_domain(const PlanetModel& planet) const {
  const double energy = 0.5 * (rho_dot * rho_dot + rho * rho * theta_dot * theta_dot) - planet.GM / rho;
  return rho > 0.0 && theta_dot > 0.0 && energy < 0.0;
}

KeplerElements elements_from_state(const PlanarState& s, const PlanetModel& planet) {
  if (!s.in_domain(planet)) {
    throw DomainError("elements_from_state: state is not a prograde elliptic orbit");
  }
  const double GM = planet.GM;
  const double h = s.rho * s.rho * s.theta_dot;  // specific angular momentum
  const double P = h * h / (planet.R * GM);
  // Eccentricity vector in the frame of the radius: (E cos(theta - Y), E sin(theta - Y)).
  const double ec = h * h / (GM * s.rho) - 1.0;
  const double es = s.rho_dot * h / GM;
  const double E = std::hypot(ec, es);
  if (E < 1e-12) throw DomainError("elements_from_state: circular orbit (E = 0) is excluded");
  if (E >= 1.0) throw DomainError("elements_from_state: eccentricity reached 1");
  const double phi = std::atan2(es, ec);
  double Y = s.theta - phi;
  if (Y <= s.theta - pi) Y += 2.0 * pi;
  return {P, E, Y, s.theta};
}

PlanarState state_from_elements(const KeplerElements& el, const PlanetModel& planet) {
  if (!(el.P > 0.0) || !(el.E > 0.0) || !(el.E < 1.0)) {
    throw DomainError("state_from_elements: requires P > 0 and 0 < E < 1");
  }
  const double c = cos(el.theta - el.Y), sn = sin(el.theta - el.Y);
  const double RP = planet.R * el.P;
  const double w = 1.0 + el.E * c;
  return {sqrt(planet.GM / RP) * el.E * sn, sqrt(planet.GM / (RP * RP * RP)) * w * w, RP / w, el.theta};
}

OrbitGeometry apsides_and_period(double P, double E, const PlanetModel& planet) {
  if (!(P > 0.0) || !(E >= 0.0) || !(E < 1.0)) {
    throw DomainError("apsides_and_period: requires P > 0 and 0 <= E < 1");
  }
  const double RP = planet.R * P;
  const double q = 1.0 - E * E;
  return {RP / (1.0 - E), RP / (1.0 + E), 2.0 * pi * sqrt(RP * RP * RP / (planet.GM * q * q * q))};
}

ParameterEccentricity elements_from_apsides(double rho_plus, double rho_minus, const PlanetModel& planet) {
  if (!(rho_minus > 0.0) || !(rho_plus >= rho_minus)) {
    throw DomainError("elements_from_apsides: requires rho_plus >= rho_minus > 0");
  }
  const double sum = rho_plus + rho_minus;
  return {2.0 * rho_plus * rho_minus / (planet.R * sum), (rho_plus - rho_minus) / sum};
}

double j2_epsilon_ellipsoid(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("j2_epsilon_ellipsoid: alpha must be positive");
  return (1.0 - alpha * alpha) / 10.0;
}

double j2_potential_W(double rho, double theta, const PlanetModel& planet) {
  if (!(rho > 0.0)) throw DomainError("j2_potential_W: rho must be positive");
  const double c = cos(theta);
  return -(planet.GM * planet.R * planet.R / (rho * rho * rho)) * (1.0 - 3.0 * c * c);
}

PotentialModel j2_potential(const PlanetModel& planet) {
  const double k = planet.GM * planet.R * planet.R;
  return {
      [k](double rho, double theta) {
        const double c = cos(theta);
        return 3.0 * k / (rho * rho * rho * rho) * (1.0 - 3.0 * c * c);
      },
      [k](double rho, double theta) {
        return -6.0 * k / (rho * rho * rho) * cos(theta) * sin(theta);
      },
  };
}

PotentialModel zero_potential() {
  return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
}

Eigen::Vector3d field_from_potential(const KeplerElements& el, double theta, const PlanetModel& planet,
                                     const PotentialModel& potential) {
  if (!(el.E > 0.0)) throw DomainError("field_from_potential: E = 0 is singular");
  const PlanarState st = state_from_elements({el.P, el.E, el.Y, theta}, planet);
  const double Q_rho = -potential.dW_drho(st.rho, theta);
  const double Q_theta = -potential.dW_dtheta(st.rho, theta);
  const double q_rho = planet.R * planet.R * Q_rho / planet.GM;  // dimensionless
  const double q_theta = planet.R * Q_theta / planet.GM;
  const double P = el.P, E = el.E;
  const double c = cos(theta - el.Y), sn = sin(theta - el.Y);
  const double w2 = (1.0 + E * c) * (1.0 + E * c);
  const double fP = 4.0 * pi * P * P / w2 * q_theta;
  const double fE = 2.0 * pi * P * P * sn / w2 * q_rho +
                    pi * P * (3.0 * E + 4.0 * c + E * cos(2.0 * theta - 2.0 * el.Y)) / w2 * q_theta;
  const double fY = -2.0 * pi * P * P * c / (E * w2) * q_rho +
                    2.0 * pi * P * sn * (2.0 + E * c) / (E * w2) * q_theta;
  return {fP, fE, fY};
}

Eigen::Vector3d j2_field(double P, double E, double Y, double th) {
  const double E2 = E * E;
  const double fP = 6.0 * pi / P * (E * sin(th + Y) + 2.0 * sin(2.0 * th) + E * sin(3.0 * th - Y));
  const double fE = 3.0 * pi / (8.0 * P * P) *
                    (E2 * sin(th - 3.0 * Y) + (8.0 + 2.0 * E2) * sin(th - Y) + (4.0 + 11.0 * E2) * sin(th + Y) +
                     8.0 * E * sin(2.0 * th - 2.0 * Y) + 40.0 * E * sin(2.0 * th) +
                     2.0 * E2 * sin(3.0 * th - 3.0 * Y) + (28.0 + 17.0 * E2) * sin(3.0 * th - Y) +
                     24.0 * E * sin(4.0 * th - 2.0 * Y) + 5.0 * E2 * sin(5.0 * th - 3.0 * Y));
  const double fY = -3.0 * pi / (P * P) -
                    3.0 * pi / (8.0 * E * P * P) *
                        (E2 * cos(th - 3.0 * Y) + (8.0 + 6.0 * E2) * cos(th - Y) - (4.0 - 7.0 * E2) * cos(th + Y) +
                         8.0 * E * cos(2.0 * th - 2.0 * Y) + 24.0 * E * cos(2.0 * th) +
                         2.0 * E2 * cos(3.0 * th - 3.0 * Y) + (28.0 + 11.0 * E2) * cos(3.0 * th - Y) +
                         24.0 * E * cos(4.0 * th - 2.0 * Y) + 5.0 * E2 * cos(5.0 * th - 3.0 * Y));
  return {fP, fE, fY};
}

std::vector<double> physical_time(const numerics::SampledCurve& elements, const PlanetModel& planet,
                                  const numerics::IntegratorConfig& cfg) {
  if (elements.dimension() != 3) throw DomainError("physical_time: element curve must have 3 components");
  const double t0 = elements.front_time(), t1 = elements.back_time();
  std::vector<double> out;
  out.reserve(elements.size());
  if (t1 == t0) {
    out.assign(elements.size(), 0.0);
    return out;
  }
  auto field = [&](double t, const Vector&, Vector& dy) {
    const Vector I = elements.evaluate(t);
    const double th = 2.0 * pi * t;
    const double thdot = state_from_elements({I[0], I[1], I[2], th}, planet).theta_dot;
    dy[0] = 2.0 * pi / thdot;
  };
  numerics::IvpOptions opt;
  opt.output_times = elements.nodes();
  // One period of the integrand per unit of orbit counter: cap the step.
  numerics::IntegratorConfig c = cfg;
  c.max_step = std::min(c.max_step, 0.05);
  const auto res = numerics::integrate_ivp(field, Vector::Zero(1), t0, t1, c, opt);
  for (std::size_t k = 0; k < res.curve.size(); ++k) out.push_back(res.curve.node_component(k, 0));
  return out;
}

}  // namespace avgbound::kepler
