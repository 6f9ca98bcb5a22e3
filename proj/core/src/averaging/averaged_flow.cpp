#include "avgbound/averaging/averaged_flow.hpp"

#include <cmath>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::averaging {

using numerics::IntegratorConfig;
using numerics::SampledCurve;

SampledCurve averaged_solution(const PeriodicSystem& system, const Vector& I0, double U,
                               const IntegratorConfig& cfg) {
  if (!system.in_domain(I0)) throw DomainError("averaged_solution: I0 outside the system's domain");
  auto rhs = [&](double, const Vector& J, Vector& dJ) { dJ = system.averaged_field(J); };
  numerics::IvpOptions opt;
  opt.guard = [&](double, const Vector& J) -> std::optional<std::string> {
    if (system.in_domain(J)) return std::nullopt;
    return "averaged solution left the domain";
  };
  auto res = numerics::integrate_ivp(rhs, I0, 0.0, U, cfg, opt);
  if (!res.completed()) {
    std::ostringstream os;
    os << "averaged_solution: " << res.guard_message << " at tau=" << res.stop_time;
    throw DomainError(os.str());
  }
  return std::move(res.curve);
}

SampledCurve fundamental_matrices(const PeriodicSystem& system, const SampledCurve& J, double U,
                                  const IntegratorConfig& cfg) {
  const auto d = static_cast<Eigen::Index>(system.dimension());
  auto rhs = [&](double tau, const Vector& y, Vector& dy) {
    const Matrix A = system.jac_averaged_field(J.evaluate(tau));
    const Eigen::Map<const Matrix> R(y.data(), d, d);
    Eigen::Map<Matrix>(dy.data(), d, d) = A * R;
  };
  const Matrix id = Matrix::Identity(d, d);
  const Vector y0 = Eigen::Map<const Vector>(id.data(), d * d);
  numerics::IvpOptions opt;
  opt.guard = [&](double, const Vector& y) -> std::optional<std::string> {
    if (std::abs(Eigen::Map<const Matrix>(y.data(), d, d).determinant()) >= 1e-12) return std::nullopt;
    return "fundamental matrix lost invertibility (|det R| < 1e-12)";
  };
  auto res = numerics::integrate_ivp(rhs, y0, 0.0, U, cfg, opt);
  if (!res.completed()) {
    std::ostringstream os;
    os << "fundamental_matrices: " << res.guard_message << " at tau=" << res.stop_time;
    throw DomainError(os.str());
  }
  return std::move(res.curve);
}

SampledCurve particular_K(const PeriodicSystem& system, const SampledCurve& J, double U,
                          const IntegratorConfig& cfg) {
  const auto d = static_cast<Eigen::Index>(system.dimension());
  auto rhs = [&](double tau, const Vector& K, Vector& dK) {
    const Vector Jt = J.evaluate(tau);
    dK = system.jac_averaged_field(Jt) * K + system.pbar(Jt);
  };
  auto res = numerics::integrate_ivp(rhs, Vector::Zero(d), 0.0, U, cfg);
  return std::move(res.curve);
}

Matrix matrix_at(const SampledCurve& curve, double tau, std::size_t d) {
  const Vector v = curve.evaluate(tau);
  const auto n = static_cast<Eigen::Index>(d);
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

AveragedFlow AveragedFlow::build(std::shared_ptr<const PeriodicSystem> system, const Vector& I0, double U,
                                 const IntegratorConfig& cfg, bool prefer_closed_form) {
  if (!(U > 0.0)) throw DomainError("AveragedFlow: horizon U must be positive");
  AveragedFlow flow;
  flow.system_ = std::move(system);
  flow.I0_ = I0;
  flow.U_ = U;
  if (prefer_closed_form && flow.system_->closed_flow(I0, 0.0)) {
    flow.closed_ = true;
    return flow;
  }
  flow.J_ = averaged_solution(*flow.system_, I0, U, cfg);
  flow.R_ = fundamental_matrices(*flow.system_, flow.J_, U, cfg);
  flow.K_ = particular_K(*flow.system_, flow.J_, U, cfg);
  return flow;
}

void AveragedFlow::check(double tau) const {
  if (!(tau >= 0.0 && tau <= U_)) {
    std::ostringstream os;
    os.precision(17);
    os << "AveragedFlow: tau=" << tau << " outside [0, " << U_ << "]";
    throw DomainError(os.str());
  }
}

Vector AveragedFlow::J(double tau) const {
  check(tau);
  return closed_ ? system_->closed_flow(I0_, tau)->J : J_.evaluate(tau);
}

Matrix AveragedFlow::R(double tau) const {
  check(tau);
  return closed_ ? system_->closed_flow(I0_, tau)->R : matrix_at(R_, tau, system_->dimension());
}

Matrix AveragedFlow::R_inverse(double tau) const {
  check(tau);
  if (closed_) return system_->closed_flow(I0_, tau)->R_inverse;
  const Matrix R = matrix_at(R_, tau, system_->dimension());
  if (std::abs(R.determinant()) < 1e-12) throw DomainError("AveragedFlow: R(tau) is not invertible");
  return R.inverse();
}

Vector AveragedFlow::K(double tau) const {
  check(tau);
  return closed_ ? system_->closed_flow(I0_, tau)->K : K_.evaluate(tau);
}

}  // namespace avgbound::averaging
