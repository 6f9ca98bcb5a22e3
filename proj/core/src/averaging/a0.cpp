#include "avgbound/averaging/a0.hpp"

#include <cmath>

#include "avgbound/numerics/errors.hpp"
#include "avgbound/numerics/quadrature.hpp"

namespace avgbound::averaging {

A0Table::A0Table(std::vector<double> nodes, std::vector<std::vector<double>> values, numerics::InterpMode mode)
    : nodes_(std::move(nodes)), values_(std::move(values)), mode_(mode) {
  for (const auto& v : values_) interp_.emplace_back(mode_, nodes_, v);
}

Vector A0Table::value(double tau) const {
  Vector out(static_cast<Eigen::Index>(interp_.size()));
  for (std::size_t i = 0; i < interp_.size(); ++i) out[static_cast<Eigen::Index>(i)] = interp_[i](tau);
  return out;
}

Vector A0Table::derivative(double tau) const {
  Vector out(static_cast<Eigen::Index>(interp_.size()));
  for (std::size_t i = 0; i < interp_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = interp_[i].derivative(tau);
  }
  return out;
}

A0Table a0_build(const PeriodicSystem& system, const AveragedFlow& flow, const A0Options& options) {
  if (options.Q < 2 || options.N < 2) throw DomainError("a0_build: Q and N must be at least 2");
  const std::size_t d = system.dimension();
  const double U = flow.horizon();
  const Vector s0 = system.s(flow.initial(), 0.0);

  std::vector<double> nodes(options.N + 1);
  std::vector<std::vector<double>> values(d, std::vector<double>(options.N + 1));
  for (std::size_t n = 0; n <= options.N; ++n) {
    const double tau = n == options.N ? U : U * static_cast<double>(n) / static_cast<double>(options.N);
    nodes[n] = tau;
    const Vector J = flow.J(tau);
    const Vector shift = flow.R(tau) * s0 + flow.K(tau);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      auto g = [&](double theta) { return std::abs(system.s(J, theta)[ii] - shift[ii]); };
      values[i][n] = numerics::grid_max_on_torus(g, options.Q, options.refine).value;
    }
  }
  return A0Table(std::move(nodes), std::move(values), options.mode);
}

}  // namespace avgbound::averaging
