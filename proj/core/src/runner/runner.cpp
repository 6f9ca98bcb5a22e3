#include "avgbound/runner/runner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "avgbound/averaging/averaged_flow.hpp"
#include "avgbound/kepler/kepler.hpp"
#include "avgbound/numerics/errors.hpp"
#include "avgbound/numerics/ode.hpp"

namespace avgbound::runner {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunArtifacts run_n_operation(const j2::J2Config& config) {
  config.validate();
  const auto start = Clock::now();
  RunArtifacts out;
  out.config = config;
  out.system = j2::make_system(config);
  const double eps = config.epsilon;

  auto t = Clock::now();
  const auto flow = averaging::AveragedFlow::build(out.system, config.I0(), config.U(), {1e-12, 1e-12});
  averaging::A0Options a0_opt;
  a0_opt.Q = config.Q;
  a0_opt.N = config.N;
  a0_opt.mode = config.interp;
  a0_opt.refine = config.grid_refine;
  out.a0.emplace(averaging::a0_build(*out.system, flow, a0_opt));
  out.timings.a0 = seconds_since(t);

  t = Clock::now();
  const auto box = averaging::default_sigma_box(*out.system, *out.a0, eps);
  out.fixed_point = averaging::fixed_point(*out.system, *out.a0, eps, box);
  out.timings.fixed_point = seconds_since(t);

  t = Clock::now();
  averaging::EstimatorOptions est;
  est.integrator = {config.est_abs_tol, config.est_rel_tol};
  est.inverse = config.inverse;
  est.samples = config.samples;
  out.estimator = averaging::estimator_ode(*out.system, *out.a0, eps, out.fixed_point.ell0, est);
  out.timings.estimator = seconds_since(t);
  out.timings.total = seconds_since(start);
  return out;
}

LOperation run_l_operation(const j2::J2Config& config, const LOptions& options) {
  config.validate();
  if (config.orbits > options.max_orbits) {
    std::ostringstream os;
    os << "run_l_operation: " << config.orbits << " orbits exceeds the budget of " << options.max_orbits;
    throw DomainError(os.str());
  }
  if (options.grid_points < 2) throw DomainError("run_l_operation: grid_points must be at least 2");
  const auto start = Clock::now();
  const double eps = config.epsilon, P0 = config.P0, E0 = config.E0, Y0 = config.Y0;
  const double slope = -3.0 * std::numbers::pi / (P0 * P0);
  const double T = config.orbits;

  auto rhs = [&](double t, const Vector& L, Vector& dL) {
    const double JY = Y0 + slope * eps * t;
    const Eigen::Vector3d f =
        kepler::j2_field(P0 + eps * L[0], E0 + eps * L[1], JY + eps * L[2], 2.0 * std::numbers::pi * t);
    dL[0] = f[0];
    dL[1] = f[1];
    dL[2] = f[2] - slope;  // fbar^Y(J) = -3 pi / P0^2
  };

  LOperation out;
  out.horizon = T;
  numerics::IvpOptions opt;
  opt.output_times.resize(options.grid_points);
  for (std::size_t k = 0; k < options.grid_points; ++k) {
    opt.output_times[k] = k + 1 == options.grid_points
                              ? T
                              : T * static_cast<double>(k) / static_cast<double>(options.grid_points - 1);
  }
  opt.observer = [&](double t, const Vector& L) {
    out.step_times.push_back(t);
    out.step_values.emplace_back(L[0], L[1], L[2]);
  };
  opt.guard = [&](double, const Vector& L) -> std::optional<std::string> {
    const double E = E0 + eps * L[1];
    if (P0 + eps * L[0] > 0.0 && E > 0.0 && E < 1.0) return std::nullopt;
    return "element trajectory left the domain";
  };
  numerics::IntegratorConfig cfg{config.rk_abs_tol, config.rk_rel_tol};
  auto res = numerics::integrate_ivp(rhs, Vector::Zero(3), 0.0, T, cfg, opt);
  if (!res.completed()) {
    std::ostringstream os;
    os << "run_l_operation: " << res.guard_message << " at t=" << res.stop_time;
    throw IntegrationError(os.str(), res.stop_time);
  }
  out.grid = std::move(res.curve);
  out.stats = res.stats;
  out.seconds = seconds_since(start);
  return out;
}

ComparisonReport compare(const averaging::EstimatorCurves& est, const LOperation& l, const j2::J2Config& config,
                         double slack) {
  if (!est.completed) throw DomainError("compare: the estimator did not reach the horizon");
  const double T = config.orbits, eps = config.epsilon, U = est.horizon;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  if (!close(l.horizon, T) || !close(U, config.U()) || !close(l.grid.back_time(), T)) {
    throw DomainError("compare: mismatched horizons");
  }
  ComparisonReport rep;
  rep.slack = slack;
  rep.dominance = {true, true, true};
  rep.max_ratio = {0.0, 0.0, 0.0};
  const double inf = std::numeric_limits<double>::infinity();

  // eps * t can exceed U by rounding at the right end; the estimator is defined there.
  auto envelope_at = [&](double t) { return est.n(std::min(eps * t, U)); };
  auto check = [&](double t, const Eigen::Vector3d& absL, const Vector& n) {
    ++rep.checked_points;
    for (int i = 0; i < 3; ++i) {
      const double ratio = absL[i] == 0.0 ? 0.0 : (n[i] > 0.0 ? absL[i] / n[i] : inf);
      if (ratio > rep.max_ratio[i]) {
        rep.max_ratio[i] = ratio;
        rep.max_ratio_time[i] = t;
      }
      if (!(absL[i] <= (1.0 + slack) * n[i])) {
        rep.dominance[i] = false;
        if (!rep.first_violation || t < *rep.first_violation) rep.first_violation = t;
      }
    }
  };

  for (std::size_t k = 0; k < l.grid.size(); ++k) {
    const double t = l.grid.nodes()[k];
    const Eigen::Vector3d absL = l.grid.node_value(k).cwiseAbs();
    const Vector n = envelope_at(t);
    rep.t_orbits.push_back(t);
    rep.abs_L.push_back(absL);
    rep.envelope.emplace_back(n[0], n[1], n[2]);
    check(t, absL, n);
  }
  for (std::size_t k = 0; k < l.step_times.size(); ++k) {
    const double t = l.step_times[k];
    check(t, l.step_values[k].cwiseAbs(), envelope_at(t));
  }
  return rep;
}

}  // namespace avgbound::runner
