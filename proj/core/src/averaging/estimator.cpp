#include "avgbound/averaging/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::averaging {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string describe_cap_violation(const Vector& r, const Vector& rho) {
  std::ostringstream os;
  os.precision(17);
  os << "cap violation: r=(";
  for (Eigen::Index i = 0; i < r.size(); ++i) os << (i ? ", " : "") << r[i];
  os << ") rho=(";
  for (Eigen::Index i = 0; i < rho.size(); ++i) os << (i ? ", " : "") << rho[i];
  os << ")";
  return os.str();
}

}  // namespace

void check_cap(const PeriodicSystem& system, double tau, const Vector& r) {
  const Vector rho = system.caps(tau);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0) || !(r[i] < rho[i])) throw DomainError(describe_cap_violation(r, rho));
  }
}

Vector alpha_eval(const A0Table& a0, const PeriodicSystem& system, double eps, double tau, const Vector& r) {
  check_cap(system, tau, r);
  return a0.value(tau) + alpha_linear_part(system.bounds(tau, r), r, eps);
}

Vector gamma_eval(const BoundValues& bv, const Vector& ell) {
  Vector g = bv.c + bv.d * ell;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    g[i] += 0.5 * ell.dot(bv.e[static_cast<std::size_t>(i)] * ell);
  }
  return g;
}

Vector gamma_eval(const PeriodicSystem& system, double tau, const Vector& r, const Vector& ell) {
  check_cap(system, tau, r);
  return gamma_eval(system.bounds(tau, r), ell);
}

SigmaBox default_sigma_box(const PeriodicSystem& system, const A0Table& a0, double eps) {
  const auto d = static_cast<Eigen::Index>(system.dimension());
  const Vector zero = Vector::Zero(d);
  const Vector center = a0.value(0.0) + eps * system.bounds(0.0, zero).b;
  const Vector rho = system.caps(0.0);
  Vector sigma(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    sigma[i] = center[i] * (1.0 - 1e-9);
    if (std::isfinite(rho[i])) sigma[i] = std::min(sigma[i], 0.99 * rho[i] / eps - center[i]);
  }
  return {center, sigma};
}

FixedPointReport fixed_point(const PeriodicSystem& system, const A0Table& a0, double eps, const SigmaBox& box,
                             const FixedPointOptions& options) {
  const auto d = static_cast<Eigen::Index>(system.dimension());
  FixedPointReport rep;
  rep.sigma = box;
  const Vector rho = system.caps(0.0);
  const Vector lo = box.center - box.half_width;
  const Vector hi = box.center + box.half_width;

  rep.box_inside_caps = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(box.half_width[i] > 0.0) || !(lo[i] > 0.0) || !(hi[i] < rho[i] / eps)) rep.box_inside_caps = false;
  }

  // Sampled Lipschitz matrix over the box.
  rep.A = Matrix::Zero(d, d);
  if (rep.box_inside_caps) {
    const std::size_t m = std::max<std::size_t>(options.samples_per_axis, 2);
    std::size_t total = 1;
    for (Eigen::Index i = 0; i < d; ++i) total *= m;
    Vector ell(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double frac = static_cast<double>(rest % m) / static_cast<double>(m - 1);
        rest /= m;
        ell[i] = lo[i] + frac * (hi[i] - lo[i]);
      }
      rep.A = rep.A.cwiseMax(system.alpha_r_jacobian(0.0, eps * ell, eps).cwiseAbs());
    }
    rep.A *= options.inflation;
  }
  rep.contraction = eps * rep.A.rowwise().sum().maxCoeff();
  rep.contraction_ok = rep.box_inside_caps && rep.contraction < 1.0;

  rep.self_map_slack = Vector::Constant(d, -inf);
  if (rep.box_inside_caps) {
    const Vector dev = (alpha_eval(a0, system, eps, 0.0, eps * box.center) - box.center).cwiseAbs();
    rep.self_map_slack = box.half_width - dev - eps * (rep.A * box.half_width);
    rep.self_map_ok = (rep.self_map_slack.array() > 0.0).all();
  }

  Vector l = a0.value(0.0);
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const Vector next = alpha_eval(a0, system, eps, 0.0, eps * l);
    const double step = (next - l).lpNorm<Eigen::Infinity>();
    rep.step_norms.push_back(step);
    l = next;
    rep.iterations = it + 1;
    if (step < options.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    throw ConvergenceError("fixed_point: contraction iteration did not reach the tolerance");
  }
  rep.ell0 = l;
  rep.residual = (alpha_eval(a0, system, eps, 0.0, eps * l) - l).lpNorm<Eigen::Infinity>();
  rep.ell0_in_box = ((l - lo).array() >= 0.0).all() && ((hi - l).array() >= 0.0).all();
  return rep;
}

InverseMode parse_inverse_mode(std::string_view name) {
  if (name == "approx") return InverseMode::approx;
  if (name == "exact") return InverseMode::exact;
  throw DomainError("unknown inverse mode '" + std::string(name) + "' (expected approx|exact)");
}

std::string_view to_string(InverseMode mode) { return mode == InverseMode::approx ? "approx" : "exact"; }

Vector EstimatorCurves::n(double tau) const {
  const Vector y = state.evaluate(tau);
  return y.tail(y.size() / 2);
}

Vector EstimatorCurves::m(double tau) const {
  const Vector y = state.evaluate(tau);
  return y.head(y.size() / 2);
}

EstimatorCurves estimator_ode(const PeriodicSystem& system, const A0Table& a0, double eps, const Vector& ell0,
                              const EstimatorOptions& options) {
  const auto d = static_cast<Eigen::Index>(system.dimension());
  const double U = a0.horizon();
  const bool exact = options.inverse == InverseMode::exact;

  // Returns an empty string when (tau, n) satisfies the domain conditions.
  auto domain_issue = [&](double tau, const Vector& n) -> std::string {
    const Vector rho = system.caps(tau);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double r = eps * n[i];
      if (!(r > 0.0)) return "estimator guard: eps*n[" + std::to_string(i) + "] <= 0";
      if (std::isfinite(rho[i]) && !(r < rho[i])) {
        return "estimator guard: eps*n[" + std::to_string(i) + "] reached the cap";
      }
    }
    const Matrix m = Matrix::Identity(d, d) - eps * system.alpha_r_jacobian(tau, eps * n, eps);
    if (!(m.determinant() > 0.0)) return "estimator guard: det(1 - eps dalpha/dr) <= 0";
    return {};
  };

  auto rhs = [&](double tau, const Vector& y, Vector& dy) {
    const Vector m = y.head(d);
    const Vector n = y.tail(d);
    if (!domain_issue(tau, n).empty()) {
      dy.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    const Vector r = eps * n;
    const BoundValues bv = system.bounds(tau, r);
    const Vector g = gamma_eval(bv, n);
    const Matrix Pb = system.P_bound(tau);
    const Matrix Rb = system.R_bound(tau);
    const Vector Pg = Pb * g;
    const Vector drive = a0.derivative(tau) + eps * (Rb * Pg) + eps * (system.R_bound_derivative(tau) * m);
    dy.head(d) = Pg;
    dy.tail(d) = system.estimator_inverse(tau, r, eps, exact) * drive;
  };

  EstimatorCurves out;
  out.eps = eps;
  out.horizon = U;
  out.ell0 = ell0;
  out.min_cap_margin = Vector::Constant(d, inf);
  out.min_determinant = inf;

  numerics::IvpOptions opt;
  opt.guard = [&](double tau, const Vector& y) -> std::optional<std::string> {
    std::string issue = domain_issue(tau, y.tail(d));
    if (issue.empty()) return std::nullopt;
    return issue;
  };
  opt.observer = [&](double tau, const Vector& y) {
    const Vector n = y.tail(d);
    const Vector rho = system.caps(tau);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::isfinite(rho[i])) out.min_cap_margin[i] = std::min(out.min_cap_margin[i], rho[i] - eps * n[i]);
    }
    const Matrix mat = Matrix::Identity(d, d) - eps * system.alpha_r_jacobian(tau, eps * n, eps);
    out.min_determinant = std::min(out.min_determinant, mat.determinant());
    out.reached = tau;
  };

  Vector y0(2 * d);
  y0.head(d).setZero();
  y0.tail(d) = ell0;
  try {
    auto res = numerics::integrate_ivp(rhs, y0, 0.0, U, options.integrator, opt);
    out.steps = res.stats.accepted;
    out.completed = res.completed();
    if (!out.completed) {
      std::ostringstream os;
      os.precision(10);
      os << res.guard_message << " at tau=" << res.stop_time;
      out.failure = os.str();
    }
    out.state = std::move(res.curve);
  } catch (const IntegrationError& err) {
    out.completed = false;
    out.failure = err.what();
    return out;
  }

  const double end = out.completed ? U : out.reached;
  const std::size_t k = std::max<std::size_t>(options.samples, 2);
  for (std::size_t j = 0; j < k; ++j) {
    const double tau = j + 1 == k ? end : end * static_cast<double>(j) / static_cast<double>(k - 1);
    const Vector y = out.state.evaluate(tau);
    out.sample_tau.push_back(tau);
    out.sample_m.push_back(y.head(d));
    out.sample_n.push_back(y.tail(d));
  }
  return out;
}

}  // namespace avgbound::averaging
