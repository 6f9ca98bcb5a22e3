#include "avgbound/numerics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::numerics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

bool all_finite(const Vector& v) { return v.allFinite(); }

double scaled_norm(const Vector& v, const Vector& scale) {
  return std::sqrt((v.array() / scale.array()).square().mean());
}

std::string time_message(const char* what, double t) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at t=" << t;
  return os.str();
}

class Stepper {
 public:
  Stepper(const OdeField& field, std::size_t n, IvpStats& stats)
      : field_(field), stats_(stats), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n),
        ynew(n), err(n), rc3(n), rc4(n), rc5(n) {}

  void eval(double t, const Vector& y, Vector& out) {
    ++stats_.rhs_evaluations;
    field_(t, y, out);
  }

  // Attempts one step from (t, y) with k1 = f(t, y). Fills ynew, k7, err.
  void attempt(double t, const Vector& y, double h) {
    tmp = y + h * (a21 * k1);
    eval(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    eval(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    eval(t + h, tmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    eval(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }

  void build_dense(const Vector& y, double h) {
    const Vector rc2 = ynew - y;
    rc3 = h * k1 - rc2;
    rc4 = rc2 - h * k7 - rc3;
    rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  }

  Vector dense(const Vector& y, double theta) const {
    const double om = 1.0 - theta;
    return y + theta * ((ynew - y) + om * (rc3 + theta * (rc4 + om * rc5)));
  }

  const OdeField& field_;
  IvpStats& stats_;
  Vector k1, k2, k3, k4, k5, k6, k7, tmp, ynew, err, rc3, rc4, rc5;
};

double initial_step(Stepper& st, double t0, const Vector& y0, double span, const Vector& scale,
                    double max_step) {
  const double dnorm0 = scaled_norm(y0, scale);
  const double dnorm1 = scaled_norm(st.k1, scale);
  double h0 = (dnorm0 < 1e-10 || dnorm1 < 1e-10) ? 1e-6 : 0.01 * dnorm0 / dnorm1;
  h0 = std::min({h0, span, max_step});
  Vector f1(y0.size());
  for (int attempt = 0; attempt < 60; ++attempt) {
    const Vector y1 = y0 + h0 * st.k1;
    st.eval(t0 + h0, y1, f1);
    if (all_finite(f1)) break;
    h0 *= 0.1;
  }
  if (!all_finite(f1)) return h0;
  const double dnorm2 = scaled_norm(f1 - st.k1, scale) / h0;
  const double dmax = std::max(dnorm1, dnorm2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span, max_step});
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw DomainError("IntegratorConfig: tolerances must be strictly positive");
  }
  if (max_steps == 0) throw DomainError("IntegratorConfig: max_steps must be positive");
  if (!(max_step > 0.0)) throw DomainError("IntegratorConfig: max_step must be positive");
  if (initial_step < 0.0) throw DomainError("IntegratorConfig: initial_step must be nonnegative");
}

IvpResult integrate_ivp(const OdeField& field, const Vector& y0, double t0, double t1,
                        const IntegratorConfig& cfg, const IvpOptions& options) {
  cfg.validate();
  if (!(t1 > t0)) throw DomainError("integrate_ivp: span must be nonempty");
  const auto n = static_cast<std::size_t>(y0.size());
  const std::vector<double>& outs = options.output_times;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    if (outs[k] < t0 || outs[k] > t1 || (k > 0 && !(outs[k] > outs[k - 1]))) {
      throw DomainError("integrate_ivp: output times must be increasing and inside the span");
    }
  }
  const bool step_nodes = outs.empty();

  IvpResult res;
  res.curve = SampledCurve(n);
  Stepper st(field, n, res.stats);

  std::size_t next_out = 0;
  auto emit_outputs_at_start = [&](const Vector& y) {
    while (next_out < outs.size() && outs[next_out] == t0) {
      res.curve.append_node(t0, y);
      ++next_out;
    }
  };

  if (options.guard) {
    if (auto msg = options.guard(t0, y0)) {
      res.stop = StopReason::guard;
      res.stop_time = t0;
      res.guard_message = *msg;
      res.curve.append_node(t0, y0);
      return res;
    }
  }
  if (step_nodes) res.curve.append_node(t0, y0);
  emit_outputs_at_start(y0);
  if (options.observer) options.observer(t0, y0);

  double t = t0;
  Vector y = y0;
  st.eval(t, y, st.k1);
  if (!all_finite(st.k1)) throw IntegrationError(time_message("non-finite right-hand side", t), t);

  Vector scale = cfg.abs_tol + cfg.rel_tol * y.array().abs();
  double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, t1 - t0)
                                    : initial_step(st, t, y, t1 - t0, scale, cfg.max_step);
  bool last_rejected = false;
  std::size_t steps = 0;

  while (t < t1) {
    if (++steps > cfg.max_steps) {
      throw IntegrationError(time_message("integrator step budget exhausted", t), t);
    }
    h = std::min(h, cfg.max_step);
    bool final_step = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw IntegrationError(time_message("integrator step size underflow", t), t);
    }

    st.attempt(t, y, h);
    if (!all_finite(st.ynew) || !all_finite(st.k7) || !all_finite(st.err)) {
      ++res.stats.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    scale = cfg.abs_tol + cfg.rel_tol * y.array().abs().max(st.ynew.array().abs());
    const double err = scaled_norm(st.err, scale);
    if (err > 1.0) {
      ++res.stats.rejected;
      h *= std::max(kFacMin, kSafety * std::pow(err, -0.2));
      last_rejected = true;
      continue;
    }

    const double tnew = final_step ? t1 : t + h;
    st.build_dense(y, h);

    if (options.guard) {
      if (auto msg = options.guard(tnew, st.ynew)) {
        // Bisect on the continuous extension for the first failing time.
        double lo = 0.0, hi = 1.0;
        std::string located = *msg;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (auto m = options.guard(t + mid * h, st.dense(y, mid))) {
            hi = mid;
            located = *m;
          } else {
            lo = mid;
          }
        }
        res.stop = StopReason::guard;
        res.stop_time = t + hi * h;
        res.guard_message = located;
        return res;
      }
    }

    ++res.stats.accepted;
    while (next_out < outs.size() && outs[next_out] <= tnew) {
      const double to = outs[next_out];
      res.curve.append_node(to, to == tnew ? st.ynew : st.dense(y, (to - t) / h));
      ++next_out;
    }
    if (step_nodes) {
      res.curve.append_node(tnew, st.ynew);
      if (cfg.dense_output) res.curve.append_dense_segment(st.rc3, st.rc4, st.rc5);
    }

    double fac = kSafety * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::clamp(fac, kFacMin, last_rejected ? 1.0 : kFacMax);
    t = tnew;
    y = st.ynew;
    st.k1 = st.k7;  // first-same-as-last
    h *= fac;
    last_rejected = false;
    if (options.observer) options.observer(t, y);
  }

  res.stop_time = t1;
  return res;
}

}  // namespace avgbound::numerics
