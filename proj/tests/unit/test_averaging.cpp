#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "avgbound/averaging/a0.hpp"
#include "avgbound/averaging/averaged_flow.hpp"
#include "avgbound/averaging/estimator.hpp"
#include "avgbound/j2/j2_system.hpp"
#include "avgbound/numerics/errors.hpp"
#include "avgbound/numerics/quadrature.hpp"

using namespace avgbound;
using namespace avgbound::averaging;
using std::numbers::pi;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

/// dI/dt = eps [ -lambda I + kappa ((1 + I) cos th + I sin th) ], one action.
/// J = I0 exp(-lambda tau), R = exp(-lambda tau), pbar = -kappa^2 / (4 pi).
/// The bounds below are crude but valid majorants for 0 <= J <= I0.
class ToySystem final : public PeriodicSystem {
 public:
  ToySystem(double lambda, double kappa, double I0) : lambda_(lambda), kappa_(kappa), I0_(I0) {}

  std::size_t dimension() const override { return 1; }
  bool in_domain(const Vector& I) const override { return std::isfinite(I[0]); }
  Vector field(const Vector& I, double th) const override {
    return vec1(-lambda_ * I[0] + kappa_ * ((1.0 + I[0]) * std::cos(th) + I[0] * std::sin(th)));
  }
  Vector averaged_field(const Vector& I) const override { return vec1(-lambda_ * I[0]); }
  Vector s(const Vector& I, double th) const override {
    return vec1(kappa_ * ((1.0 + I[0]) * std::sin(th) - I[0] * std::cos(th)) / (2.0 * pi));
  }
  Vector pbar(const Vector&) const override { return vec1(-kappa_ * kappa_ / (4.0 * pi)); }
  Matrix jac_averaged_field(const Vector&) const override { return Matrix::Constant(1, 1, -lambda_); }
  Vector caps(double) const override { return vec1(std::numeric_limits<double>::infinity()); }

  BoundValues bounds(double, const Vector& r) const override {
    const double k = std::abs(kappa_), lam = lambda_;
    const double Imax = I0_ + r[0];
    const double F = lam * Imax + k * (1.0 + 2.0 * Imax);                  // |f|
    const double vmax = k * (2.0 + 3.0 * Imax) / (4.0 * pi * pi);          // |v|
    const double pdev = std::sqrt(2.0) * k / (2.0 * pi) * F + k * k / (4.0 * pi);  // |p - pbar|, also |w|
    const double dp = std::sqrt(2.0) * k / (2.0 * pi) * (lam + std::sqrt(2.0) * k);  // |dp/dI|, also |dw/dI|
    const double dv = 3.0 * k / (4.0 * pi * pi);                           // |dv/dI|
    BoundValues bv;
    bv.a = Matrix::Constant(1, 1, std::sqrt(2.0) * k / (2.0 * pi));
    bv.b = vec1(pdev + lam * vmax);
    bv.c = vec1(dp * F + lam * (pdev + dv * F) + lam * lam * vmax);
    bv.d = Matrix::Zero(1, 1);
    bv.e = {Matrix::Zero(1, 1)};
    return bv;
  }
  Matrix R_bound(double tau) const override { return Matrix::Constant(1, 1, std::exp(-lambda_ * tau)); }
  Matrix P_bound(double tau) const override { return Matrix::Constant(1, 1, std::exp(lambda_ * tau)); }
  Matrix R_bound_derivative(double tau) const override {
    return Matrix::Constant(1, 1, -lambda_ * std::exp(-lambda_ * tau));
  }

  double J(double tau) const { return I0_ * std::exp(-lambda_ * tau); }
  double R(double tau) const { return std::exp(-lambda_ * tau); }
  double K(double tau) const { return -kappa_ * kappa_ / (4.0 * pi * lambda_) * (1.0 - std::exp(-lambda_ * tau)); }

 private:
  double lambda_, kappa_, I0_;
};

const numerics::IntegratorConfig kTight{1e-12, 1e-12};

void check_system_invariants(const PeriodicSystem& sys, const std::vector<Vector>& points) {
  const auto d = static_cast<Eigen::Index>(sys.dimension());
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut(0.0, 2.0 * pi);
  for (const auto& I : points) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double sbar = numerics::periodic_average([&](double t) { return sys.s(I, t)[i]; });
      CHECK(std::abs(sbar) < 1e-10);
      const double fbar = numerics::periodic_average([&](double t) { return sys.field(I, t)[i]; });
      CHECK(std::abs(fbar - sys.averaged_field(I)[i]) < 1e-10);
    }
    for (int k = 0; k < 10; ++k) {
      const double th = ut(rng), h = 1e-6;
      const Vector ds = 2.0 * pi * (sys.s(I, th + h) - sys.s(I, th - h)) / (2.0 * h);
      const Vector want = sys.field(I, th) - sys.averaged_field(I);
      CHECK((ds - want).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
}

}  // namespace

TEST_SUITE("periodic system invariants") {
  TEST_CASE("toy system") {
    const ToySystem toy(0.5, 0.8, 1.0);
    std::vector<Vector> pts;
    for (double x : {-2.0, 0.0, 0.3, 1.0, 4.0}) pts.push_back(vec1(x));
    check_system_invariants(toy, pts);
    // pbar equals the angle mean of (ds/dI) f
    for (const auto& I : pts) {
      const double h = 1e-6;
      const double want = numerics::periodic_average([&](double t) {
        const double dsdI = (toy.s(vec1(I[0] + h), t)[0] - toy.s(vec1(I[0] - h), t)[0]) / (2.0 * h);
        return dsdI * toy.field(I, t)[0];
      });
      CHECK(toy.pbar(I)[0] == doctest::Approx(want).epsilon(1e-8));
    }
  }

  TEST_CASE("satellite system") {
    const auto sys = j2::make_system(j2::preset_polar());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uP(1.0, 4.0), uE(0.05, 0.95), uY(-pi, pi);
    std::vector<Vector> pts;
    for (int k = 0; k < 100; ++k) {
      Vector I(3);
      I << uP(rng), uE(rng), uY(rng);
      pts.push_back(I);
    }
    check_system_invariants(*sys, pts);
  }
}

TEST_SUITE("averaged flow") {
  TEST_CASE("toy flow from the Cauchy problems") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 3.0, kTight);
    CHECK_FALSE(flow.closed_form());
    CHECK(flow.R(0.0)(0, 0) == 1.0);
    CHECK(flow.K(0.0)[0] == 0.0);
    for (double tau : {0.0, 0.4, 1.7, 3.0}) {
      CHECK(flow.J(tau)[0] == doctest::Approx(toy->J(tau)).epsilon(1e-10));
      CHECK(flow.R(tau)(0, 0) == doctest::Approx(toy->R(tau)).epsilon(1e-10));
      CHECK(flow.K(tau)[0] == doctest::Approx(toy->K(tau)).epsilon(1e-10));
      CHECK((flow.R(tau) * flow.R_inverse(tau))(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(flow.J(3.0 + 1e-9), DomainError);
  }

  TEST_CASE("flow leaving the domain") {
    struct Escaping final : public PeriodicSystem {
      std::size_t dimension() const override { return 1; }
      bool in_domain(const Vector& I) const override { return I[0] < 2.0; }
      Vector field(const Vector&, double) const override { return vec1(1.0); }
      Vector averaged_field(const Vector&) const override { return vec1(1.0); }
      Vector s(const Vector&, double) const override { return vec1(0.0); }
      Vector pbar(const Vector&) const override { return vec1(0.0); }
      Matrix jac_averaged_field(const Vector&) const override { return Matrix::Zero(1, 1); }
      Vector caps(double) const override { return vec1(1.0); }
      BoundValues bounds(double, const Vector&) const override { return {}; }
      Matrix R_bound(double) const override { return Matrix::Identity(1, 1); }
      Matrix P_bound(double) const override { return Matrix::Identity(1, 1); }
      Matrix R_bound_derivative(double) const override { return Matrix::Zero(1, 1); }
    };
    auto sys = std::make_shared<Escaping>();
    CHECK_THROWS_AS(averaged_solution(*sys, vec1(0.0), 5.0, kTight), DomainError);
    CHECK_NOTHROW(averaged_solution(*sys, vec1(0.0), 1.5, kTight));
  }

  TEST_CASE("satellite closed form against the Cauchy problems") {
    for (const auto& cfg : {j2::preset_polar(), j2::preset_cosb()}) {
      const auto sys = j2::make_system(cfg);
      const double U = cfg.epsilon * 60000.0;
      const auto closed = AveragedFlow::build(sys, cfg.I0(), U, kTight, true);
      const auto ode = AveragedFlow::build(sys, cfg.I0(), U, kTight, false);
      CHECK(closed.closed_form());
      CHECK_FALSE(ode.closed_form());
      for (int k = 0; k <= 40; ++k) {
        const double tau = U * k / 40.0;
        CHECK((closed.J(tau) - ode.J(tau)).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK((closed.R(tau) - ode.R(tau)).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK((closed.K(tau) - ode.K(tau)).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK((ode.R(tau) * ode.R_inverse(tau) - Matrix::Identity(3, 3)).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(closed.J(tau)[0] == cfg.P0);
        CHECK(closed.J(tau)[1] == cfg.E0);
      }
    }
  }

  TEST_CASE("finite-difference residual of K") {
    const auto cfg = j2::preset_polar();
    const auto sys = j2::make_system(cfg);
    const double U = cfg.epsilon * 60000.0;
    const auto ode = AveragedFlow::build(sys, cfg.I0(), U, kTight, false);
    for (int k = 1; k <= 100; ++k) {
      const double tau = U * k / 101.0, h = 1e-4;
      const Vector dK = (ode.K(tau + h) - ode.K(tau - h)) / (2.0 * h);
      const Vector J = ode.J(tau);
      const Vector want = sys->jac_averaged_field(J) * ode.K(tau) + sys->pbar(J);
      CHECK((dK - want).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
}

TEST_SUITE("a0 table") {
  TEST_CASE("vanishes without oscillation") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.0, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 2.0, kTight);
    const auto a0 = a0_build(*toy, flow, {8, 10});
    for (double tau : {0.0, 0.77, 2.0}) CHECK(a0.value(tau)[0] == 0.0);
  }

  TEST_CASE("node values and toy closed form") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 2.0, kTight);
    for (auto mode : {numerics::InterpMode::cubic, numerics::InterpMode::lagrange}) {
      A0Options opt{30, 12, mode, false};
      const auto a0 = a0_build(*toy, flow, opt);
      CHECK(a0.nodes().size() == 13);
      CHECK(a0.nodes().back() == 2.0);
      for (std::size_t n = 0; n < a0.nodes().size(); ++n) {
        const double tau = a0.nodes()[n];
        CHECK(a0.value(tau)[0] == doctest::Approx(a0.values(0)[n]).epsilon(1e-14));
        const double s0 = toy->s(vec1(1.0), 0.0)[0];
        const double grid = numerics::grid_max_on_torus(
                                [&](double t) {
                                  return std::abs(toy->s(vec1(toy->J(tau)), t)[0] - toy->R(tau) * s0 - toy->K(tau));
                                },
                                30)
                                .value;
        CHECK(a0.values(0)[n] == doctest::Approx(grid).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("satellite value at the origin against a fine grid") {
    const auto cfg = j2::preset_polar();
    const auto sys = j2::make_system(cfg);
    const auto flow = AveragedFlow::build(sys, cfg.I0(), cfg.U(), kTight);
    const auto a0 = a0_build(*sys, flow, {30, 100, numerics::InterpMode::cubic, false});
    const Vector I0 = cfg.I0();
    auto g = [&](double t) { return std::abs(sys->s(I0, t)[0] - sys->s(I0, 0.0)[0]); };
    double coarse = 0.0;
    for (int q = 1; q <= 30; ++q) coarse = std::max(coarse, g(2.0 * pi * q / 30.0));
    CHECK(a0.value(0.0)[0] == coarse);
    const double fine = numerics::grid_max_on_torus(g, 3000).value;
    const double deficit = fine - coarse;
    CHECK(deficit >= 0.0);
    CHECK(deficit <= 2.0 * (pi / 30.0) * (pi / 30.0) * fine);
    const auto refined = a0_build(*sys, flow, {30, 100, numerics::InterpMode::cubic, true});
    CHECK(refined.value(0.0)[0] >= coarse);
    CHECK(std::abs(refined.value(0.0)[0] - fine) < 1e-6 * fine);
  }
}

TEST_SUITE("fixed point and estimator") {
  TEST_CASE("alpha and gamma at the origin") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 1.0, kTight);
    const auto a0 = a0_build(*toy, flow);
    const double eps = 0.01;
    const Vector r0 = vec1(0.0);
    const auto bv = toy->bounds(0.3, r0);
    CHECK(alpha_eval(a0, *toy, eps, 0.3, r0)[0] == doctest::Approx(a0.value(0.3)[0] + eps * bv.b[0]));
    CHECK(alpha_eval(a0, *toy, 0.0, 0.3, r0)[0] == a0.value(0.3)[0]);
    CHECK(gamma_eval(*toy, 0.3, r0, vec1(0.0))[0] == bv.c[0]);
    CHECK_THROWS_AS(alpha_eval(a0, *toy, eps, 0.3, vec1(-1.0)), DomainError);
  }

  TEST_CASE("constant map converges after two iterations") {
    auto toy = std::make_shared<ToySystem>(0.0, 0.0, 1.0);
    // kappa = 0: a = b = 0, a0 = 0 would make the box degenerate, so build a table by hand.
    const A0Table a0({0.0, 1.0}, {{0.25, 0.25}}, numerics::InterpMode::cubic);
    const auto rep = fixed_point(*toy, a0, 0.01, {vec1(0.25), vec1(0.2)});
    CHECK(rep.converged);
    CHECK(rep.iterations == 2);
    CHECK(rep.ell0[0] == 0.25);
    CHECK(rep.hypotheses_ok());
  }

  TEST_CASE("toy fixed point and contraction rate") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 1.0, kTight);
    const auto a0 = a0_build(*toy, flow);
    const double eps = 0.05;
    const auto box = default_sigma_box(*toy, a0, eps);
    const auto rep = fixed_point(*toy, a0, eps, box);
    CHECK(rep.hypotheses_ok());
    CHECK(rep.residual < 1e-12);
    const double resub = std::abs(alpha_eval(a0, *toy, eps, 0.0, eps * rep.ell0)[0] - rep.ell0[0]);
    CHECK(resub == rep.residual);
    for (std::size_t k = 1; k < rep.step_norms.size(); ++k) {
      if (rep.step_norms[k - 1] > 1e-14) CHECK(rep.step_norms[k] <= rep.contraction * rep.step_norms[k - 1] + 1e-15);
    }
  }

  TEST_CASE("hypothesis failure is flagged") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 1.0, kTight);
    const auto a0 = a0_build(*toy, flow);
    // box far from the fixed point
    const auto rep = fixed_point(*toy, a0, 0.05, {vec1(10.0), vec1(1.0)});
    CHECK(rep.converged);
    CHECK_FALSE(rep.ell0_in_box);
    CHECK_FALSE(rep.self_map_ok);
    CHECK_FALSE(rep.hypotheses_ok());
  }

  TEST_CASE("toy envelope dominates the rescaled error of a direct integration") {
    const double lambda = 0.5, kappa = 0.8, I0 = 1.0, eps = 0.02, U = 1.0;
    auto toy = std::make_shared<ToySystem>(lambda, kappa, I0);
    const auto flow = AveragedFlow::build(toy, vec1(I0), U, kTight);
    const auto a0 = a0_build(*toy, flow, {30, 50, numerics::InterpMode::cubic, true});
    const auto fp = fixed_point(*toy, a0, eps, default_sigma_box(*toy, a0, eps));
    REQUIRE(fp.hypotheses_ok());
    const auto est = estimator_ode(*toy, a0, eps, fp.ell0, {{1e-10, 1e-10}, InverseMode::exact, 256});
    REQUIRE(est.completed);
    CHECK(est.n(0.0)[0] == fp.ell0[0]);
    CHECK(est.m(0.0)[0] == 0.0);
    for (std::size_t k = 1; k < est.sample_tau.size(); ++k) {
      CHECK(est.sample_m[k][0] >= est.sample_m[k - 1][0]);
    }
    // dI/dt = eps f(I, 2 pi t) on t in [0, U/eps]
    const auto direct = numerics::integrate_ivp(
        [&](double t, const Vector& y, Vector& dy) { dy = eps * toy->field(y, 2.0 * pi * t); }, vec1(I0), 0.0, U / eps,
        kTight);
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double t = (U / eps) * k / 2000.0;
      const double L = std::abs(direct.curve.evaluate(t)[0] - toy->J(eps * t)) / eps;
      worst = std::max(worst, L / est.n(eps * t)[0]);
    }
    CHECK(worst <= 1.0);
    CHECK(worst > 0.1);  // the envelope is not vacuous
  }

  TEST_CASE("estimator blow-up is recorded") {
    auto toy = std::make_shared<ToySystem>(0.5, 0.8, 1.0);
    const auto flow = AveragedFlow::build(toy, vec1(1.0), 1.0, kTight);
    const auto a0 = a0_build(*toy, flow);
    // eps a > 1 makes 1 - eps d alpha/dr singular: the determinant guard trips
    const auto est = estimator_ode(*toy, a0, 50.0, vec1(1e3), {{1e-8, 1e-8}, InverseMode::exact, 16});
    CHECK_FALSE(est.completed);
    CHECK_FALSE(est.failure.empty());
    CHECK(est.reached < 1.0);
  }
}
