#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "avgbound/averaging/a0.hpp"
#include "avgbound/averaging/averaged_flow.hpp"
#include "avgbound/averaging/estimator.hpp"
#include "avgbound/j2/j2_system.hpp"
#include "avgbound/kepler/kepler.hpp"
#include "avgbound/numerics/errors.hpp"
#include "avgbound/numerics/quadrature.hpp"
#include "../support/bound_formulas.hpp"

using namespace avgbound;
using namespace avgbound::j2;
using std::numbers::pi;
using avgbound::testing::a_matrix;
using avgbound::testing::b_vector;

namespace {

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

double inf_norm(const Eigen::Matrix3d& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

TEST_SUITE("closed forms") {
  TEST_CASE("s has zero mean and generates the oscillating field") {
    const Vector I = v3(3.0, 0.6640, 0.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(numerics::periodic_average([&](double t) { return s_closed(3.0, 0.6640, 0.0, t)[i]; })) < 1e-10);
    }
    const double th = 1.2, h = 1e-6;
    const Eigen::Vector3d ds = 2.0 * pi * (s_closed(3.0, 0.6640, 0.0, th + h) - s_closed(3.0, 0.6640, 0.0, th - h)) /
                               (2.0 * h);
    const Eigen::Vector3d want = kepler::j2_field(3.0, 0.6640, 0.0, th) - Eigen::Vector3d(0, 0, -3.0 * pi / 9.0);
    CHECK((ds - want).lpNorm<Eigen::Infinity>() < 1e-6);
  }

  TEST_CASE("s equals z minus its mean") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uP(1.0, 4.0), uE(0.05, 0.95), uY(-pi, pi), uT(0.0, 2.0 * pi);
    for (int k = 0; k < 100; ++k) {
      const double P = uP(rng), E = uE(rng), Y = uY(rng), th = uT(rng);
      const double fbarY = -3.0 * pi / (P * P);
      auto z = [&](double t, int i) {
        return numerics::gauss_legendre(
                   [&](double x) { return kepler::j2_field(P, E, Y, x)[i] - (i == 2 ? fbarY : 0.0); }, 0.0, t, 40) /
               (2.0 * pi);
      };
      for (int i = 0; i < 3; ++i) {
        const double zbar = numerics::periodic_average([&](double t) { return z(t, i); }, 1e-12);
        CHECK(std::abs(s_closed(P, E, Y, th)[i] - (z(th, i) - zbar)) < 1e-8);
      }
    }
  }

  TEST_CASE("pbar, Jacobian and Hessian") {
    const auto at_zero = pbar_jac_hess(3.0, 0.6640, 0.0);
    CHECK(at_zero.pbar[kP] == 0.0);
    CHECK(std::abs(at_zero.jac(kY, kP) - 0.69813) < 1e-5);
    CHECK(std::abs(at_zero.jac(kY, kP) - 6.0 * pi / 27.0) < 1e-10);
    CHECK(at_zero.hess_YPP == doctest::Approx(-18.0 * pi / 81.0));
    Eigen::Matrix3d mask = Eigen::Matrix3d::Ones();
    mask(kY, kP) = 0.0;
    CHECK(at_zero.jac.cwiseProduct(mask).isZero(0.0));
  }

  TEST_CASE("pbar is the angle mean of (ds/dI) f") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uP(1.0, 4.0), uE(0.1, 0.9), uY(-pi, pi);
    for (int k = 0; k < 50; ++k) {
      const double P = uP(rng), E = uE(rng), Y = uY(rng);
      const Eigen::Vector3d pb = pbar_jac_hess(P, E, Y).pbar;
      for (int i = 0; i < 3; ++i) {
        const double got = numerics::periodic_average([&](double t) {
          // directional five-point difference of s along f
          const Eigen::Vector3d f = kepler::j2_field(P, E, Y, t);
          const double h = 1e-4 / std::max(1.0, f.lpNorm<Eigen::Infinity>());
          auto sl = [&](double x) { return s_closed(P + x * f[0], E + x * f[1], Y + x * f[2], t)[i]; };
          return (-sl(2 * h) + 8 * sl(h) - 8 * sl(-h) + sl(-2 * h)) / (12 * h);
        }, 1e-10);
        CHECK(std::abs(got - pb[i]) < 1e-7);
      }
    }
  }

  TEST_CASE("R and K") {
    const auto cfg = preset_polar();
    const auto z = closed_R_K(cfg, 0.0);
    CHECK(z.R == Eigen::Matrix3d::Identity());
    CHECK(z.K.isZero(0.0));
    for (double tau : {0.3, 1.6, 32.7}) {
      const auto rk = closed_R_K(cfg, tau);
      CHECK(rk.R * rk.R_inverse == Eigen::Matrix3d::Identity());
      CHECK(rk.R(kY, kP) == doctest::Approx(6.0 * pi * tau / 27.0));
    }
    CHECK(std::abs(closed_R_K(cfg, 3.0).K[kP]) < 1e-15);
  }

  TEST_CASE("closed-form v^P and u^P against nested quadrature") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uP(1.0, 4.0), uE(0.1, 0.9), uY(-pi, pi), uT(0.0, 2.0 * pi);
    for (int k = 0; k < 50; ++k) {
      const double P = uP(rng), E = uE(rng), Y = uY(rng), th = uT(rng);
      const double v = numerics::gauss_legendre([&](double x) { return s_closed(P, E, Y, x)[kP]; }, 0.0, th, 40) /
                       (2.0 * pi);
      CHECK(std::abs(v - vP_closed(P, E, Y, th)) < 1e-12);
      // u^P = (dw^P/dI) f with w^P the integral of p^P - pbar^P; p by directional differences
      auto pP = [&](double P_, double E_, double Y_, double x) {
        const Eigen::Vector3d f = kepler::j2_field(P_, E_, Y_, x);
        const double h = 1e-4;
        auto sP = [&](double t) { return s_closed(P_ + t * f[0], E_ + t * f[1], Y_ + t * f[2], x)[kP]; };
        return (-sP(2 * h) + 8 * sP(h) - 8 * sP(-h) + sP(-2 * h)) / (12 * h) - pbar_jac_hess(P_, E_, Y_).pbar[kP];
      };
      auto wP = [&](double P_, double E_, double Y_) {
        return numerics::gauss_legendre([&](double x) { return pP(P_, E_, Y_, x); }, 0.0, th, 40) / (2.0 * pi);
      };
      const Eigen::Vector3d f = kepler::j2_field(P, E, Y, th);
      const double h = 1e-4;
      auto wl = [&](double t) { return wP(P + t * f[0], E + t * f[1], Y + t * f[2]); };
      const double u = (-wl(2 * h) + 8 * wl(h) - 8 * wl(-h) + wl(-2 * h)) / (12 * h);
      const double want = uP_closed(P, E, Y, th);
      CHECK(std::abs(u - want) < 1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_SUITE("bound table") {
  TEST_CASE("values at the origin") {
    const auto cfg = preset_polar();
    const auto sys = make_system(cfg);
    const auto bv = sys->bounds(0.0, Vector::Zero(3));
    CHECK(std::abs(bv.a(kP, kY) - 0.88533) < 1e-5);
    CHECK(std::abs(bv.a(kP, kY) - 4.0 * 0.6640 / 3.0) < 1e-12);
    CHECK(std::abs(bv.e[kY](kP, kP) - 0.69813) < 1e-5);
    CHECK(std::abs(bv.e[kY](kP, kP) - 18.0 * pi / 81.0) < 1e-10);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          if (i == kY && j == kP && k == kP) continue;
          CHECK(bv.e[i](j, k) == 0.0);
        }
      }
      CHECK(bv.e[i] == bv.e[i].transpose());
    }
  }

  TEST_CASE("independent re-evaluation of a and b") {
    for (const auto& cfg : {preset_polar(), preset_cosb()}) {
      const auto sys = make_system(cfg);
      std::mt19937_64 rng(2);
      std::uniform_real_distribution<double> u(0.0, 0.95);
      const double capE = std::min(cfg.E0, 1.0 - cfg.E0);
      for (int k = 0; k < 200; ++k) {
        const double rP = u(rng) * cfg.P0, rE = u(rng) * capE;
        const auto bv = sys->bounds(0.7, v3(rP, rE, 5.0));
        const Eigen::Matrix3d a = a_matrix(cfg.P0, cfg.E0, rP, rE);
        const Eigen::Vector3d b = b_vector(cfg.P0, cfg.E0, rP, rE);
        for (int i = 0; i < 3; ++i) {
          CHECK(bv.b[i] == doctest::Approx(b[i]).epsilon(1e-13));
          for (int j = 0; j < 3; ++j) CHECK(bv.a(i, j) == doctest::Approx(a(i, j)).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("nonnegative and nondecreasing in r") {
    for (const auto& cfg : {preset_polar(), preset_cosb()}) {
      const auto sys = make_system(cfg);
      const double capE = std::min(cfg.E0, 1.0 - cfg.E0);
      auto flat = [](const averaging::BoundValues& bv) {
        std::vector<double> out;
        for (int i = 0; i < 3; ++i) {
          out.push_back(bv.b[i]);
          out.push_back(bv.c[i]);
          for (int j = 0; j < 3; ++j) {
            out.push_back(bv.a(i, j));
            out.push_back(bv.d(i, j));
            for (int k = 0; k < 3; ++k) out.push_back(bv.e[i](j, k));
          }
        }
        return out;
      };
      const int n = 20;
      for (int p = 0; p < n; ++p) {
        for (int e = 0; e < n; ++e) {
          const double rP = 0.98 * cfg.P0 * p / n, rE = 0.98 * capE * e / n;
          const auto here = flat(sys->bounds(0.0, v3(rP, rE, 0.0)));
          const auto upP = flat(sys->bounds(0.0, v3(0.98 * cfg.P0 * (p + 1) / n, rE, 0.0)));
          const auto upE = flat(sys->bounds(0.0, v3(rP, 0.98 * capE * (e + 1) / n, 0.0)));
          for (std::size_t q = 0; q < here.size(); ++q) {
            CHECK(here[q] >= 0.0);
            CHECK(upP[q] >= here[q]);
            CHECK(upE[q] >= here[q]);
          }
        }
      }
    }
  }

  TEST_CASE("caps") {
    const auto cfg = preset_cosb();
    const auto sys = make_system(cfg);
    const Vector rho = sys->caps(1.0);
    CHECK(rho[kP] == cfg.P0);
    CHECK(rho[kE] == doctest::Approx(1.0 - cfg.E0));
    CHECK(std::isinf(rho[kY]));
    CHECK_THROWS_AS(sys->bounds(0.0, v3(cfg.P0, 0.0, 0.0)), DomainError);
    CHECK_THROWS_AS(sys->bounds(0.0, v3(0.0, 0.2, 0.0)), DomainError);
    CHECK_THROWS_AS(sys->bounds(0.0, v3(-0.1, 0.0, 0.0)), DomainError);
    CHECK_NOTHROW(sys->bounds(0.0, v3(0.0, 0.0, 1e9)));
  }

  TEST_CASE("R and P bound matrices") {
    const auto cfg = preset_polar();
    const auto sys = make_system(cfg);
    for (double tau : {0.0, 0.5, 30.0}) {
      const auto rk = closed_R_K(cfg, tau);
      CHECK(Eigen::Matrix3d(sys->R_bound(tau)) == rk.R.cwiseAbs());
      CHECK(Eigen::Matrix3d(sys->P_bound(tau)) == rk.R_inverse.cwiseAbs());
      const double h = 1e-5;
      const Matrix fd = (sys->R_bound(tau + h) - sys->R_bound(tau + h / 2)) / (h / 2);
      CHECK((sys->R_bound_derivative(tau) - fd).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_SUITE("alpha and inverse") {
  TEST_CASE("alpha at the origin and a small radius") {
    const auto cfg = preset_polar();
    const auto sys = make_system(cfg);
    const auto flow = averaging::AveragedFlow::build(sys, cfg.I0(), cfg.U(), {1e-12, 1e-12});
    const auto a0 = averaging::a0_build(*sys, flow);
    const double eps = cfg.epsilon;
    const Vector zero = Vector::Zero(3);
    const Vector at0 = averaging::alpha_eval(a0, *sys, eps, 0.0, zero);
    const Eigen::Vector3d b0 = b_vector(cfg.P0, cfg.E0, 0.0, 0.0);
    for (int i = 0; i < 3; ++i) CHECK(at0[i] == doctest::Approx(a0.value(0.0)[i] + eps * b0[i]).epsilon(1e-14));
    CHECK(averaging::alpha_eval(a0, *sys, 0.0, 0.0, zero) == a0.value(0.0));
    const Eigen::Vector3d r(0.01, 0.01, 0.01);
    const Eigen::Vector3d want =
        Eigen::Vector3d(a0.value(0.0)) + a_matrix(3.0, 0.6640, 0.01, 0.01) * r + eps * b_vector(3.0, 0.6640, 0.01, 0.01);
    const Vector got = averaging::alpha_eval(a0, *sys, eps, 0.0, Vector(r));
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
  }

  TEST_CASE("gamma has a single quadratic term") {
    const auto cfg = preset_cosb();
    const auto sys = make_system(cfg);
    const Vector r = v3(0.1, 0.05, 0.0), ell = v3(2.0, 3.0, 4.0);
    const auto bv = sys->bounds(0.0, r);
    CHECK(averaging::gamma_eval(bv, Vector::Zero(3)) == bv.c);
    const Vector quad = averaging::gamma_eval(bv, ell) - bv.c - bv.d * ell;
    CHECK(quad[kP] == doctest::Approx(0.0));
    CHECK(quad[kE] == doctest::Approx(0.0));
    CHECK(quad[kY] == doctest::Approx(0.5 * bv.e[kY](kP, kP) * 4.0));
  }

  TEST_CASE("analytic partials") {
    const auto cfg = preset_polar();
    const auto m = inverse_matrices(cfg.P0, cfg.E0);
    CHECK((alpha_partials(cfg, 0.0, Eigen::Vector3d::Zero()) - m.M).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(std::abs(m.M(kP, kP) - 0.62844) < 1e-5);
    CHECK(std::abs(m.M(kP, kP) - (3.0 + 4.0 * 0.6640) / 9.0) < 1e-10);
    CHECK(m.N[kY].col(kY).isZero(0.0));

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 0.8), ue(0.0, 1e-2);
    for (const auto& c : {preset_polar(), preset_cosb()}) {
      const auto sys = make_system(c);
      const double capE = std::min(c.E0, 1.0 - c.E0);
      for (int k = 0; k < 1000; ++k) {
        const double eps = ue(rng);
        const Eigen::Vector3d r(u(rng) * c.P0, u(rng) * capE, u(rng));
        const Eigen::Matrix3d an = alpha_partials(c, eps, r);
        auto lin = [&](const Eigen::Vector3d& x) {
          return Eigen::Vector3d(a_matrix(c.P0, c.E0, x[0], x[1]) * x + eps * b_vector(c.P0, c.E0, x[0], x[1]));
        };
        for (int j = 0; j < 3; ++j) {
          Eigen::Vector3d h = Eigen::Vector3d::Zero();
          h[j] = 1e-6 * std::max(1.0, r[j]);
          const Eigen::Vector3d fd = (lin(r + h) - lin(r - h)) / (2.0 * h[j]);
          for (int i = 0; i < 3; ++i) CHECK(std::abs(an(i, j) - fd[i]) < 1e-6 * std::max(1.0, std::abs(fd[i])));
        }
      }
    }
  }

  TEST_CASE("approximate inverse is third order") {
    for (const auto& cfg : {preset_polar(), preset_cosb()}) {
      CHECK(approx_inverse(cfg, 0.0, Eigen::Vector3d::Zero()) == Eigen::Matrix3d::Identity());
      std::vector<double> res;
      for (double eps : {1e-3, 5e-4, 2.5e-4}) {
        const Eigen::Vector3d r = eps * Eigen::Vector3d::Ones();
        const Eigen::Matrix3d A = Eigen::Matrix3d::Identity() - eps * alpha_partials(cfg, eps, r);
        res.push_back((A * approx_inverse(cfg, eps, r) - Eigen::Matrix3d::Identity()).lpNorm<Eigen::Infinity>());
        CHECK((A * exact_inverse(cfg, eps, r) - Eigen::Matrix3d::Identity()).lpNorm<Eigen::Infinity>() < 1e-14);
      }
      for (std::size_t k = 1; k < res.size(); ++k) {
        const double ratio = res[k - 1] / res[k];
        CHECK(ratio >= 6.0);
        CHECK(ratio <= 10.0);
      }
    }
  }

  TEST_CASE("second-order matrix equals Z + M^2") {
    for (const auto& cfg : {preset_polar(), preset_cosb()}) {
      const auto m = inverse_matrices(cfg.P0, cfg.E0);
      // Z = db/dr at r = 0 by five-point differences of the b majorants
      Eigen::Matrix3d Z = Eigen::Matrix3d::Zero();
      const double h = 1e-3;
      auto b_at = [&](double rP, double rE) { return b_vector(cfg.P0, cfg.E0, rP, rE); };
      for (int j = 0; j < 2; ++j) {
        auto g = [&](double t) { return j == 0 ? b_at(t, 0.0) : b_at(0.0, t); };
        Z.col(j) = (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
      }
      const Eigen::Matrix3d Q = Z + m.M * m.M;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(std::abs(m.Q(i, j) - Q(i, j)) < 1e-9 * std::abs(Q(i, j)));
      }
    }
  }

  TEST_CASE("system inverse provider") {
    const auto cfg = preset_cosb();
    const auto sys = make_system(cfg);
    const Eigen::Vector3d r(0.01, 0.005, 0.3);
    const Matrix ap = sys->estimator_inverse(0.0, Vector(r), cfg.epsilon, false);
    const Matrix ex = sys->estimator_inverse(0.0, Vector(r), cfg.epsilon, true);
    CHECK(ap == approx_inverse(cfg, cfg.epsilon, r));
    CHECK(ex == exact_inverse(cfg, cfg.epsilon, r));
    CHECK(inf_norm(ex - Eigen::Matrix3d::Identity()) < 0.1);
    const Eigen::Vector3d small = cfg.epsilon * Eigen::Vector3d::Ones();
    CHECK((approx_inverse(cfg, cfg.epsilon, small) - exact_inverse(cfg, cfg.epsilon, small)).lpNorm<Eigen::Infinity>() <
          1e-6);
  }
}

TEST_SUITE("satellite pipeline") {
  struct Pipeline {
    std::shared_ptr<const J2System> sys;
    std::optional<averaging::A0Table> a0;
    averaging::FixedPointReport fp;
  };

  Pipeline prepare(const J2Config& cfg) {
    Pipeline p;
    p.sys = make_system(cfg);
    const auto flow = averaging::AveragedFlow::build(p.sys, cfg.I0(), cfg.U(), {1e-12, 1e-12});
    p.a0 = averaging::a0_build(*p.sys, flow, {cfg.Q, cfg.N, cfg.interp, cfg.grid_refine});
    p.fp = averaging::fixed_point(*p.sys, *p.a0, cfg.epsilon, averaging::default_sigma_box(*p.sys, *p.a0, cfg.epsilon));
    return p;
  }

  TEST_CASE("fixed point of the polar preset") {
    const auto p = prepare(preset_polar());
    CHECK(p.fp.hypotheses_ok());
    CHECK(p.fp.residual < 1e-12);
    CHECK(p.fp.iterations < 10);
    CHECK(p.fp.contraction < 1.0);
    const Vector resub = averaging::alpha_eval(*p.a0, *p.sys, 5.457e-4, 0.0, 5.457e-4 * p.fp.ell0) - p.fp.ell0;
    CHECK(resub.lpNorm<Eigen::Infinity>() == p.fp.residual);
  }

  TEST_CASE("estimator of the polar preset is stable under tolerance refinement") {
    const auto cfg = preset_polar();
    const auto p = prepare(cfg);
    const auto coarse = averaging::estimator_ode(*p.sys, *p.a0, cfg.epsilon, p.fp.ell0, {{1e-8, 1e-8}});
    const auto fine = averaging::estimator_ode(*p.sys, *p.a0, cfg.epsilon, p.fp.ell0, {{1e-9, 1e-9}});
    REQUIRE(coarse.completed);
    REQUIRE(fine.completed);
    CHECK(coarse.n(0.0) == p.fp.ell0);
    CHECK(coarse.m(0.0).isZero(0.0));
    const Vector a = coarse.n(cfg.U()), b = fine.n(cfg.U());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 5e-3 * b[i]);
    for (std::size_t k = 0; k < coarse.sample_tau.size(); ++k) {
      const Vector rho = p.sys->caps(coarse.sample_tau[k]);
      for (int i = 0; i < 3; ++i) {
        CHECK(coarse.sample_m[k][i] >= 0.0);
        if (k > 0) CHECK(coarse.sample_m[k][i] >= coarse.sample_m[k - 1][i]);
        CHECK(cfg.epsilon * coarse.sample_n[k][i] < rho[i]);
        CHECK(coarse.sample_n[k][i] > 0.0);
      }
    }
    for (int i = 0; i < 2; ++i) CHECK(coarse.min_cap_margin[i] > 0.0);
    CHECK(coarse.min_determinant > 0.0);
  }

  TEST_CASE("exact inverse changes the envelope only slightly") {
    for (auto cfg : {preset_polar(), preset_cosb()}) {
      const auto p = prepare(cfg);
      const auto ap = averaging::estimator_ode(*p.sys, *p.a0, cfg.epsilon, p.fp.ell0, {});
      const auto ex =
          averaging::estimator_ode(*p.sys, *p.a0, cfg.epsilon, p.fp.ell0, {{1e-8, 1e-8}, averaging::InverseMode::exact});
      REQUIRE(ap.completed);
      REQUIRE(ex.completed);
      const Vector a = ap.n(cfg.U()), b = ex.n(cfg.U());
      for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-3 * b[i]);
    }
  }

  TEST_CASE("configuration invariants") {
    J2Config cfg = preset_polar();
    CHECK_NOTHROW(cfg.validate());
    cfg.E0 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = preset_polar();
    cfg.Q = 1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = preset_polar();
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    const auto c = preset_cosb();
    CHECK(c.P0 == 1.973);
    CHECK(c.E0 == 0.8817);
    CHECK(c.Y0 == 0.9600);
    CHECK(c.epsilon == 5.457e-4);
  }
}
