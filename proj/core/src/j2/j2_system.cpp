#include "avgbound/j2/j2_system.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::j2 {

using std::cos;
using std::sin;
using Eigen::Matrix3d;
using Eigen::Vector3d;
constexpr double pi = std::numbers::pi;

void J2Config::validate() const {
  if (!(P0 > 0.0)) throw DomainError("config: P0 must be positive");
  if (!(E0 > 0.0 && E0 < 1.0)) throw DomainError("config: E0 must lie in (0, 1)");
  if (!std::isfinite(Y0)) throw DomainError("config: Y0 must be finite");
  if (!(epsilon > 0.0)) throw DomainError("config: epsilon must be positive");
  if (!(orbits > 0.0)) throw DomainError("config: orbits must be positive");
  if (Q < 2 || N < 2) throw DomainError("config: theta_grid and tau_grid must be at least 2");
  if (!(est_abs_tol > 0.0 && est_rel_tol > 0.0 && rk_abs_tol > 0.0 && rk_rel_tol > 0.0)) {
    throw DomainError("config: tolerances must be positive");
  }
  if (samples < 2) throw DomainError("config: sample_count must be at least 2");
  planet.validate();
}

J2Config preset_polar() {
  J2Config c;
  c.P0 = 3.000;
  c.E0 = 0.6640;
  c.Y0 = 0.0000;
  return c;
}

J2Config preset_cosb() {
  J2Config c;
  c.P0 = 1.973;
  c.E0 = 0.8817;
  c.Y0 = 0.9600;
  return c;
}

// Majorants -----------------------------------------------------------------

namespace {

double poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double dpoly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * c[k];
  return acc;
}

}  // namespace

double Majorant::value(double P0, double E0, double rP, double rE) const {
  if (coef == 0.0) return 0.0;
  const double Pm = P0 - rP, Pp = P0 + rP, Ep = E0 + rE, Em = E0 - rE;
  const double ratio = Pp / P0;
  const double num = poly(p0, Ep) + (p1.empty() ? 0.0 : ratio * ratio * ratio * poly(p1, Ep));
  return coef * num / (std::pow(Pm, p) * std::pow(Em, q));
}

std::array<double, 2> Majorant::gradient(double P0, double E0, double rP, double rE) const {
  if (coef == 0.0) return {0.0, 0.0};
  const double Pm = P0 - rP, Pp = P0 + rP, Ep = E0 + rE, Em = E0 - rE;
  const double den = std::pow(Pm, p) * std::pow(Em, q);
  const double v = value(P0, E0, rP, rE);
  const double ratio = Pp / P0;
  double dP = p * v / Pm;
  double dE = q * v / Em + coef * dpoly(p0, Ep) / den;
  if (!p1.empty()) {
    dP += coef * 3.0 * ratio * ratio / P0 * poly(p1, Ep) / den;
    dE += coef * ratio * ratio * ratio * dpoly(p1, Ep) / den;
  }
  return {dP, dE};
}

const BoundTable& bound_table() {
  static const BoundTable table = [] {
    BoundTable t;
    t.a[kP][kP] = {1.0, {3, 4}, {}, 2, 0};
    t.a[kP][kE] = {1.0, {4}, {}, 1, 0};
    t.a[kP][kY] = {1.0, {0, 4}, {}, 1, 0};
    t.a[kE][kP] = {0.25, {32, 45, 32}, {}, 3, 0};
    t.a[kE][kE] = {0.125, {45, 64}, {}, 2, 0};
    t.a[kE][kY] = {0.25, {16, 15, 20}, {}, 2, 0};
    t.a[kY][kP] = {0.25, {32, 33, 29}, {}, 3, 1};
    t.a[kY][kE] = {0.125, {32, 0, 29}, {}, 2, 2};
    t.a[kY][kY] = {0.125, {32, 30, 37}, {}, 2, 1};

    t.b[kP] = {1.0 / 8, {54, 112, 33}, {}, 3, 0};
    t.b[kE] = {1.0 / 512, {6112, 10832, 6940, 11372, 1441}, {}, 4, 1};
    t.b[kY] = {1.0 / 256, {3520, 16384, 9340, 8940, 1861}, {0, 0, 1152, 4608}, 4, 2};

    t.c[kP] = {3 * pi / 8, {504, 1024, 713, 124}, {}, 5, 0};
    t.c[kE] = {3 * pi / 2048, {148736, 738384, 1062656, 1220344, 675146, 336591, 26855}, {}, 6, 2};
    t.c[kY] = {pi / 1024,
               {370944, 2214336, 5434752, 4927104, 2945040, 1225668, 147777},
               {0, 0, 0, 231936, 442368, 196608},
               6,
               3};

    t.d[kP][kP] = {9 * pi / 2, {0, 0, 1}, {}, 4, 0};
    t.d[kP][kE] = {3 * pi, {0, 1}, {}, 3, 0};
    t.d[kP][kY] = {3 * pi, {0, 0, 1}, {}, 3, 0};
    t.d[kE][kP] = {3 * pi, {0, 10, 0, 1}, {}, 5, 0};
    t.d[kE][kE] = {3 * pi / 4, {10, 0, 3}, {}, 4, 0};
    t.d[kE][kY] = {3 * pi / 2, {0, 10, 0, 1}, {}, 4, 0};
    t.d[kY][kP] = {3 * pi / 4, {74, 0, 35}, {}, 5, 0};
    t.d[kY][kE] = {105 * pi / 8, {0, 1}, {}, 4, 0};
    t.d[kY][kY] = {15 * pi / 4, {4, 0, 1}, {}, 4, 0};

    t.e_YPP = {18 * pi, {1}, {}, 4, 0};
    return t;
  }();
  return table;
}

InverseMatrices inverse_matrices(double P0, double E0) {
  const double P = P0, E = E0, P2 = P * P, P3 = P2 * P, P4 = P3 * P, P5 = P4 * P;
  const double E2 = E * E, E3 = E2 * E, E4 = E3 * E;
  InverseMatrices m;
  m.M << (3 + 4 * E) / P2, 4 / P, 4 * E / P,
      (32 + 45 * E + 32 * E2) / (4 * P3), (45 + 64 * E) / (8 * P2), (16 + 15 * E + 20 * E2) / (4 * P2),
      (32 + 33 * E + 29 * E2) / (4 * E * P3), (32 + 29 * E2) / (8 * E2 * P2), (32 + 30 * E + 37 * E2) / (8 * E * P2);

  m.N[kP] << 4 * (3 + 4 * E) / P3, 8 / P2, 4 * E / P2,
      3 * (32 + 45 * E + 32 * E2) / (2 * P4), (45 + 64 * E) / (2 * P3), (16 + 15 * E + 20 * E2) / (2 * P3),
      3 * (32 + 33 * E + 29 * E2) / (2 * E * P4), (32 + 33 * E + 58 * E2) / (2 * E2 * P3),
      (32 + 30 * E + 37 * E2) / (4 * E * P3);
  m.N[kE] << 8 / P2, 0, 4 / P,
      (45 + 64 * E) / (2 * P3), 16 / P2, 5 * (3 + 8 * E) / (4 * P2),
      (32 + 33 * E + 58 * E2) / (2 * E2 * P3), (16 + 29 * E2) / (E3 * P2), (32 + 60 * E + 111 * E2) / (8 * E2 * P2);
  m.N[kY] << 4 * E / P2, 4 / P, 0,
      (16 + 15 * E + 20 * E2) / (2 * P3), 5 * (3 + 8 * E) / (4 * P2), 0,
      (32 + 30 * E + 37 * E2) / (4 * E * P3), (32 + 60 * E + 111 * E2) / (8 * E2 * P2), 0;

  const double QEP = 10208 + 27728 * E + 44440 * E2 + 46244 * E3 + 18369 * E4;
  const double QEE = 14304 + 29344 * E + 71068 * E2 + 121568 * E3 + 65637 * E4;
  const double QEY = 512 + 1680 * E + 4405 * E2 + 4455 * E3 + 3044 * E4;
  const double QYP = 7616 + 24832 * E + 25096 * E2 + 27300 * E3 + 7719 * E4;
  const double QYE = 5568 + 29376 * E + 33400 * E2 + 42444 * E3 + 15153 * E4;
  const double QYY = 2048 + 2880 * E + 7524 * E2 + 5202 * E3 + 4385 * E4;
  m.Q << (746 + 1152 * E + 715 * E2) / (8 * P4), (64 + 194 * E + 283 * E2) / (4 * E * P3),
      (64 + 84 * E + 109 * E2) / (2 * P3),
      QEP / (128 * E * P5), QEE / (512 * E2 * P4), QEY / (32 * E * P4),
      QYP / (64 * E2 * P5), QYE / (128 * E3 * P4), QYY / (64 * E2 * P4);
  return m;
}

// Closed forms ----------------------------------------------------------------

Vector3d s_closed(double P, double E, double Y, double th) {
  const double E2 = E * E;
  const double sP = -1.0 / P * (3 * E * cos(th + Y) + 3 * cos(2 * th) + E * cos(3 * th - Y));
  const double sE = -1.0 / (16 * P * P) *
                    (3 * E2 * cos(th - 3 * Y) + (24 + 6 * E2) * cos(th - Y) + (12 + 33 * E2) * cos(th + Y) +
                     12 * E * cos(2 * th - 2 * Y) + 60 * E * cos(2 * th) + 2 * E2 * cos(3 * th - 3 * Y) +
                     (28 + 17 * E2) * cos(3 * th - Y) + 18 * E * cos(4 * th - 2 * Y) + 3 * E2 * cos(5 * th - 3 * Y));
  const double sY = -1.0 / (16 * P * P * E) *
                    (3 * E2 * sin(th - 3 * Y) + (24 + 18 * E2) * sin(th - Y) - (12 - 21 * E2) * sin(th + Y) +
                     12 * E * sin(2 * th - 2 * Y) + 36 * E * sin(2 * th) + 2 * E2 * sin(3 * th - 3 * Y) +
                     (28 + 11 * E2) * sin(3 * th - Y) + 18 * E * sin(4 * th - 2 * Y) + 3 * E2 * sin(5 * th - 3 * Y));
  return {sP, sE, sY};
}

PbarJacHess pbar_jac_hess(double P, double E, double Y) {
  const double P3 = P * P * P, P4 = P3 * P, E2 = E * E;
  PbarJacHess out;
  out.pbar = {-3 * pi * E2 / (2 * P3) * sin(2 * Y), 3 * pi / (4 * P4) * (10 * E - E2 * E) * sin(2 * Y),
              3 * pi / (16 * P4) * (34 + 25 * E2 + (40 + 10 * E2) * cos(2 * Y))};
  out.jac = Matrix3d::Zero();
  out.jac(kY, kP) = 6 * pi / P3;
  out.hess_YPP = -18 * pi / P4;
  return out;
}

ClosedRK closed_R_K(const J2Config& cfg, double tau) {
  const double P0 = cfg.P0, E0 = cfg.E0, Y0 = cfg.Y0;
  const double P02 = P0 * P0, E02 = E0 * E0;
  ClosedRK out;
  out.R = Matrix3d::Identity();
  out.R(kY, kP) = 6 * pi * tau / (P02 * P0);
  out.R_inverse = Matrix3d::Identity();
  out.R_inverse(kY, kP) = -6 * pi * tau / (P02 * P0);
  const double arg = 2 * Y0 - 6 * pi / P02 * tau;
  const double dc = cos(2 * Y0) - cos(arg);
  out.K = {E02 / (4 * P0) * dc, -(10 * E0 - E02 * E0) / (8 * P02) * dc,
           3 * pi / (16 * P02 * P02) * (34 + 25 * E02 + 8 * E02 * cos(2 * Y0)) * tau +
               (20 + E02) / (16 * P02) * (sin(2 * Y0) - sin(arg))};
  return out;
}

double vP_closed(double P, double E, double Y, double th) {
  return 1.0 / (12 * pi * P) * (16 * E * sin(Y) - 18 * E * sin(th + Y) - 9 * sin(2 * th) - 2 * E * sin(3 * th - Y));
}

double uP_closed(double P, double E, double Y, double th) {
  const double E2 = E * E, E3 = E2 * E;
  const double P5 = P * P * P * P * P;
  const double br =
      -512 * E * sin(Y) + 824 * E2 * sin(2 * Y) - 103 * E3 * sin(th - 3 * Y) + 64 * E2 * sin(th - 2 * Y) -
      (1296 * E - 36 * E3) * sin(th - Y) - (768 - 1152 * E2) * sin(th) + (3524 * E + 567 * E3) * sin(th + Y) +
      960 * E2 * sin(th + 2 * Y) - 24 * E3 * sin(th + 3 * Y) - 576 * E2 * sin(2 * th - 2 * Y) +
      2048 * E * sin(2 * th - Y) + (4576 + 1992 * E2) * sin(2 * th) + 1024 * E * sin(2 * th + Y) -
      744 * E2 * sin(2 * th + 2 * Y) + 36 * E3 * sin(3 * th - 3 * Y) + 1216 * E2 * sin(3 * th - 2 * Y) +
      (3180 * E + 521 * E3) * sin(3 * th - Y) - (1792 - 640 * E2) * sin(3 * th) -
      (1264 * E + 172 * E3) * sin(3 * th + Y) - 27 * E3 * sin(3 * th + 3 * Y) + 560 * E2 * sin(4 * th - 2 * Y) -
      1536 * E * sin(4 * th - Y) + (256 - 912 * E2) * sin(4 * th) - 336 * E2 * sin(4 * th + 2 * Y) +
      57 * E3 * sin(5 * th - 3 * Y) - 320 * E2 * sin(5 * th - 2 * Y) + (288 * E - 144 * E3) * sin(5 * th - Y) -
      (900 * E + 115 * E3) * sin(5 * th + Y) + 88 * E2 * sin(6 * th - 2 * Y) - (672 + 696 * E2) * sin(6 * th) +
      4 * E3 * sin(7 * th - 3 * Y) - (812 * E + 133 * E3) * sin(7 * th - Y) - 328 * E2 * sin(8 * th - 2 * Y) -
      45 * E3 * sin(9 * th - 3 * Y);
  return 3 * pi / (128 * P5) * br;
}

// The system ------------------------------------------------------------------

J2System::J2System(const J2Config& cfg) : cfg_(cfg), inv_(inverse_matrices(cfg.P0, cfg.E0)) { cfg_.validate(); }

bool J2System::in_domain(const Vector& I) const {
  return I.size() == 3 && I[kP] > 0.0 && I[kE] > 0.0 && I[kE] < 1.0 && std::isfinite(I[kY]);
}

Vector J2System::field(const Vector& I, double theta) const {
  return kepler::j2_field(I[kP], I[kE], I[kY], theta);
}

Vector J2System::averaged_field(const Vector& I) const {
  return Vector3d(0.0, 0.0, -3 * pi / (I[kP] * I[kP]));
}

Vector J2System::s(const Vector& I, double theta) const { return s_closed(I[kP], I[kE], I[kY], theta); }

Vector J2System::pbar(const Vector& I) const { return pbar_jac_hess(I[kP], I[kE], I[kY]).pbar; }

Matrix J2System::jac_averaged_field(const Vector& I) const { return pbar_jac_hess(I[kP], I[kE], I[kY]).jac; }

Vector J2System::caps(double) const {
  return Vector3d(cfg_.P0, std::min(cfg_.E0, 1.0 - cfg_.E0), std::numeric_limits<double>::infinity());
}

averaging::BoundValues J2System::bounds(double tau, const Vector& r) const {
  averaging::check_cap(*this, tau, r);
  const BoundTable& t = bound_table();
  const double P0 = cfg_.P0, E0 = cfg_.E0, rP = r[kP], rE = r[kE];
  averaging::BoundValues bv;
  bv.a = Matrix::Zero(3, 3);
  bv.d = Matrix::Zero(3, 3);
  bv.b = Vector::Zero(3);
  bv.c = Vector::Zero(3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    bv.b[i] = t.b[ui].value(P0, E0, rP, rE);
    bv.c[i] = t.c[ui].value(P0, E0, rP, rE);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      bv.a(i, j) = t.a[ui][uj].value(P0, E0, rP, rE);
      bv.d(i, j) = t.d[ui][uj].value(P0, E0, rP, rE);
    }
  }
  bv.e.assign(3, Matrix::Zero(3, 3));
  bv.e[kY](kP, kP) = t.e_YPP.value(P0, E0, rP, rE);
  return bv;
}

Matrix J2System::R_bound(double tau) const {
  Matrix m = Matrix::Identity(3, 3);
  m(kY, kP) = 6 * pi * tau / (cfg_.P0 * cfg_.P0 * cfg_.P0);
  return m;
}

Matrix J2System::P_bound(double tau) const { return R_bound(tau); }

Matrix J2System::R_bound_derivative(double) const {
  Matrix m = Matrix::Zero(3, 3);
  m(kY, kP) = 6 * pi / (cfg_.P0 * cfg_.P0 * cfg_.P0);
  return m;
}

std::optional<averaging::FlowPoint> J2System::closed_flow(const Vector& I0, double tau) const {
  J2Config c = cfg_;
  c.P0 = I0[kP];
  c.E0 = I0[kE];
  c.Y0 = I0[kY];
  const ClosedRK rk = closed_R_K(c, tau);
  return averaging::FlowPoint{Vector3d(c.P0, c.E0, c.Y0 - 3 * pi * tau / (c.P0 * c.P0)), rk.R, rk.R_inverse, rk.K};
}

Matrix J2System::alpha_r_jacobian(double tau, const Vector& r, double eps) const {
  averaging::check_cap(*this, tau, r);
  return alpha_partials(cfg_, eps, Vector3d(r[0], r[1], r[2]));
}

Matrix J2System::estimator_inverse(double tau, const Vector& r, double eps, bool exact) const {
  averaging::check_cap(*this, tau, r);
  const Vector3d rr(r[0], r[1], r[2]);
  if (exact) return exact_inverse(cfg_, eps, rr);
  Matrix3d out = Matrix3d::Identity() + eps * inv_.M + eps * eps * inv_.Q;
  for (std::size_t k = 0; k < 3; ++k) out += eps * rr[static_cast<Eigen::Index>(k)] * inv_.N[k];
  return out;
}

std::shared_ptr<const J2System> make_system(const J2Config& cfg) { return std::make_shared<const J2System>(cfg); }

Matrix3d alpha_partials(const J2Config& cfg, double eps, const Vector3d& r) {
  const BoundTable& t = bound_table();
  const double P0 = cfg.P0, E0 = cfg.E0, rP = r[kP], rE = r[kE];
  Matrix3d out = Matrix3d::Zero();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto gb = t.b[i].gradient(P0, E0, rP, rE);
    for (std::size_t j = 0; j < 3; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      double acc = t.a[i][j].value(P0, E0, rP, rE);
      // Majorants depend on r^P and r^E only.
      if (j < 2) {
        for (std::size_t k = 0; k < 3; ++k) acc += t.a[i][k].gradient(P0, E0, rP, rE)[j] * r[static_cast<Eigen::Index>(k)];
        acc += eps * gb[j];
      }
      out(ii, jj) = acc;
    }
  }
  return out;
}

Matrix3d approx_inverse(const J2Config& cfg, double eps, const Vector3d& r) {
  const InverseMatrices m = inverse_matrices(cfg.P0, cfg.E0);
  Matrix3d out = Matrix3d::Identity() + eps * m.M + eps * eps * m.Q;
  for (std::size_t k = 0; k < 3; ++k) out += eps * r[static_cast<Eigen::Index>(k)] * m.N[k];
  return out;
}

Matrix3d exact_inverse(const J2Config& cfg, double eps, const Vector3d& r) {
  const Matrix3d a = Matrix3d::Identity() - eps * alpha_partials(cfg, eps, r);
  Matrix3d adj;
  adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double det = a(0, 0) * adj(0, 0) + a(0, 1) * adj(1, 0) + a(0, 2) * adj(2, 0);
  if (!(std::abs(det) > 0.0)) throw DomainError("exact_inverse: singular matrix");
  return adj / det;
}

}  // namespace avgbound::j2
