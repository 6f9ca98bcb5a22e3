#include "avgbound/numerics/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::numerics {

namespace {

void check_nodes(std::span<const double> nodes, std::span<const double> values) {
  if (nodes.size() < 2) throw DomainError("interpolation: at least two nodes are required");
  if (nodes.size() != values.size()) throw DomainError("interpolation: node/value count mismatch");
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    if (nodes[j] == nodes[j - 1]) throw DomainError("interpolation: duplicate nodes");
    if (!(nodes[j] > nodes[j - 1])) throw DomainError("interpolation: nodes must be increasing");
  }
}

}  // namespace

InterpolantPoly::InterpolantPoly(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  check_nodes(nodes_, values_);
  const std::size_t n = nodes_.size() - 1;
  const double h = (nodes_.back() - nodes_.front()) / static_cast<double>(n);
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() *
                     std::max(std::abs(nodes_.front()), std::abs(nodes_.back()));
  for (std::size_t j = 0; j <= n; ++j) {
    const double expected = nodes_.front() + static_cast<double>(j) * h;
    if (std::abs(nodes_[j] - expected) > tol + 1e-12 * h) {
      throw DomainError("barycentric_interpolate: nodes are not equally spaced");
    }
  }
  // Normalised binomial weights; log form keeps large degrees finite.
  weights_.resize(n + 1);
  const double lmid = std::lgamma(n + 1.0) - std::lgamma(n / 2 + 1.0) - std::lgamma(n - n / 2 + 1.0);
  for (std::size_t j = 0; j <= n; ++j) {
    const double lb = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    const double mag = std::exp(lb - lmid);
    weights_[j] = (j % 2 == 0) ? mag : -mag;
  }
}

double InterpolantPoly::operator()(double x) const {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double d = x - nodes_[j];
    if (d == 0.0) return values_[j];
    const double t = weights_[j] / d;
    num += t * values_[j];
    den += t;
  }
  return num / den;
}

double InterpolantPoly::derivative(double x) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (x == nodes_[i]) {
      // Row i of the differentiation matrix.
      double acc = 0.0;
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (j == i) continue;
        acc += (weights_[j] / weights_[i]) * (values_[j] - values_[i]) / (nodes_[i] - nodes_[j]);
      }
      return acc;
    }
  }
  const double p = (*this)(x);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double d = x - nodes_[j];
    const double t = weights_[j] / d;
    num += t * (p - values_[j]) / d;
    den += t;
  }
  return num / den;
}

InterpolantPoly barycentric_interpolate(std::span<const double> nodes, std::span<const double> values) {
  return InterpolantPoly(std::vector<double>(nodes.begin(), nodes.end()),
                         std::vector<double>(values.begin(), values.end()));
}

CubicSpline::CubicSpline(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  check_nodes(nodes_, values_);
  const std::size_t n = nodes_.size();
  second_.assign(n, 0.0);
  if (n == 2) return;
  std::vector<double> h(n - 1), slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = nodes_[i + 1] - nodes_[i];
    slope[i] = (values_[i + 1] - values_[i]) / h[i];
  }
  if (n == 3) {
    // Not-a-knot with three nodes is the interpolating parabola.
    const double c = (slope[1] - slope[0]) / (h[0] + h[1]);
    second_.assign(3, 2.0 * c);
    return;
  }
  // Unknowns M_0..M_{n-1}; rows 1..n-2 are the continuity conditions, the
  // first and last rows impose continuity of the third derivative.
  // Eliminate M_0 and M_{n-1} to obtain a tridiagonal system in M_1..M_{n-2}.
  const std::size_t m = n - 2;
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    sub[k] = h[i - 1];
    diag[k] = 2.0 * (h[i - 1] + h[i]);
    sup[k] = h[i];
    rhs[k] = 6.0 * (slope[i] - slope[i - 1]);
  }
  // M_0 = ((h0 + h1) M_1 - h0 M_2) / h1
  {
    const double c1 = (h[0] + h[1]) / h[1], c2 = -h[0] / h[1];
    diag[0] += sub[0] * c1;
    sup[0] += sub[0] * c2;
  }
  // M_{n-1} = ((h_{n-2} + h_{n-3}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
  {
    const double hl = h[n - 2], hp = h[n - 3];
    const double c1 = (hl + hp) / hp, c2 = -hl / hp;
    diag[m - 1] += sup[m - 1] * c1;
    sub[m - 1] += sup[m - 1] * c2;
  }
  if (m == 2) {
    // Both boundary substitutions touch the same 2x2 system; solve directly.
    const double det = diag[0] * diag[1] - sup[0] * sub[1];
    second_[1] = (rhs[0] * diag[1] - sup[0] * rhs[1]) / det;
    second_[2] = (diag[0] * rhs[1] - sub[1] * rhs[0]) / det;
  } else {
    // Thomas algorithm.
    for (std::size_t k = 1; k < m; ++k) {
      const double w = sub[k] / diag[k - 1];
      diag[k] -= w * sup[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    second_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
      second_[k + 1] = (rhs[k] - sup[k] * second_[k + 2]) / diag[k];
    }
  }
  second_[0] = ((h[0] + h[1]) * second_[1] - h[0] * second_[2]) / h[1];
  second_[n - 1] = ((h[n - 2] + h[n - 3]) * second_[n - 2] - h[n - 2] * second_[n - 3]) / h[n - 3];
}

std::size_t CubicSpline::segment(double x) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(k, nodes_.size() - 2);
}

double CubicSpline::operator()(double x) const {
  const std::size_t k = segment(x);
  if (x == nodes_[k]) return values_[k];
  const double h = nodes_[k + 1] - nodes_[k];
  const double a = (nodes_[k + 1] - x) / h, b = (x - nodes_[k]) / h;
  return a * values_[k] + b * values_[k + 1] +
         ((a * a * a - a) * second_[k] + (b * b * b - b) * second_[k + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
  const std::size_t k = segment(x);
  const double h = nodes_[k + 1] - nodes_[k];
  const double a = (nodes_[k + 1] - x) / h, b = (x - nodes_[k]) / h;
  return (values_[k + 1] - values_[k]) / h -
         (3.0 * a * a - 1.0) * h * second_[k] / 6.0 + (3.0 * b * b - 1.0) * h * second_[k + 1] / 6.0;
}

InterpMode parse_interp_mode(std::string_view name) {
  if (name == "lagrange") return InterpMode::lagrange;
  if (name == "cubic") return InterpMode::cubic;
  throw DomainError("unknown interpolation mode '" + std::string(name) + "' (expected lagrange|cubic)");
}

std::string_view to_string(InterpMode mode) {
  return mode == InterpMode::lagrange ? "lagrange" : "cubic";
}

namespace {

std::variant<InterpolantPoly, CubicSpline> make_impl(InterpMode mode, std::span<const double> nodes,
                                                     std::span<const double> values) {
  if (mode == InterpMode::lagrange) return barycentric_interpolate(nodes, values);
  return CubicSpline(std::vector<double>(nodes.begin(), nodes.end()),
                     std::vector<double>(values.begin(), values.end()));
}

}  // namespace

Interpolant::Interpolant(InterpMode mode, std::span<const double> nodes, std::span<const double> values)
    : lo_(nodes.empty() ? 0.0 : nodes.front()),
      hi_(nodes.empty() ? 0.0 : nodes.back()),
      impl_(make_impl(mode, nodes, values)) {}

void Interpolant::check(double x) const {
  if (!(x >= lo_ && x <= hi_)) {
    std::ostringstream os;
    os.precision(17);
    os << "interpolant evaluated at " << x << " outside [" << lo_ << ", " << hi_ << "]";
    throw DomainError(os.str());
  }
}

double Interpolant::operator()(double x) const {
  check(x);
  return std::visit([x](const auto& p) { return p(x); }, impl_);
}

double Interpolant::derivative(double x) const {
  check(x);
  return std::visit([x](const auto& p) { return p.derivative(x); }, impl_);
}

InterpMode Interpolant::mode() const noexcept {
  return std::holds_alternative<InterpolantPoly>(impl_) ? InterpMode::lagrange : InterpMode::cubic;
}

}  // namespace avgbound::numerics
