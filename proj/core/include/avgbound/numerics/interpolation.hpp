#pragma once

#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace avgbound::numerics {

/// Polynomial interpolant on equally spaced nodes, evaluated in the
/// second (true) barycentric form with weights (-1)^j C(N-1, j).
class InterpolantPoly {
 public:
  InterpolantPoly(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  std::size_t degree() const noexcept { return nodes_.size() - 1; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Throws DomainError for fewer than two nodes, duplicate nodes, or spacing
/// that is not uniform up to rounding.
InterpolantPoly barycentric_interpolate(std::span<const double> nodes, std::span<const double> values);

/// Not-a-knot C2 cubic spline (natural-free end conditions); linear for two
/// nodes, a single parabola for three.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::vector<double>& nodes() const noexcept { return nodes_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> second_;  // second derivatives at the nodes
};

enum class InterpMode { lagrange, cubic };

InterpMode parse_interp_mode(std::string_view name);
std::string_view to_string(InterpMode mode);

/// Scalar interpolant of either kind with value semantics. Evaluation is
/// allowed on the closed hull of the nodes only.
class Interpolant {
 public:
  Interpolant(InterpMode mode, std::span<const double> nodes, std::span<const double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  InterpMode mode() const noexcept;

 private:
  void check(double x) const;

  double lo_, hi_;
  std::variant<InterpolantPoly, CubicSpline> impl_;
};

}  // namespace avgbound::numerics
