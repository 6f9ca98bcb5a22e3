#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace avgbound::numerics {

using ScalarFn = std::function<double(double)>;

/// (1/2pi) * integral of g over one period, by the composite trapezoid rule
/// doubled from 64 nodes until two successive estimates agree within tol.
/// Throws ConvergenceError past 2^20 nodes.
double periodic_average(const ScalarFn& g, double tol = 1e-13);

/// Integral of g over [0, 1] by composite 20-point Gauss-Legendre, panels
/// doubled until two successive estimates agree within tol.
double segment_average(const ScalarFn& g, double tol = 1e-13);

/// Integral of g over [a, b] with n-point Gauss-Legendre (single panel).
double gauss_legendre(const ScalarFn& g, double a, double b, std::size_t n = 20);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
const GaussRule& gauss_rule(std::size_t n);

struct TorusMax {
  double value;
  double argmax;
};

/// Max of g over theta_q = 2 pi q / Q, q = 1..Q. With refine, a golden-section
/// search on the two cells adjacent to the grid argmax may raise the value.
/// Throws DomainError for Q < 2 or a non-finite sample.
TorusMax grid_max_on_torus(const ScalarFn& g, std::size_t Q, bool refine = false);

}  // namespace avgbound::numerics
