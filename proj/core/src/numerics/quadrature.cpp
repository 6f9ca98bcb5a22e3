#include "avgbound/numerics/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::numerics {

double periodic_average(const ScalarFn& g, double tol) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::size_t n = 64;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += g(two_pi * static_cast<double>(k) / static_cast<double>(n));
  double prev = sum / static_cast<double>(n);
  while (n < (std::size_t{1} << 20)) {
    // Doubling reuses the previous nodes; only the midpoints are new.
    for (std::size_t k = 0; k < n; ++k) {
      sum += g(two_pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
    }
    n *= 2;
    const double cur = sum / static_cast<double>(n);
    if (!std::isfinite(cur)) throw ConvergenceError("periodic_average: non-finite integrand");
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  throw ConvergenceError("periodic_average: tolerance not reached");
}

const GaussRule& gauss_rule(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n == 0) throw DomainError("gauss_rule: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

double gauss_legendre(const ScalarFn& g, double a, double b, std::size_t n) {
  const GaussRule& rule = gauss_rule(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += rule.weights[k] * g(mid + half * rule.nodes[k]);
  return half * acc;
}

double segment_average(const ScalarFn& g, double tol) {
  auto composite = [&](std::size_t panels) {
    double acc = 0.0;
    const double w = 1.0 / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      acc += gauss_legendre(g, w * static_cast<double>(p), w * static_cast<double>(p + 1));
    }
    return acc;
  };
  double prev = composite(1);
  for (std::size_t panels = 2; panels <= 4096; panels *= 2) {
    const double cur = composite(panels);
    if (!std::isfinite(cur)) throw ConvergenceError("segment_average: non-finite integrand");
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  throw ConvergenceError("segment_average: tolerance not reached");
}

TorusMax grid_max_on_torus(const ScalarFn& g, std::size_t Q, bool refine) {
  if (Q < 2) throw DomainError("grid_max_on_torus: Q must be at least 2");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double step = two_pi / static_cast<double>(Q);
  TorusMax best{-std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t q = 1; q <= Q; ++q) {
    const double th = two_pi * static_cast<double>(q) / static_cast<double>(Q);
    const double v = g(th);
    if (!std::isfinite(v)) throw DomainError("grid_max_on_torus: non-finite value on the grid");
    if (v > best.value) best = {v, th};
  }
  if (!refine) return best;
  // Golden-section search on [argmax - step, argmax + step].
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best.argmax - step, b = best.argmax + step;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (gc > gd) {
      b = d; d = c; gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c; c = d; gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double gx = g(x);
  if (std::isfinite(gx) && gx > best.value) best = {gx, std::fmod(x + two_pi, two_pi)};
  return best;
}

}  // namespace avgbound::numerics
