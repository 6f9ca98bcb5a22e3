#pragma once

#include <cstddef>
#include <vector>

#include "avgbound/numerics/linalg.hpp"

namespace avgbound::numerics {

/// Vector-valued trajectory tabulated at strictly increasing nodes.
///
/// Between nodes the curve is evaluated either with the Dormand-Prince
/// continuous extension recorded by the integrator, or linearly when no
/// dense data is attached. Node values are returned exactly.
class SampledCurve {
 public:
  SampledCurve() = default;

  /// Linear interpolation between the given nodes.
  SampledCurve(std::vector<double> nodes, std::vector<Vector> values);

  /// Constant curve on [t0, t1].
  static SampledCurve constant(const Vector& value, double t0, double t1);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  bool has_dense_output() const noexcept { return !dense_.empty(); }

  double front_time() const;
  double back_time() const;
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  Vector node_value(std::size_t k) const;
  double node_component(std::size_t k, std::size_t i) const { return values_[k * dim_ + i]; }

  /// Throws DomainError outside [front_time(), back_time()].
  Vector evaluate(double t) const;
  double evaluate_component(double t, std::size_t i) const;

  // Builder interface used by the integrator.
  explicit SampledCurve(std::size_t dim) : dim_(dim) {}
  void append_node(double t, const Vector& y);
  /// Dense coefficients (rc3, rc4, rc5) of the segment ending at the last node.
  void append_dense_segment(const Vector& rc3, const Vector& rc4, const Vector& rc5);

 private:
  std::size_t locate(double t) const;
  double segment_component(std::size_t seg, double theta, std::size_t i) const;

  std::size_t dim_ = 0;
  std::vector<double> nodes_;
  std::vector<double> values_;  // row-major, node-by-component
  std::vector<double> dense_;   // per segment: rc3 | rc4 | rc5, each dim_ long
};

}  // namespace avgbound::numerics
