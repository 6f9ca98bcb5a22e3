#include "avgbound/numerics/sampled_curve.hpp"

#include <algorithm>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::numerics {

SampledCurve::SampledCurve(std::vector<double> nodes, std::vector<Vector> values) {
  if (nodes.empty() || nodes.size() != values.size()) {
    throw DomainError("SampledCurve: node and value counts must match and be nonzero");
  }
  dim_ = static_cast<std::size_t>(values.front().size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    append_node(nodes[k], values[k]);
  }
}

SampledCurve SampledCurve::constant(const Vector& value, double t0, double t1) {
  SampledCurve c(static_cast<std::size_t>(value.size()));
  c.append_node(t0, value);
  if (t1 > t0) c.append_node(t1, value);
  return c;
}

void SampledCurve::append_node(double t, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != dim_) {
    throw DomainError("SampledCurve: value dimension mismatch");
  }
  if (!nodes_.empty() && !(t > nodes_.back())) {
    throw DomainError("SampledCurve: nodes must be strictly increasing");
  }
  nodes_.push_back(t);
  values_.insert(values_.end(), y.data(), y.data() + dim_);
}

void SampledCurve::append_dense_segment(const Vector& rc3, const Vector& rc4, const Vector& rc5) {
  // Segments must be attached in order, one per interval.
  if (dense_.size() != (nodes_.size() - 2) * 3 * dim_) {
    throw DomainError("SampledCurve: dense segment out of order");
  }
  dense_.insert(dense_.end(), rc3.data(), rc3.data() + dim_);
  dense_.insert(dense_.end(), rc4.data(), rc4.data() + dim_);
  dense_.insert(dense_.end(), rc5.data(), rc5.data() + dim_);
}

double SampledCurve::front_time() const {
  if (empty()) throw DomainError("SampledCurve: empty curve");
  return nodes_.front();
}

double SampledCurve::back_time() const {
  if (empty()) throw DomainError("SampledCurve: empty curve");
  return nodes_.back();
}

Vector SampledCurve::node_value(std::size_t k) const {
  return Eigen::Map<const Vector>(values_.data() + k * dim_, static_cast<Eigen::Index>(dim_));
}

std::size_t SampledCurve::locate(double t) const {
  if (empty() || t < nodes_.front() || t > nodes_.back() || t != t) {
    std::ostringstream os;
    os.precision(17);
    os << "SampledCurve: t=" << t << " outside covered interval";
    if (!empty()) os << " [" << nodes_.front() << ", " << nodes_.back() << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.begin()) return 0;
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

double SampledCurve::segment_component(std::size_t seg, double theta, std::size_t i) const {
  const double y0 = values_[seg * dim_ + i];
  const double y1 = values_[(seg + 1) * dim_ + i];
  const double rc2 = y1 - y0;
  if (dense_.empty()) return y0 + theta * rc2;
  const double* d = dense_.data() + seg * 3 * dim_;
  const double rc3 = d[i], rc4 = d[dim_ + i], rc5 = d[2 * dim_ + i];
  const double om = 1.0 - theta;
  return y0 + theta * (rc2 + om * (rc3 + theta * (rc4 + om * rc5)));
}

double SampledCurve::evaluate_component(double t, std::size_t i) const {
  const std::size_t k = locate(t);
  if (t == nodes_[k]) return values_[k * dim_ + i];
  const double theta = (t - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
  return segment_component(k, theta, i);
}

Vector SampledCurve::evaluate(double t) const {
  const std::size_t k = locate(t);
  if (t == nodes_[k]) return node_value(k);
  const double theta = (t - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
  Vector out(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) out[static_cast<Eigen::Index>(i)] = segment_component(k, theta, i);
  return out;
}

}  // namespace avgbound::numerics
