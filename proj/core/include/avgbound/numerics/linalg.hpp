#pragma once

#include <Eigen/Dense>

namespace avgbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace avgbound
