#pragma once

#include <Eigen/Dense>

namespace scs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace scs
