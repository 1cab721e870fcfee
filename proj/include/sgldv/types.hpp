#pragma once

#include <Eigen/Dense>

namespace sgldv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace sgldv
