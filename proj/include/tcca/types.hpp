#pragma once

#include <Eigen/Dense>

namespace tcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace tcca
