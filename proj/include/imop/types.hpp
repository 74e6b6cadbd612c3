/**
 * @file types.hpp
 * @brief Common numeric aliases.
 */

#pragma once

#include <Eigen/Dense>

namespace imop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Eigen::Index;

}  // namespace imop
