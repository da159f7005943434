#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace phmbd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised for inconsistent model data: bad inertias, degenerate joint axes,
// malformed scenario documents.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phmbd
