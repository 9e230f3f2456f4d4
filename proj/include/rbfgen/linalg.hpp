#pragma once

#include <Eigen/Dense>

namespace rbfgen {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Row-major storage for matrices whose rows feed the contiguous SIMD kernels.
using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace rbfgen
