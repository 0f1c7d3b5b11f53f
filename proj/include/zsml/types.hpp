#ifndef ZSML_TYPES_HPP
#define ZSML_TYPES_HPP

#include <Eigen/Dense>

namespace zsml {

using Scalar = double;

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Matrix = MatrixT<Scalar>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Label indicator matrices; entries are constrained to {0, 1}.
using BinaryMatrix = MatrixT<int>;

} // namespace zsml

#endif // ZSML_TYPES_HPP
