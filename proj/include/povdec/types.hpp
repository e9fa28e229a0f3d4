#pragma once

#include <Eigen/Core>

namespace povdec {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorD = Vector<double>;

} // namespace povdec
