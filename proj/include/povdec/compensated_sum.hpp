#pragma once

#include <cmath>

#include <Eigen/Core>

namespace povdec {

/// Neumaier's variant of Kahan summation. Order-dependent but deterministic.
template <typename Scalar>
class CompensatedSum {
 public:
  CompensatedSum& operator+=(Scalar value) {
    const Scalar t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  Scalar value() const { return sum_ + compensation_; }

 private:
  Scalar sum_{0};
  Scalar compensation_{0};
};

template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived>& x) {
  CompensatedSum<typename Derived::Scalar> acc;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += x.derived().coeff(i);
  return acc.value();
}

/// Compensated inner product, summed in index order.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar compensated_dot(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b) {
  eigen_assert(a.size() == b.size());
  CompensatedSum<typename DerivedA::Scalar> acc;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += a.derived().coeff(i) * b.derived().coeff(i);
  return acc.value();
}

} // namespace povdec
