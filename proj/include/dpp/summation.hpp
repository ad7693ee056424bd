#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace dpp {

/// Neumaier-compensated running sum.
///
/// Unlike plain Kahan summation the correction term stays valid when an
/// addend is larger in magnitude than the running total, which happens
/// routinely for signed drift increments.
template <typename Scalar>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Scalar initial) : sum_(initial) {}

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
  operator Scalar() const { return value(); }

 private:
  Scalar sum_{0};
  Scalar compensation_{0};
};

/// Element-wise compensated accumulator for fixed-size Eigen vectors.
template <typename Scalar>
class CompensatedVectorSum {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CompensatedVectorSum() = default;
  explicit CompensatedVectorSum(Eigen::Index size)
      : sum_(Vector::Zero(size)), compensation_(Vector::Zero(size)) {}

  template <typename Derived>
  CompensatedVectorSum& operator+=(const Eigen::MatrixBase<Derived>& values) {
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
      const Scalar v = values(i);
      const Scalar t = sum_(i) + v;
      if (std::abs(sum_(i)) >= std::abs(v)) {
        compensation_(i) += (sum_(i) - t) + v;
      } else {
        compensation_(i) += (v - t) + sum_(i);
      }
      sum_(i) = t;
    }
    return *this;
  }

  Vector value() const { return sum_ + compensation_; }
  Eigen::Index size() const { return sum_.size(); }

 private:
  Vector sum_;
  Vector compensation_;
};

}  // namespace dpp
