#pragma once

#include <cmath>

namespace hclab {

/// Neumaier's variant of Kahan summation. Unlike plain Kahan it stays
/// accurate when an addend is larger in magnitude than the running sum.
template <typename T>
class compensated_sum {
 public:
  constexpr compensated_sum() = default;
  constexpr explicit compensated_sum(T initial) : sum_(initial) {}

  constexpr compensated_sum& operator+=(T value) {
    using std::abs;
    const T t = sum_ + value;
    if (abs(sum_) >= abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  constexpr T value() const { return sum_ + compensation_; }
  constexpr explicit operator T() const { return value(); }

 private:
  T sum_{0};
  T compensation_{0};
};

}  // namespace hclab
