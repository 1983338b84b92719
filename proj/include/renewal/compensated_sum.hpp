#pragma once

#include <cmath>

namespace renewal {

/// Neumaier's variant of Kahan summation. Unlike plain Kahan it stays exact
/// when an addend is larger in magnitude than the running sum.
template <typename Value = double>
class CompensatedSum {
public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(Value initial) : sum_(initial) {}

  constexpr CompensatedSum& operator+=(Value value) {
    const Value t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  constexpr Value value() const { return sum_ + compensation_; }
  constexpr explicit operator Value() const { return value(); }

  friend constexpr bool operator==(const CompensatedSum&, const CompensatedSum&) = default;

private:
  Value sum_{0};
  Value compensation_{0};
};

}  // namespace renewal
