#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "renewal/compensated_sum.hpp"

namespace renewal {

/// Right-continuous step function F(x) = #{samples <= x} / N.
class EmpiricalCDF {
public:
  explicit EmpiricalCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("empirical CDF needs at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
  }

  double survival(double x) const { return 1.0 - (*this)(x); }

  const std::vector<double>& sorted_samples() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

private:
  std::vector<double> sorted_;
};

inline EmpiricalCDF empirical_cdf(std::vector<double> samples) { return EmpiricalCDF(std::move(samples)); }

/// sup_x |F_a(x) - F_b(x)|, evaluated on the merged jump set.
inline double ks_distance(const EmpiricalCDF& a, const EmpiricalCDF& b) {
  const auto& xs = a.sorted_samples();
  const auto& ys = b.sorted_samples();
  const double na = static_cast<double>(xs.size());
  const double nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < xs.size() || j < ys.size()) {
    double x;
    if (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) {
      x = xs[i];
    } else {
      x = ys[j];
    }
    while (i < xs.size() && xs[i] <= x) ++i;
    while (j < ys.size() && ys[j] <= x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return worst;
}

/// Pearson statistic sum (obs - exp)^2 / exp with the pmf rescaled to the
/// total observed count over the supplied bins.
inline double chi_square(std::span<const std::uint64_t> observed, std::span<const double> expected_pmf) {
  if (observed.empty()) throw std::invalid_argument("chi_square: no bins");
  if (observed.size() != expected_pmf.size()) throw std::invalid_argument("chi_square: bin count mismatch");
  double pmf_total = 0.0;
  for (const double q : expected_pmf) {
    if (!(q > 0.0)) throw std::invalid_argument("chi_square: expected pmf must be positive on every bin");
    pmf_total += q;
  }
  const double count_total =
      static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  double statistic = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = count_total * expected_pmf[i] / pmf_total;
    const double diff = static_cast<double>(observed[i]) - expected;
    statistic += diff * diff / expected;
  }
  return statistic;
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sample");
  CompensatedSum<double> acc;
  for (const double v : values) acc += v;
  return acc.value() / static_cast<double>(values.size());
}

/// Unbiased sample variance; zero for a single value.
inline double variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  CompensatedSum<double> acc;
  for (const double v : values) acc += (v - m) * (v - m);
  return acc.value() / static_cast<double>(values.size() - 1);
}

/// Linear-interpolation quantile (Hyndman-Fan type 7).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace renewal
