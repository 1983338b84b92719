#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "renewal/errors.hpp"
#include "renewal/process.hpp"

namespace renewal {

/// Odd-only, bit-packed Eratosthenes table over [2, limit]. Immutable after
/// construction.
class PrimeTable {
public:
  static constexpr std::uint64_t kMaxLimit = 1'000'000'000;

  explicit PrimeTable(std::uint64_t limit) : limit_(limit) {
    if (limit < 2) throw std::invalid_argument("sieve limit must be >= 2");
    if (limit > kMaxLimit) {
      throw CapacityError("sieve limit " + std::to_string(limit) + " exceeds " + std::to_string(kMaxLimit));
    }
    // bit i stands for the odd number 2i + 1
    const std::uint64_t odd_count = (limit + 1) / 2;
    odd_bits_.assign((odd_count + 63) / 64, ~std::uint64_t{0});
    clear_bit(0);
    for (std::uint64_t i = odd_count; i < odd_bits_.size() * 64; ++i) clear_bit(i);
    for (std::uint64_t p = 3; p * p <= limit; p += 2) {
      if (!test_bit(p / 2)) continue;
      for (std::uint64_t m = p * p; m <= limit; m += 2 * p) clear_bit(m / 2);
    }

    pi_cache_.resize(odd_bits_.size() + 1);
    pi_cache_[0] = 0;
    for (std::size_t w = 0; w < odd_bits_.size(); ++w) {
      pi_cache_[w + 1] = pi_cache_[w] + static_cast<std::uint32_t>(std::popcount(odd_bits_[w]));
    }

    primes_.reserve(pi_cache_.back() + 1);
    primes_.push_back(2);
    for (std::size_t w = 0; w < odd_bits_.size(); ++w) {
      for (std::uint64_t word = odd_bits_[w]; word != 0; word &= word - 1) {
        primes_.push_back(static_cast<std::uint32_t>(2 * (w * 64 + std::countr_zero(word)) + 1));
      }
    }
  }

  std::uint64_t limit() const { return limit_; }
  const std::vector<std::uint32_t>& prime_list() const { return primes_; }
  std::uint64_t size() const { return primes_.size(); }

  bool is_prime(std::uint64_t x) const {
    check_range(x);
    if (x < 2) return false;
    if (x % 2 == 0) return x == 2;
    return test_bit(x / 2);
  }

  /// Number of primes <= x.
  std::uint64_t pi(std::uint64_t x) const {
    check_range(x);
    if (x < 2) return 0;
    const std::uint64_t bit = (x - 1) / 2;  // largest odd <= x is 2*bit + 1
    const std::uint64_t word = bit / 64;
    const std::uint64_t offset = bit % 64;
    const std::uint64_t mask = offset == 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << (offset + 1)) - 1;
    return 1 + pi_cache_[word] + static_cast<std::uint64_t>(std::popcount(odd_bits_[word] & mask));
  }

  /// The n-th prime, 1-based.
  std::uint64_t nth_prime(std::uint64_t n) const {
    if (n < 1 || n > primes_.size()) {
      throw std::out_of_range("nth_prime: index " + std::to_string(n) + " outside table of " +
                              std::to_string(primes_.size()) + " primes");
    }
    return primes_[n - 1];
  }

private:
  void check_range(std::uint64_t x) const {
    if (x > limit_) throw std::out_of_range("value " + std::to_string(x) + " exceeds sieve limit");
  }
  bool test_bit(std::uint64_t i) const { return (odd_bits_[i / 64] >> (i % 64)) & 1U; }
  void clear_bit(std::uint64_t i) { odd_bits_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

  std::uint64_t limit_;
  std::vector<std::uint64_t> odd_bits_;
  std::vector<std::uint32_t> pi_cache_;
  std::vector<std::uint32_t> primes_;
};

inline PrimeTable sieve(std::uint64_t limit) { return PrimeTable(limit); }

/// A sieve limit that is guaranteed to contain the first n primes
/// (p_n < n (ln n + ln ln n) for n >= 6).
inline std::uint64_t sieve_limit_for(std::uint64_t n) {
  if (n < 6) return 13;
  const double x = static_cast<double>(n);
  return static_cast<std::uint64_t>(x * (std::log(x) + std::log(std::log(x)))) + 1;
}

struct DusartRosserBounds {
  double lower;
  double upper;
};

/// n ln n + n ln ln n - n <= p_n <= n ln n + n ln ln n, asserted for n >= 7.
inline DusartRosserBounds dusart_rosser_bounds(std::uint64_t n) {
  const double x = static_cast<double>(n);
  const double upper = x * std::log(x) + x * std::log(std::log(x));
  return {upper - x, upper};
}

inline std::vector<std::uint64_t> dusart_rosser_violations(const PrimeTable& table, std::uint64_t n_lo,
                                                           std::uint64_t n_hi) {
  if (n_lo < 7) throw std::invalid_argument("dusart_rosser_violations: n_lo must be >= 7");
  if (n_lo > n_hi) throw std::invalid_argument("dusart_rosser_violations: inverted range");
  if (n_hi > table.size()) throw std::out_of_range("dusart_rosser_violations: n_hi beyond table");
  std::vector<std::uint64_t> violations;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const auto [lower, upper] = dusart_rosser_bounds(n);
    const double p = static_cast<double>(table.nth_prime(n));
    if (p < lower || p > upper) violations.push_back(n);
  }
  return violations;
}

struct PrimeComparison {
  std::uint64_t n;
  std::uint64_t p_generator;
  std::uint64_t p_prime;
  double ratio;
};

/// P_n / p_n at every trace checkpoint.
inline std::vector<PrimeComparison> compare_to_primes(const Trace& trace, const PrimeTable& table) {
  std::vector<PrimeComparison> series;
  series.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    if (row.n > table.size()) {
      throw std::out_of_range("compare_to_primes: table holds " + std::to_string(table.size()) +
                              " primes, trace needs " + std::to_string(row.n));
    }
    const auto prime = table.nth_prime(row.n);
    series.push_back({row.n, row.p, prime, static_cast<double>(row.p) / static_cast<double>(prime)});
  }
  return series;
}

}  // namespace renewal
