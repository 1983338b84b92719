#pragma once

// Exponential and logarithmic integrals on the real line, the inverse branch
// of li on (1, inf) and the solution family of f' = ln f built from it.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "renewal/errors.hpp"

namespace renewal::special {

struct PrincipalValueConfig {
  double abs_tol = 1e-12;
  int max_refinements = 200;
};

namespace detail {

// gamma + ln|x| + sum_{k>=1} x^k / (k k!)
inline double ei_series(double x) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    term *= x / k;
    const double contribution = term / k;
    sum += contribution;
    if (std::abs(contribution) <= std::numeric_limits<double>::epsilon() * std::abs(sum)) break;
  }
  return std::numbers::egamma + std::log(std::abs(x)) + sum;
}

// e^x / x * sum_k k! / x^k, truncated at the smallest term.
inline double ei_asymptotic(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * k / x;
    if (next >= term) break;
    term = next;
    sum += term;
    if (term <= std::numeric_limits<double>::epsilon() * sum) break;
  }
  return std::exp(x) / x * sum;
}

// E1(t) for t > 1 by the modified Lentz continued fraction.
inline double e1_continued_fraction(double t) {
  constexpr double tiny = 1e-300;
  double b = t + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) <= std::numeric_limits<double>::epsilon()) break;
  }
  return h * std::exp(-t);
}

}  // namespace detail

/// Exponential integral Ei(x), the principal value of int_{-inf}^x e^t/t dt.
inline double ei(double x) {
  if (x == 0.0 || std::isnan(x)) throw std::invalid_argument("ei: x must be non-zero");
  if (x > 40.0) return detail::ei_asymptotic(x);
  if (x >= -1.0) return detail::ei_series(x);
  return -detail::e1_continued_fraction(-x);
}

/// Logarithmic integral li(x) = PV int_0^x dt / ln t, evaluated as Ei(ln x).
inline double li(double x) {
  if (!(x > 0.0) || x == 1.0) throw std::invalid_argument("li: x must be positive and != 1");
  if (std::isinf(x)) return x;
  return ei(std::log(x));
}

/// Leading asymptotic n ln n + n ln ln n.
inline double asymptotic_main(double n) {
  if (!(n > std::numbers::e)) throw std::invalid_argument("asymptotic_main: n must exceed e");
  const double log_n = std::log(n);
  return n * log_n + n * std::log(log_n);
}

/// The x > 1 with li(x) = y. Safeguarded Newton (li'(x) = 1/ln x) inside a
/// bracket that every iterate keeps. For y below li(nextafter(1)) the answer
/// is not representable and the smallest double above 1 is returned.
inline double li_inv(double y, const PrincipalValueConfig& config = {}) {
  if (std::isnan(y)) throw std::invalid_argument("li_inv: y is NaN");
  if (std::isinf(y)) {
    if (y > 0) return y;
    return std::nextafter(1.0, 2.0);
  }
  const double smallest = std::nextafter(1.0, 2.0);
  if (y <= li(smallest)) return smallest;

  double lo = 1.0;
  double hi = 2.0;
  while (li(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (std::isinf(hi)) throw NumericFailure("li_inv: bracket overflow");
  }

  double x;
  if (y > std::numbers::e) {
    const double log_y = std::log(y);
    x = y * log_y + y * std::log(log_y);
  } else if (y < -1.0) {
    // li(1 + d) ~ gamma + ln d near 1
    x = 1.0 + std::exp(y - std::numbers::egamma);
  } else {
    x = 1.45;
  }
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  for (int iteration = 0; iteration < config.max_refinements; ++iteration) {
    const double residual = li(x) - y;
    if (residual == 0.0) return x;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - residual * std::log(x);
    if (!std::isfinite(next) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) return next;
    if (next == lo || next == hi) return x;
    x = next;
  }
  throw NumericFailure("li_inv: no convergence");
}

/// Ramanujan-Soldner constant: the zero of li on (1, 2).
inline double soldner() {
  static const double mu = li_inv(0.0);
  return mu;
}

/// (1/c) li_inv(c x). For c = 1 this solves f'(x) = ln f(x); in general the
/// derivative is ln(c f(x)).
inline double ode_family(double c, double x) {
  if (!(c > 0.0)) throw std::invalid_argument("ode_family: c must be > 0");
  return li_inv(c * x) / c;
}

}  // namespace renewal::special
