#pragma once

// Bessel functions of the first kind J_a(x), x >= 0, for the orders the ball
// engine needs: a = d/2 with d a positive integer.

#include <cmath>

#include "discrepancy/core.hpp"

namespace discrepancy::bessel {

/// Ascending series sum_k (-1)^k (x/2)^(2k+a) / (k! Gamma(k+a+1)) in long double.
inline long double series(double a, double x) {
  const long double h = static_cast<long double>(x) / 2.0L;
  long double term = std::pow(h, static_cast<long double>(a)) / std::tgamma(static_cast<long double>(a) + 1.0L);
  long double sum = term;
  const long double h2 = h * h;
  for (int k = 1; k < 500; ++k) {
    term *= -h2 / (static_cast<long double>(k) * (static_cast<long double>(k) + a));
    sum += term;
    if (std::abs(term) <= 1e-21L * std::abs(sum) && static_cast<long double>(k) > h) break;
  }
  return sum;
}

/// Hankel asymptotic expansion, summed until the terms stop decreasing.
inline long double hankel(double a, double x) {
  const long double mu = 4.0L * a * a;
  const long double xl = x;
  const long double omega = xl - (static_cast<long double>(a) / 2.0L + 0.25L) * kPiL;
  long double p = 0.0L, q = 0.0L;
  long double term = 1.0L;  // a_k(a) / x^k
  long double last = INFINITY;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) term *= (mu - (2.0L * k - 1.0L) * (2.0L * k - 1.0L)) / (static_cast<long double>(k) * 8.0L * xl);
    const long double mag = std::abs(term);
    if (mag > last) break;
    last = mag;
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
    if (mag < 1e-21L) break;
  }
  return std::sqrt(2.0L / (kPiL * xl)) * (p * std::cos(omega) - q * std::sin(omega));
}

/// Above this argument integer orders switch from the series to the asymptotic expansion.
inline constexpr double kAsymptoticThreshold = 20.0;

/// J_{n+1/2}(x) through spherical Bessel functions, with upward recurrence
/// when x exceeds the order and the series below it.
inline long double half_integer(unsigned n, double x) {
  if (x == 0.0) return 0.0L;
  if (x <= static_cast<double>(n) + 2.0) return series(n + 0.5, x);
  const long double xl = x;
  long double j0 = std::sin(xl) / xl;
  if (n == 0) return std::sqrt(2.0L * xl / kPiL) * j0;
  long double j1 = std::sin(xl) / (xl * xl) - std::cos(xl) / xl;
  for (unsigned k = 1; k < n; ++k) {
    const long double j2 = (2.0L * k + 1.0L) / xl * j1 - j0;
    j0 = j1;
    j1 = j2;
  }
  return std::sqrt(2.0L * xl / kPiL) * j1;  // J_{n+1/2} = sqrt(2x/pi) j_n
}

/// J_{d/2}(x) for a positive integer d and x >= 0.
inline double j_half_order(unsigned d, double x) {
  require(d >= 1, ErrorCode::invalid_argument, "Bessel order d/2 needs d >= 1");
  require(x >= 0.0 && std::isfinite(x), ErrorCode::invalid_argument, "Bessel argument must be finite and non-negative");
  if (d % 2 == 1) return static_cast<double>(half_integer((d - 1) / 2, x));
  const double a = d / 2;
  if (x <= kAsymptoticThreshold) return static_cast<double>(series(a, x));
  return static_cast<double>(hankel(a, x));
}

}  // namespace discrepancy::bessel
