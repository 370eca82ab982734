#pragma once

#include "ckam/types.hpp"

#include <cmath>
#include <numbers>

namespace ckam {

enum class BesselOrderKind { Integer, HalfInteger, Unsupported };

/// Classifies v as a (non-negative) integer or half-integer order.
inline BesselOrderKind classify_bessel_order(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1e6) return BesselOrderKind::Unsupported;
  const double twice = 2.0 * v;
  if (twice != std::round(twice)) return BesselOrderKind::Unsupported;
  return (static_cast<long long>(twice) % 2 == 0) ? BesselOrderKind::Integer
                                                   : BesselOrderKind::HalfInteger;
}

namespace detail {

// K_n by upward recurrence K_{k+1} = K_{k-1} + (2k/x) K_k, seeded from K_0 and
// K_1. The recurrence is stable in the upward direction for K.
inline double bessel_k_integer(int n, double x) {
  const double k0 = std::cyl_bessel_k(0.0, x);
  if (n == 0) return k0;
  double prev = k0;
  double cur = std::cyl_bessel_k(1.0, x);
  for (int k = 1; k < n; ++k) {
    const double next = prev + (2.0 * k / x) * cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

// K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_{k=0}^{n} (n+k)! / (k! (n-k)!) (2x)^{-k}
inline double bessel_k_half_integer(int n, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < n; ++k) {
    // ratio of consecutive terms: (n+k+1)(n-k) / ((k+1) 2x)
    term *= static_cast<double>(n + k + 1) * static_cast<double>(n - k) /
            (static_cast<double>(k + 1) * 2.0 * x);
    sum += term;
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

}  // namespace detail

/// Modified Bessel function of the second kind K_v(x), x > 0, for integer
/// and half-integer orders. Other orders throw NumericalError.
inline double bessel_k(double v, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw NumericalError("bessel_k: argument must be positive and finite");
  }
  const double order = std::abs(v);  // K_{-v} = K_v
  switch (classify_bessel_order(order)) {
    case BesselOrderKind::Integer:
      return detail::bessel_k_integer(static_cast<int>(std::lround(order)), x);
    case BesselOrderKind::HalfInteger:
      return detail::bessel_k_half_integer(static_cast<int>(std::floor(order)), x);
    case BesselOrderKind::Unsupported:
      break;
  }
  throw NumericalError("bessel_k: only integer and half-integer orders are supported (got " +
                       std::to_string(v) + ")");
}

}  // namespace ckam
