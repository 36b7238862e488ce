#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2dcache/error.hpp"

namespace d2dcache {

namespace detail {

inline double lambert_w0_guess(double x) {
  if (x < 0.0) {
    // Expansion about the branch point x = -1/e.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  }
  if (x < 3.0) return std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace detail

/// Principal branch W0 of the Lambert W function: the w >= -1 with w e^w = x.
/// Halley refinement from a branch-aware starting point.
inline double lambert_w0(double x) {
  constexpr double kBranchPoint = -1.0 / std::numbers::e;
  if (std::isnan(x) || x < kBranchPoint) {
    throw Error(ErrorKind::DomainError, "lambert_w0 requires x >= -1/e, got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (x == kBranchPoint) return -1.0;
  if (std::isinf(x)) return x;

  double w = detail::lambert_w0_guess(x);
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 <= 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (w < -1.0) w = -1.0;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

/// W0(exp(log_x)), usable when exp(log_x) would overflow. Solves
/// w + log(w) = log_x by Newton iteration for large arguments.
inline double lambert_w0_of_exp(double log_x) {
  if (log_x < 500.0) return lambert_w0(std::exp(log_x));
  double w = log_x - std::log(log_x);
  for (int iter = 0; iter < 64; ++iter) {
    const double f = w + std::log(w) - log_x;
    const double step = f / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
  }
  return w;
}

}  // namespace d2dcache
