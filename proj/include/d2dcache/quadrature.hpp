#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "d2dcache/error.hpp"

namespace d2dcache::quad {

struct Options {
  double abs_tol = 1e-8;
  double rel_tol = 0.0;
  std::size_t max_intervals = 2000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]. Nodes are
// listed from the outermost inward; the last entry is the centre.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for kNodes[1], kNodes[3], kNodes[5] and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double fc = f(mid);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// The interval with the largest error estimate is bisected until the summed
/// estimate meets max(abs_tol, rel_tol * |value|). Throws QuadratureFailure
/// when max_intervals is reached first.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opts = {}) {
  if (a == b) return {};
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(value)); };

  while (error > target()) {
    if (heap.size() >= opts.max_intervals) {
      throw Error(ErrorKind::QuadratureFailure,
                  "error estimate " + std::to_string(error) + " above tolerance after " +
                      std::to_string(heap.size()) + " intervals");
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment left = detail::gk15(f, worst.a, mid);
    const detail::Segment right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift accumulated by the running updates.
  Result out;
  out.intervals = heap.size();
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.abs_error += heap.top().error;
    heap.pop();
  }
  return out;
}

}  // namespace d2dcache::quad
