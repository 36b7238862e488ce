#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "d2dcache/analytics.hpp"
#include "d2dcache/lambert_w.hpp"
#include "d2dcache/model.hpp"

namespace d2dcache {

/// Cache the M_d most popular files on every device.
inline CachingPolicy mpc_policy(const ContentModel& content, std::size_t m_d) {
  if (m_d > content.n_files) {
    throw Error(ErrorKind::CapacityExceedsLibrary,
                "m_d = " + std::to_string(m_d) + " exceeds library size " + std::to_string(content.n_files));
  }
  CachingPolicy policy{std::vector<double>(content.n_files, 0.0), m_d};
  std::fill_n(policy.q.begin(), m_d, 1.0);
  return policy;
}

/// Unclipped stationary point of the per-file Lagrangian term for dual value
/// mu, where c = pi (1 - rho) lambda_u R_d^2:
///   q = 1 + 1/c - W0((mu / p_i) e^{1 + c}) / c.
/// Evaluated in log space so large c does not overflow the exponential.
inline double q_of_mu(double mu, double p_i, double c) {
  const double log_arg = std::log(mu) - std::log(p_i) + 1.0 + c;
  return 1.0 + (1.0 - lambert_w0_of_exp(log_arg)) / c;
}

/// Marginal gain of the cache-hit objective in coordinate i at q:
/// p_i e^{-c q} (1 + c (1 - q)).
inline double hit_marginal_gain(double q, double p_i, double c) {
  return p_i * std::exp(-c * q) * (1.0 + c * (1.0 - q));
}

struct HitOptResult {
  CachingPolicy policy;
  double dual = 0.0;
  double hit_prob = 0.0;
  std::size_t iterations = 0;
};

/// Maximizes the cache-hit probability over the feasible box with capacity
/// M_d. The objective is concave, so the clipped KKT point with the capacity
/// constraint active is the global maximizer; the dual variable is found by
/// bisection. With no potential transmitters (rho = 1) the objective is
/// linear and MPC is returned instead.
inline HitOptResult optimize_cache_hit(const ContentModel& content, const NetworkConfig& cfg, std::size_t m_d) {
  cfg.validate();
  const std::size_t n = content.n_files;
  if (m_d > n) {
    throw Error(ErrorKind::CapacityExceedsLibrary,
                "m_d = " + std::to_string(m_d) + " exceeds library size " + std::to_string(n));
  }
  const auto& p = content.popularity;
  const double c = cfg.disc_load();

  HitOptResult out;
  if (m_d == n || m_d == 0 || !(c > 0.0)) {
    out.policy = mpc_policy(content, m_d);
    // Any dual between the marginal gains on either side of the cut is
    // optimal; report the one for the last cached file.
    if (m_d == 0) out.dual = p.front() * (1.0 + c);
    else if (m_d < n) out.dual = p[m_d - 1];
    out.hit_prob = cache_hit_prob(content, out.policy, cfg);
    return out;
  }

  const double target = static_cast<double>(m_d);
  auto clipped = [&](double mu, std::size_t i) { return std::clamp(q_of_mu(mu, p[i], c), 0.0, 1.0); };
  auto mass = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += clipped(mu, i);
    return s;
  };

  double lo = 1e-15;
  double hi = *std::max_element(p.begin(), p.end()) * (1.0 + c);
  for (int k = 0; mass(hi) > target; ++k) {
    if (k > 1000) throw Error(ErrorKind::NoConvergence, "could not bracket the dual from above");
    hi *= 2.0;
  }
  for (int k = 0; mass(lo) < target; ++k) {
    if (k > 30 || lo < 1e-300) throw Error(ErrorKind::NoConvergence, "could not bracket the dual from below");
    lo *= 1e-10;
  }

  constexpr std::size_t kMaxIterations = 200;
  double mu = lo;
  double s = mass(lo);
  std::size_t iter = 0;
  while (iter < kMaxIterations) {
    ++iter;
    mu = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    s = mass(mu);
    if (std::abs(s - target) <= 1e-13 * target || mu <= lo || mu >= hi) break;
    if (s > target) lo = mu; else hi = mu;
  }
  if (std::abs(s - target) > 1e-9) {
    throw Error(ErrorKind::NoConvergence, "dual bisection ended with capacity gap " + std::to_string(s - target));
  }

  out.policy.m_d = m_d;
  out.policy.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.policy.q[i] = clipped(mu, i);
  out.dual = mu;
  out.iterations = iter;
  out.hit_prob = cache_hit_prob(content, out.policy, cfg);
  return out;
}

}  // namespace d2dcache
