#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "d2dcache/model.hpp"
#include "d2dcache/quadrature.hpp"

namespace d2dcache {

/// Density of locally served requests, split by how they were served.
/// All values are requests per m^2.
struct ThroughputBreakdown {
  double self_served_density = 0.0;
  double d2d_served_density = 0.0;
  double total = 0.0;
};

/// Probability that a random requester holds its own file: sum_i p_i q_i.
inline double self_request_prob(const ContentModel& content, const CachingPolicy& policy) {
  require_dimension(policy.q, content);
  double acc = 0.0;
  for (std::size_t i = 0; i < content.n_files; ++i) acc += content.popularity[i] * policy.q[i];
  return acc;
}

/// Probability that at least one potential transmitter within R_d caches a
/// file cached with probability q_i.
inline double d2d_hit_prob_file(double q_i, const NetworkConfig& cfg) {
  return -std::expm1(-cfg.disc_load() * q_i);
}

/// Probability that a request misses its own cache but is found within R_d.
inline double d2d_hit_prob(const ContentModel& content, const CachingPolicy& policy,
                           const NetworkConfig& cfg) {
  require_dimension(policy.q, content);
  double acc = 0.0;
  for (std::size_t i = 0; i < content.n_files; ++i) {
    const double qi = policy.q[i];
    acc += content.popularity[i] * (1.0 - qi) * d2d_hit_prob_file(qi, cfg);
  }
  return acc;
}

/// Total cache-hit probability 1 - sum_i p_i (1 - q_i) exp(-pi (1-rho) lambda_u q_i R_d^2).
/// Accumulated as sum_i p_i [1 - (1 - q_i) exp(...)] so that the all-zero and
/// all-one policies land on 0 and 1 without cancellation.
inline double cache_hit_prob(const ContentModel& content, const CachingPolicy& policy,
                             const NetworkConfig& cfg) {
  require_dimension(policy.q, content);
  const double load = cfg.disc_load();
  double acc = 0.0;
  for (std::size_t i = 0; i < content.n_files; ++i) {
    const double qi = policy.q[i];
    acc += content.popularity[i] * (1.0 - (1.0 - qi) * std::exp(-load * qi));
  }
  return acc;
}

namespace detail {

inline double require_cacher_rate(double q_i, const NetworkConfig& cfg) {
  const double a = cfg.cacher_scale() * q_i;
  if (!(q_i > 0.0) || !(a > 0.0)) {
    throw Error(ErrorKind::UndefinedDistribution,
                "nearest-cacher distance undefined when no device caches the file (q_i = " +
                    std::to_string(q_i) + ")");
  }
  return a;
}

// 1/x - 1/(e^x - 1), with its series near 0.
inline double inv_minus_inv_expm1(double x) {
  if (x < 1e-2) {
    const double x2 = x * x;
    return 0.5 - x / 12.0 + x * x2 / 720.0 - x * x2 * x2 / 30240.0;
  }
  return 1.0 / x - 1.0 / std::expm1(x);
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace detail

/// Density of the distance to the nearest potential transmitter caching the
/// file, conditioned on that distance being at most R_d.
inline double nearest_cacher_pdf(double r, double q_i, const NetworkConfig& cfg) {
  const double a = detail::require_cacher_rate(q_i, cfg);
  if (r < 0.0 || r > cfg.r_d) return 0.0;
  const double norm = -std::expm1(-a * cfg.r_d * cfg.r_d);
  return 2.0 * a * r * std::exp(-a * r * r) / norm;
}

/// Second moment of the truncated nearest-cacher distance. Continuous at
/// q_i = 0, where it equals R_d^2 / 2.
inline double mean_sq_distance(double q_i, const NetworkConfig& cfg) {
  const double r2 = cfg.r_d * cfg.r_d;
  const double x = cfg.cacher_scale() * q_i * r2;
  if (!(x > 0.0)) return 0.5 * r2;
  return r2 * detail::inv_minus_inv_expm1(x);
}

/// Coefficient k such that the PPP interference Laplace factor is exp(-k r^2)
/// when active transmitters have density rho lambda_u p_hit^d and fading is
/// Rayleigh.
inline double interference_coefficient(double p_hit_d2d, const NetworkConfig& cfg) {
  const double delta = 2.0 / cfg.alpha;
  return std::numbers::pi * cfg.rho * cfg.lambda_u * p_hit_d2d * std::pow(cfg.theta, delta) /
         detail::sinc(delta);
}

inline double noise_coefficient(const NetworkConfig& cfg) { return cfg.theta * cfg.sigma2 / cfg.p_d; }

/// D2D success probability for a given total D2D hit probability, averaged
/// over the nearest-cacher distance by adaptive quadrature.
inline double success_prob_exact_given(double q_i, double p_hit_d2d, const NetworkConfig& cfg,
                                       const quad::Options& opts = {}) {
  const double a = detail::require_cacher_rate(q_i, cfg);
  const double k_int = interference_coefficient(p_hit_d2d, cfg);
  const double k_noise = noise_coefficient(cfg);
  const double norm = -std::expm1(-a * cfg.r_d * cfg.r_d);
  auto integrand = [&](double r) {
    const double r2 = r * r;
    const double pdf = 2.0 * a * r * std::exp(-a * r2) / norm;
    return pdf * std::exp(-k_int * r2 - k_noise * std::pow(r, cfg.alpha));
  };
  return quad::integrate(integrand, 0.0, cfg.r_d, opts).value;
}

/// Moment-swap approximation of the D2D success probability: the distance
/// in both exponentials is replaced by the root of its second moment.
inline double success_prob_approx_given(double q_i, double p_hit_d2d, const NetworkConfig& cfg) {
  detail::require_cacher_rate(q_i, cfg);
  const double m2 = mean_sq_distance(q_i, cfg);
  return std::exp(-interference_coefficient(p_hit_d2d, cfg) * m2 -
                  noise_coefficient(cfg) * std::pow(m2, 0.5 * cfg.alpha));
}

/// Exact-quadrature success probability of a D2D delivery of file i
/// (0-based popularity rank).
inline double success_prob_exact(std::size_t i, const ContentModel& content, const CachingPolicy& policy,
                                 const NetworkConfig& cfg, const quad::Options& opts = {}) {
  const double p_hit = d2d_hit_prob(content, policy, cfg);
  return success_prob_exact_given(policy.q.at(i), p_hit, cfg, opts);
}

inline double success_prob_approx(std::size_t i, const ContentModel& content, const CachingPolicy& policy,
                                  const NetworkConfig& cfg) {
  const double p_hit = d2d_hit_prob(content, policy, cfg);
  return success_prob_approx_given(policy.q.at(i), p_hit, cfg);
}

namespace detail {

template <class SuccessFn>
ThroughputBreakdown throughput_with(const ContentModel& content, const CachingPolicy& policy,
                                    const NetworkConfig& cfg, SuccessFn&& success) {
  const double p_hit = d2d_hit_prob(content, policy, cfg);
  const double request_density = cfg.rho * cfg.lambda_u;
  double self = 0.0;
  double d2d = 0.0;
  for (std::size_t i = 0; i < content.n_files; ++i) {
    const double pi = content.popularity[i];
    const double qi = policy.q[i];
    self += pi * qi;
    const double hit = d2d_hit_prob_file(qi, cfg);
    // No cacher within reach: nothing to deliver, and the conditional
    // distance law is undefined.
    if (hit > 0.0 && qi < 1.0) d2d += pi * (1.0 - qi) * hit * success(qi, p_hit);
  }
  ThroughputBreakdown out;
  out.self_served_density = request_density * self;
  out.d2d_served_density = request_density * d2d;
  out.total = out.self_served_density + out.d2d_served_density;
  return out;
}

}  // namespace detail

/// Approximate cache-aided throughput (moment-swap success probability).
inline ThroughputBreakdown throughput_hat(const ContentModel& content, const CachingPolicy& policy,
                                          const NetworkConfig& cfg) {
  return detail::throughput_with(content, policy, cfg, [&](double qi, double p_hit) {
    return success_prob_approx_given(qi, p_hit, cfg);
  });
}

/// Cache-aided throughput with success probabilities integrated numerically.
inline ThroughputBreakdown throughput_exact(const ContentModel& content, const CachingPolicy& policy,
                                            const NetworkConfig& cfg, const quad::Options& opts = {}) {
  return detail::throughput_with(content, policy, cfg, [&](double qi, double p_hit) {
    return success_prob_exact_given(qi, p_hit, cfg, opts);
  });
}

}  // namespace d2dcache
