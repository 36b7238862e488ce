#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "d2dcache/error.hpp"

namespace d2dcache {

/// Physical and topological parameters of the D2D network. Powers are linear
/// milliwatts and the SINR target is linear; dB conversions live at the CLI
/// boundary (see db_to_linear).
struct NetworkConfig {
  double lambda_u = 1e-4;  // devices per m^2
  double rho = 0.5;        // probability a device is an active requester
  double r_d = 75.0;       // maximum D2D link distance, m
  double p_d = 0.1;        // transmit power, mW
  double sigma2 = 1e-11;   // noise power, mW
  double alpha = 4.0;      // path-loss exponent
  double theta = 1.0;      // SINR threshold, linear

  /// pi (1 - rho) lambda_u: density of potential transmitters times pi.
  double cacher_scale() const noexcept {
    return std::numbers::pi * (1.0 - rho) * lambda_u;
  }

  /// pi (1 - rho) lambda_u R_d^2, the expected number of potential
  /// transmitters inside the search disc.
  double disc_load() const noexcept { return cacher_scale() * r_d * r_d; }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidParameter, what); };
    if (!(lambda_u > 0.0)) fail("lambda_u must be > 0");
    if (!(rho >= 0.0 && rho <= 1.0)) fail("rho must lie in [0, 1]");
    if (!(r_d > 0.0)) fail("r_d must be > 0");
    if (!(p_d > 0.0)) fail("p_d must be > 0");
    if (!(sigma2 >= 0.0)) fail("sigma2 must be >= 0");
    if (!(alpha > 2.0)) fail("alpha must be > 2");
    if (!(theta > 0.0)) fail("theta must be > 0");
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Zipf request probabilities p_i = i^-gamma / sum_j j^-gamma for i = 1..n.
inline std::vector<double> zipf_popularity(std::size_t n_files, double gamma) {
  if (n_files == 0) throw Error(ErrorKind::InvalidParameter, "n_files must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidParameter, "gamma must be finite and >= 0");
  }
  std::vector<double> p(n_files);
  for (std::size_t i = 0; i < n_files; ++i) {
    p[i] = std::pow(static_cast<double>(i + 1), -gamma);
  }
  // Smallest terms first.
  double norm = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) norm += *it;
  for (double& v : p) v /= norm;
  return p;
}

struct ContentModel {
  std::size_t n_files = 0;
  double gamma = 0.0;
  std::vector<double> popularity;

  static ContentModel zipf(std::size_t n_files, double gamma) {
    return ContentModel{n_files, gamma, zipf_popularity(n_files, gamma)};
  }
};

struct CachingPolicy {
  std::vector<double> q;
  std::size_t m_d = 0;

  double mass() const noexcept { return std::accumulate(q.begin(), q.end(), 0.0); }
};

inline constexpr double kCapacitySlack = 1e-9;

inline void require_dimension(std::span<const double> q, const ContentModel& content) {
  if (q.size() != content.n_files || content.popularity.size() != content.n_files) {
    throw Error(ErrorKind::DimensionMismatch,
                "policy has " + std::to_string(q.size()) + " entries, library has " +
                    std::to_string(content.n_files) + " files");
  }
}

/// Returns the policy unchanged when it is feasible for the given library.
/// A capacity equal to the library size is accepted (every device caches
/// everything).
inline const CachingPolicy& validate_policy(const CachingPolicy& policy, const ContentModel& content) {
  require_dimension(policy.q, content);
  if (policy.m_d > content.n_files) {
    throw Error(ErrorKind::CapacityExceedsLibrary,
                "m_d = " + std::to_string(policy.m_d) + " exceeds library size " +
                    std::to_string(content.n_files));
  }
  for (std::size_t i = 0; i < policy.q.size(); ++i) {
    const double qi = policy.q[i];
    if (!(qi >= 0.0 && qi <= 1.0)) {
      throw Error(ErrorKind::BoundViolation,
                  "q[" + std::to_string(i) + "] = " + std::to_string(qi) + " outside [0, 1]");
    }
  }
  const double total = policy.mass();
  if (total > static_cast<double>(policy.m_d) + kCapacitySlack) {
    throw Error(ErrorKind::CapacityViolation, "sum(q) = " + std::to_string(total) +
                                                  " exceeds capacity " + std::to_string(policy.m_d));
  }
  return policy;
}

}  // namespace d2dcache
