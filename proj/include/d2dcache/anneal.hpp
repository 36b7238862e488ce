#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "d2dcache/analytics.hpp"
#include "d2dcache/optim.hpp"

namespace d2dcache {

/// Geometric-cooling schedule for the throughput annealer. Every field is
/// overridable from the CLI (--sa-*).
struct AnnealSchedule {
  std::optional<double> initial_temperature;  // calibrated from probe moves when unset
  double target_acceptance = 0.8;
  std::size_t probe_moves = 100;
  double cooling = 0.95;
  std::size_t moves_per_temperature = 200;
  double min_temperature_ratio = 1e-4;
  std::size_t max_stale_temperatures = 50;
  std::size_t restarts = 4;
  double max_step = 0.5;        // largest mass moved by one step at T_0
  double min_step_ratio = 1e-3; // floor on the temperature scaling of the step
  bool inequality = false;      // allow moves that shrink/grow total mass

  void validate() const {
    auto fail = [](const char* what) { throw Error(ErrorKind::InvalidSchedule, what); };
    if (initial_temperature && !(*initial_temperature > 0.0)) fail("initial temperature must be > 0");
    if (!(cooling > 0.0 && cooling < 1.0)) fail("cooling factor must lie in (0, 1)");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) fail("target acceptance must lie in (0, 1)");
    if (!(min_temperature_ratio > 0.0 && min_temperature_ratio < 1.0)) fail("min temperature ratio must lie in (0, 1)");
    if (!(max_step > 0.0)) fail("max step must be > 0");
    if (!(min_step_ratio > 0.0 && min_step_ratio <= 1.0)) fail("min step ratio must lie in (0, 1]");
    if (moves_per_temperature == 0) fail("moves per temperature must be > 0");
    if (probe_moves == 0) fail("probe moves must be > 0");
    if (restarts == 0) fail("restarts must be > 0");
    if (max_stale_temperatures == 0) fail("stale temperature limit must be > 0");
  }
};

struct AnnealTracePoint {
  double temperature;
  double best_objective;
};

struct AnnealResult {
  CachingPolicy policy;
  double objective = 0.0;
  std::vector<AnnealTracePoint> trace;
  std::uint64_t seed = 0;
};

namespace detail {

class ThroughputAnnealer {
 public:
  ThroughputAnnealer(const ContentModel& content, const NetworkConfig& cfg, std::size_t m_d,
                     const AnnealSchedule& schedule)
      : content_(content), cfg_(cfg), m_d_(m_d), schedule_(schedule) {}

  double objective(const std::vector<double>& q) const {
    return throughput_hat(content_, CachingPolicy{q, m_d_}, cfg_).total;
  }

  // Proposes a neighbour of q in place. Returns false when the move is null.
  bool propose(std::vector<double>& q, double step, std::mt19937_64& rng) const {
    const std::size_t n = q.size();
    if (n < 2) return false;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (schedule_.inequality && unit(rng) < 0.5) {
      const std::size_t i = pick(rng);
      const double room = static_cast<double>(m_d_) - sum(q);
      const double delta = std::clamp((2.0 * unit(rng) - 1.0) * step, -q[i], std::min(1.0 - q[i], room));
      if (delta == 0.0) return false;
      q[i] += delta;
      return true;
    }

    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (n > 1) {
      while (j == i) j = pick(rng);
    }
    // Mass moves from j to i, truncated at the box boundary.
    const double delta = std::min({unit(rng) * step, q[j], 1.0 - q[i]});
    if (!(delta > 0.0)) return false;
    q[i] = delta == 1.0 - q[i] ? 1.0 : q[i] + delta;
    q[j] = delta == q[j] ? 0.0 : q[j] - delta;
    return true;
  }

  double calibrate_temperature(const std::vector<double>& start, double start_value, std::mt19937_64& rng) const {
    if (schedule_.initial_temperature) return *schedule_.initial_temperature;
    double downhill = 0.0;
    std::size_t n_down = 0;
    for (std::size_t k = 0; k < schedule_.probe_moves; ++k) {
      std::vector<double> probe = start;
      if (!propose(probe, schedule_.max_step, rng)) continue;
      const double diff = objective(probe) - start_value;
      if (diff < 0.0) {
        downhill -= diff;
        ++n_down;
      }
    }
    if (n_down == 0 || !(downhill > 0.0)) return std::max(std::abs(start_value), 1e-300) * 1e-3;
    return -(downhill / static_cast<double>(n_down)) / std::log(schedule_.target_acceptance);
  }

  struct Run {
    std::vector<double> best;
    double best_value;
    std::vector<AnnealTracePoint> trace;
  };

  Run run(std::vector<double> current, std::mt19937_64& rng) const {
    double current_value = objective(current);
    Run out{current, current_value, {}};
    const double t0 = calibrate_temperature(current, current_value, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double temperature = t0;
    std::size_t stale = 0;
    while (temperature >= schedule_.min_temperature_ratio * t0 && stale < schedule_.max_stale_temperatures) {
      const double step = schedule_.max_step * std::max(temperature / t0, schedule_.min_step_ratio);
      bool improved = false;
      for (std::size_t m = 0; m < schedule_.moves_per_temperature; ++m) {
        std::vector<double> candidate = current;
        if (!propose(candidate, step, rng)) continue;
        const double value = objective(candidate);
        const double diff = value - current_value;
        if (diff >= 0.0 || unit(rng) < std::exp(diff / temperature)) {
          current = std::move(candidate);
          current_value = value;
          if (current_value > out.best_value) {
            out.best = current;
            out.best_value = current_value;
            improved = true;
          }
        }
      }
      stale = improved ? 0 : stale + 1;
      out.trace.push_back({temperature, out.best_value});
      temperature *= schedule_.cooling;
    }
    return out;
  }

  std::vector<double> random_start(std::mt19937_64& rng) const {
    const std::size_t n = content_.n_files;
    std::vector<double> q(n, static_cast<double>(m_d_) / static_cast<double>(n));
    for (std::size_t k = 0; k < 10 * n; ++k) propose(q, 1.0, rng);
    return q;
  }

 private:
  static double sum(const std::vector<double>& q) {
    double s = 0.0;
    for (double v : q) s += v;
    return s;
  }

  const ContentModel& content_;
  const NetworkConfig& cfg_;
  std::size_t m_d_;
  const AnnealSchedule& schedule_;
};

}  // namespace detail

/// Maximizes the approximate cache-aided throughput by simulated annealing on
/// the capacity face sum(q) = M_d (or the full feasible set in inequality
/// mode). Restart 0 starts at the cache-hit optimum, restart 1 at MPC and the
/// rest at random feasible points; both optima are also kept as candidates,
/// so the result never scores below either. Ties go to the earliest
/// candidate.
inline AnnealResult optimize_throughput_sa(const ContentModel& content, const NetworkConfig& cfg, std::size_t m_d,
                                           const AnnealSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  cfg.validate();
  const HitOptResult hit = optimize_cache_hit(content, cfg, m_d);
  const CachingPolicy mpc = mpc_policy(content, m_d);
  const detail::ThroughputAnnealer annealer(content, cfg, m_d, schedule);

  AnnealResult best;
  best.seed = seed;
  best.policy = hit.policy;
  best.objective = annealer.objective(hit.policy.q);
  if (const double v = annealer.objective(mpc.q); v > best.objective) {
    best.policy = mpc;
    best.objective = v;
  }

  for (std::size_t r = 0; r < schedule.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::vector<double> start = r == 0 ? hit.policy.q : r == 1 ? mpc.q : annealer.random_start(rng);
    auto run = annealer.run(std::move(start), rng);
    if (r == 0 || run.best_value > best.objective) best.trace = run.trace;
    if (run.best_value > best.objective) {
      best.policy = CachingPolicy{std::move(run.best), m_d};
      best.objective = run.best_value;
    }
  }
  return best;
}

}  // namespace d2dcache
