#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "d2dcache/model.hpp"

namespace d2dcache::sim {

/// Square simulation window with wrap-around edges.
struct SimWindow {
  double side_length = 1500.0;

  double area() const noexcept { return side_length * side_length; }

  void validate(const NetworkConfig& cfg) const {
    if (!(side_length >= 4.0 * cfg.r_d) || !std::isfinite(side_length)) {
      throw Error(ErrorKind::InvalidWindow, "window side " + std::to_string(side_length) +
                                                " m must be at least 4 R_d = " + std::to_string(4.0 * cfg.r_d) + " m");
    }
  }
};

/// How a transmitter chosen by receivers of different files picks the one
/// file it sends in the slot.
enum class ConflictRule { Nearest, Random };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double torus_delta(double a, double b, double side) {
  const double d = std::abs(a - b);
  return std::min(d, side - d);
}

inline double torus_distance_sq(Point a, Point b, double side) {
  const double dx = torus_delta(a.x, b.x, side);
  const double dy = torus_delta(a.y, b.y, side);
  return dx * dx + dy * dy;
}

inline double torus_distance(Point a, Point b, double side) { return std::sqrt(torus_distance_sq(a, b, side)); }

/// Draws a cache from the marginals q with a single uniform u in [0, 1):
/// intervals of length q_i are laid end to end on [0, sum q) and file i is
/// kept when one of the points u, u + 1, ..., u + m_d - 1 falls in its
/// interval. Each file is kept with probability exactly q_i, no file twice,
/// and exactly m_d files are kept when sum q = m_d.
inline std::vector<std::size_t> sample_cache(std::span<const double> q, std::size_t m_d, double u) {
  std::vector<double> edges(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0 && q[i] <= 1.0)) {
      throw Error(ErrorKind::BoundViolation, "q[" + std::to_string(i) + "] outside [0, 1]");
    }
    total += q[i];
    edges[i] = total;
  }
  if (total > static_cast<double>(m_d) + kCapacitySlack) {
    throw Error(ErrorKind::CapacityViolation, "sum(q) = " + std::to_string(total) + " exceeds capacity " +
                                                  std::to_string(m_d));
  }
  std::vector<std::size_t> picked;
  picked.reserve(m_d);
  for (std::size_t k = 0; k < m_d; ++k) {
    const double point = u + static_cast<double>(k);
    if (!(point < total)) break;
    const auto it = std::upper_bound(edges.begin(), edges.end(), point);
    picked.push_back(static_cast<std::size_t>(it - edges.begin()));
  }
  return picked;
}

struct FileCounters {
  std::uint64_t requests = 0;
  std::uint64_t self = 0;
  std::uint64_t d2d_hit = 0;
  std::uint64_t d2d_success = 0;
  std::uint64_t miss = 0;

  FileCounters& operator+=(const FileCounters& o) {
    requests += o.requests;
    self += o.self;
    d2d_hit += o.d2d_hit;
    d2d_success += o.d2d_success;
    miss += o.miss;
    return *this;
  }
  bool operator==(const FileCounters&) const = default;
};

/// Counters of one realized network. n_requests = n_self + n_d2d_hit + n_miss
/// and n_d2d_success <= n_d2d_hit always.
struct SnapshotOutcome {
  std::uint64_t n_devices = 0;
  std::uint64_t n_requests = 0;
  std::uint64_t n_self = 0;
  std::uint64_t n_d2d_hit = 0;
  std::uint64_t n_d2d_success = 0;
  std::uint64_t n_miss = 0;
  std::uint64_t n_transmitters = 0;
  std::uint64_t n_conflict_losses = 0;  // D2D hits dropped because their transmitter sent another file
  std::vector<FileCounters> per_file;

  bool operator==(const SnapshotOutcome&) const = default;
};

struct Device {
  Point position;
  bool is_active_requester = false;
  std::vector<std::size_t> cache;
  std::size_t request = 0;  // meaningful only when active

  bool holds(std::size_t file) const { return std::find(cache.begin(), cache.end(), file) != cache.end(); }
};

namespace detail {

// Bucket grid over the torus with cells no smaller than R_d, so every device
// within R_d of a point lies in the 3x3 block around the point's cell.
class CellGrid {
 public:
  CellGrid(double side, double reach)
      : side_(side), cells_(std::max<std::size_t>(3, static_cast<std::size_t>(side / reach))),
        cell_size_(side / static_cast<double>(cells_)), buckets_(cells_ * cells_) {}

  void insert(std::size_t id, Point p) { buckets_[index(cell(p.x), cell(p.y))].push_back(id); }

  template <class Visit>
  void visit_near(Point p, Visit&& visit) const {
    const std::size_t cx = cell(p.x);
    const std::size_t cy = cell(p.y);
    for (std::size_t dx = 0; dx < 3; ++dx) {
      for (std::size_t dy = 0; dy < 3; ++dy) {
        const std::size_t gx = (cx + cells_ + dx - 1) % cells_;
        const std::size_t gy = (cy + cells_ + dy - 1) % cells_;
        for (std::size_t id : buckets_[index(gx, gy)]) visit(id);
      }
    }
  }

 private:
  std::size_t cell(double v) const {
    return std::min(cells_ - 1, static_cast<std::size_t>(v / cell_size_));
  }
  std::size_t index(std::size_t gx, std::size_t gy) const { return gx * cells_ + gy; }

  double side_;
  std::size_t cells_;
  double cell_size_;
  std::vector<std::vector<std::size_t>> buckets_;
};

struct Link {
  std::size_t receiver;
  std::size_t transmitter;
  std::size_t file;
  double distance;
};

}  // namespace detail

/// The generator a snapshot with this seed draws from.
inline std::mt19937_64 snapshot_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

/// Draws the devices of one snapshot: PPP positions, activity marks, caches
/// and requests.
inline std::vector<Device> sample_devices(const ContentModel& content, const CachingPolicy& policy,
                                          const NetworkConfig& cfg, const SimWindow& window, std::mt19937_64& rng) {
  std::poisson_distribution<std::uint64_t> count(cfg.lambda_u * window.area());
  std::uniform_real_distribution<double> coord(0.0, window.side_length);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution active(cfg.rho);
  std::discrete_distribution<std::size_t> request(content.popularity.begin(), content.popularity.end());

  std::vector<Device> devices(count(rng));
  for (Device& d : devices) {
    d.position = {coord(rng), coord(rng)};
    d.is_active_requester = active(rng);
    d.cache = sample_cache(policy.q, policy.m_d, unit(rng));
    if (d.is_active_requester) d.request = request(rng);
  }
  return devices;
}

/// Realizes one network snapshot and resolves every request: self-service,
/// association to the nearest inactive device caching the file within R_d,
/// or a miss. Associated transmitters all transmit in the slot; each receiver
/// succeeds when its Rayleigh-faded SINR against all other active
/// transmitters reaches theta.
inline SnapshotOutcome sample_snapshot(const ContentModel& content, const CachingPolicy& policy,
                                       const NetworkConfig& cfg, const SimWindow& window, std::uint64_t rng_seed,
                                       ConflictRule conflict = ConflictRule::Nearest) {
  cfg.validate();
  window.validate(cfg);
  validate_policy(policy, content);

  std::mt19937_64 rng = snapshot_rng(rng_seed);
  const std::vector<Device> devices = sample_devices(content, policy, cfg, window, rng);
  const double side = window.side_length;
  const double reach_sq = cfg.r_d * cfg.r_d;

  detail::CellGrid grid(side, cfg.r_d);
  for (std::size_t id = 0; id < devices.size(); ++id) {
    if (!devices[id].is_active_requester) grid.insert(id, devices[id].position);
  }

  SnapshotOutcome out;
  out.n_devices = devices.size();
  out.per_file.assign(content.n_files, {});
  std::vector<detail::Link> links;

  for (std::size_t id = 0; id < devices.size(); ++id) {
    const Device& rx = devices[id];
    if (!rx.is_active_requester) continue;
    FileCounters& fc = out.per_file[rx.request];
    ++out.n_requests;
    ++fc.requests;
    if (rx.holds(rx.request)) {
      ++out.n_self;
      ++fc.self;
      continue;
    }
    std::size_t best = devices.size();
    double best_sq = reach_sq;
    grid.visit_near(rx.position, [&](std::size_t tx) {
      const double d_sq = torus_distance_sq(rx.position, devices[tx].position, side);
      if (d_sq <= best_sq && devices[tx].holds(rx.request) && (best == devices.size() || d_sq < best_sq || tx < best)) {
        best = tx;
        best_sq = d_sq;
      }
    });
    if (best == devices.size()) {
      ++out.n_miss;
      ++fc.miss;
      continue;
    }
    ++out.n_d2d_hit;
    ++fc.d2d_hit;
    links.push_back({id, best, rx.request, std::sqrt(best_sq)});
  }

  // One file per transmitter per slot; receivers of the same file share it.
  std::vector<std::size_t> order(links.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return links[a].transmitter < links[b].transmitter; });

  std::vector<std::size_t> transmitters;
  std::vector<bool> served(links.size(), false);
  std::uniform_int_distribution<std::size_t> pick_any;
  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin;
    const std::size_t tx = links[order[begin]].transmitter;
    while (end < order.size() && links[order[end]].transmitter == tx) ++end;
    transmitters.push_back(tx);

    std::size_t chosen = order[begin];
    if (conflict == ConflictRule::Nearest) {
      for (std::size_t k = begin; k < end; ++k) {
        if (links[order[k]].distance < links[chosen].distance) chosen = order[k];
      }
    } else {
      chosen = order[begin + pick_any(rng, decltype(pick_any)::param_type(0, end - begin - 1))];
    }
    for (std::size_t k = begin; k < end; ++k) {
      if (links[order[k]].file == links[chosen].file) {
        served[order[k]] = true;
      } else {
        ++out.n_conflict_losses;
      }
    }
    begin = end;
  }
  out.n_transmitters = transmitters.size();

  std::exponential_distribution<double> fade(1.0);
  const double half_alpha = 0.5 * cfg.alpha;
  for (std::size_t k = 0; k < links.size(); ++k) {
    if (!served[k]) continue;
    const detail::Link& link = links[k];
    const Point at = devices[link.receiver].position;
    const double signal = cfg.p_d * fade(rng) * std::pow(link.distance * link.distance, -half_alpha);
    double interference = 0.0;
    for (std::size_t tx : transmitters) {
      if (tx == link.transmitter) continue;
      const double d_sq = torus_distance_sq(at, devices[tx].position, side);
      interference += cfg.p_d * fade(rng) * std::pow(d_sq, -half_alpha);
    }
    if (signal >= cfg.theta * (cfg.sigma2 + interference)) {
      ++out.n_d2d_success;
      ++out.per_file[link.file].d2d_success;
    }
  }
  return out;
}

struct ThroughputEstimate {
  double mean = 0.0;    // served requests per m^2
  double std_error = 0.0;
  std::size_t n_snapshots = 0;
};

struct MetricsEstimate {
  double hit_prob = 0.0;
  double hit_stderr = 0.0;
  ThroughputEstimate throughput;
  double conflict_loss_rate = 0.0;  // fraction of D2D hits lost to transmitter conflicts
  SnapshotOutcome totals;
};

namespace detail {

struct RunningMean {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_errorof_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace detail

/// Monte Carlo estimates over n_snapshots independent snapshots seeded
/// base_seed, base_seed + 1, ... The hit probability averages per-snapshot
/// ratios over snapshots with at least one request; throughput averages
/// (self + successful D2D) per unit area.
inline MetricsEstimate estimate_metrics(const ContentModel& content, const CachingPolicy& policy,
                                        const NetworkConfig& cfg, const SimWindow& window, std::size_t n_snapshots,
                                        std::uint64_t base_seed, ConflictRule conflict = ConflictRule::Nearest) {
  if (n_snapshots == 0) throw Error(ErrorKind::InvalidParameter, "n_snapshots must be >= 1");
  detail::RunningMean hit;
  detail::RunningMean thpt;
  MetricsEstimate out;
  out.totals.per_file.assign(content.n_files, {});
  for (std::size_t k = 0; k < n_snapshots; ++k) {
    const SnapshotOutcome s = sample_snapshot(content, policy, cfg, window, base_seed + k, conflict);
    if (s.n_requests > 0) {
      hit.add(static_cast<double>(s.n_self + s.n_d2d_hit) / static_cast<double>(s.n_requests));
    }
    thpt.add(static_cast<double>(s.n_self + s.n_d2d_success) / window.area());
    out.totals.n_devices += s.n_devices;
    out.totals.n_requests += s.n_requests;
    out.totals.n_self += s.n_self;
    out.totals.n_d2d_hit += s.n_d2d_hit;
    out.totals.n_d2d_success += s.n_d2d_success;
    out.totals.n_miss += s.n_miss;
    out.totals.n_transmitters += s.n_transmitters;
    out.totals.n_conflict_losses += s.n_conflict_losses;
    for (std::size_t i = 0; i < content.n_files; ++i) out.totals.per_file[i] += s.per_file[i];
  }
  out.hit_prob = hit.mean();
  out.hit_stderr = hit.std_errorof_mean();
  out.throughput = {thpt.mean(), thpt.std_errorof_mean(), n_snapshots};
  out.conflict_loss_rate = out.totals.n_d2d_hit
                               ? static_cast<double>(out.totals.n_conflict_losses) /
                                     static_cast<double>(out.totals.n_d2d_hit)
                               : 0.0;
  return out;
}

}  // namespace d2dcache::sim
