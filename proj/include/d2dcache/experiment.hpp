#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "d2dcache/analytics.hpp"
#include "d2dcache/anneal.hpp"
#include "d2dcache/experiment_config.hpp"
#include "d2dcache/optim.hpp"
#include "d2dcache/sim.hpp"
#include "d2dcache/table.hpp"

namespace d2dcache::experiment {

inline constexpr std::string_view kToolVersion = "1.0.0";

inline nlohmann::json run_metadata(const ExperimentConfig& cfg, std::string_view command) {
  return nlohmann::json{{"tool", "d2dcache"},
                        {"version", kToolVersion},
                        {"command", command},
                        {"config_hash", config_hash(cfg, command)},
                        {"seed", cfg.seed},
                        {"config", cfg.to_json()}};
}

/// Caching policy of one strategy at the config's operating point. The
/// throughput optimizer is seeded with cfg.seed.
inline CachingPolicy solve_strategy(const ExperimentConfig& cfg, Strategy strategy) {
  const ContentModel content = cfg.content();
  const NetworkConfig net = cfg.network();
  switch (strategy) {
    case Strategy::HitOpt: return optimize_cache_hit(content, net, cfg.m_d).policy;
    case Strategy::ThptOpt: return optimize_throughput_sa(content, net, cfg.m_d, cfg.schedule, cfg.seed).policy;
    case Strategy::Mpc: return mpc_policy(content, cfg.m_d);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown strategy");
}

struct StrategyMetrics {
  Strategy strategy;
  CachingPolicy policy;
  double hit_prob = 0.0;
  double throughput_hat = 0.0;
  std::optional<double> throughput_exact;
  std::optional<sim::MetricsEstimate> simulated;
};

struct PointRequest {
  bool exact = true;
  bool simulate = true;
};

inline std::vector<StrategyMetrics> evaluate_point(const ExperimentConfig& cfg, const std::vector<Strategy>& strategies,
                                                   PointRequest want = {}) {
  cfg.validate();
  const ContentModel content = cfg.content();
  const NetworkConfig net = cfg.network();
  std::vector<StrategyMetrics> out;
  for (Strategy s : strategies) {
    StrategyMetrics m{s, solve_strategy(cfg, s)};
    m.hit_prob = cache_hit_prob(content, m.policy, net);
    m.throughput_hat = throughput_hat(content, m.policy, net).total;
    if (want.exact) m.throughput_exact = throughput_exact(content, m.policy, net).total;
    if (want.simulate) {
      m.simulated = sim::estimate_metrics(content, m.policy, net, cfg.window(), cfg.n_snapshots, cfg.seed, cfg.conflict);
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace detail {

struct SweepPoint {
  std::string param;
  double value;
  ExperimentConfig cfg;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.sweep_param.empty()) return {{"lambda_u", cfg.lambda_u, cfg}};
  std::vector<SweepPoint> out;
  for (double v : cfg.sweep_values) out.push_back({cfg.sweep_param, v, cfg.with_parameter(cfg.sweep_param, v)});
  return out;
}

inline void append_policy_rows(io::Table& table, Strategy s, const ContentModel& content, const CachingPolicy& policy) {
  for (std::size_t i = 0; i < content.n_files; ++i) {
    table.rows.push_back({std::string(to_string(s)), static_cast<std::uint64_t>(i + 1), content.popularity[i],
                          policy.q[i]});
  }
}

}  // namespace detail

/// Per strategy, the caching probability of every file (1-based popularity
/// rank). Sweep settings are ignored.
inline io::Table cmd_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  io::Table table;
  table.metadata = run_metadata(cfg, "optimize");
  table.columns = {"strategy", "file_index", "popularity", "q"};
  const ContentModel content = cfg.content();
  for (Strategy s : cfg.strategies) detail::append_policy_rows(table, s, content, solve_strategy(cfg, s));
  return table;
}

/// Analytic and simulated metrics per (sweep value, strategy).
inline io::Table cmd_evaluate(const ExperimentConfig& cfg) {
  cfg.validate();
  io::Table table;
  table.metadata = run_metadata(cfg, "evaluate");
  const std::string hash = table.metadata["config_hash"];
  table.columns = {"sweep_param",    "sweep_value",         "strategy",         "hit_prob",
                   "throughput_hat", "throughput_exact",    "hit_prob_sim",     "hit_prob_sim_stderr",
                   "throughput_sim", "throughput_sim_stderr", "conflict_loss_rate", "seed",
                   "config_hash"};
  for (const auto& point : detail::sweep_points(cfg)) {
    for (const auto& m : evaluate_point(point.cfg, cfg.strategies)) {
      const auto& est = *m.simulated;
      table.rows.push_back({point.param, point.value, std::string(to_string(m.strategy)), m.hit_prob,
                            m.throughput_hat, *m.throughput_exact, est.hit_prob, est.hit_stderr,
                            est.throughput.mean, est.throughput.std_error, est.conflict_loss_rate, cfg.seed, hash});
    }
  }
  return table;
}

/// Raw Monte Carlo counters and estimates per (sweep value, strategy).
inline io::Table cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  io::Table table;
  table.metadata = run_metadata(cfg, "simulate");
  const std::string hash = table.metadata["config_hash"];
  table.columns = {"sweep_param", "sweep_value", "strategy",       "n_snapshots",      "requests",
                   "self",        "d2d_hit",     "d2d_success",    "miss",             "transmitters",
                   "conflict_losses", "hit_prob", "hit_prob_stderr", "throughput",     "throughput_stderr",
                   "seed",        "config_hash"};
  for (const auto& point : detail::sweep_points(cfg)) {
    for (const auto& m : evaluate_point(point.cfg, cfg.strategies, {.exact = false, .simulate = true})) {
      const auto& est = *m.simulated;
      const auto& t = est.totals;
      table.rows.push_back({point.param, point.value, std::string(to_string(m.strategy)),
                            static_cast<std::uint64_t>(est.throughput.n_snapshots), t.n_requests, t.n_self,
                            t.n_d2d_hit, t.n_d2d_success, t.n_miss, t.n_transmitters, t.n_conflict_losses,
                            est.hit_prob, est.hit_stderr, est.throughput.mean, est.throughput.std_error, cfg.seed,
                            hash});
    }
  }
  return table;
}

enum class Figure { Fig1, Fig2, Fig3 };

inline Figure parse_figure(const std::string& name) {
  if (name == "fig1") return Figure::Fig1;
  if (name == "fig2") return Figure::Fig2;
  if (name == "fig3") return Figure::Fig3;
  throw Error(ErrorKind::UnknownFigure, "unknown figure '" + name + "' (expected fig1, fig2 or fig3)");
}

inline std::string_view to_string(Figure f) {
  switch (f) {
    case Figure::Fig1: return "fig1";
    case Figure::Fig2: return "fig2";
    case Figure::Fig3: return "fig3";
  }
  return "?";
}

inline const std::vector<double>& fig3_densities() {
  static const std::vector<double> v = {1e-4, 2.5e-4, 5e-4, 7.5e-4, 1e-3};
  return v;
}

inline const std::vector<double>& fig3_gammas() {
  static const std::vector<double> v = {0.5, 1.2};
  return v;
}

/// Bundled preset for a figure, layered on `base` (which carries the seed,
/// simulation size, annealing schedule and, for fig1/fig2, gamma).
inline ExperimentConfig figure_preset(Figure figure, ExperimentConfig base = {}) {
  base.strategies = {Strategy::HitOpt, Strategy::ThptOpt, Strategy::Mpc};
  base.sweep_param.clear();
  base.sweep_values.clear();
  switch (figure) {
    case Figure::Fig1: base.lambda_u = 1e-4; break;
    case Figure::Fig2: base.lambda_u = 1e-3; break;
    case Figure::Fig3:
      base.sweep_param = "lambda_u";
      base.sweep_values = fig3_densities();
      break;
  }
  return base;
}

/// Data behind a figure. fig1/fig2: strategy,file_index,popularity,q.
/// fig3: gamma,lambda_u,strategy,source,throughput,stderr with four curves
/// per gamma (thpt-opt sim, thpt-opt analytic, hit-opt sim, mpc sim).
inline io::Table cmd_reproduce(Figure figure, const ExperimentConfig& base = {}) {
  const ExperimentConfig cfg = figure_preset(figure, base);
  cfg.validate();
  const std::string command = "reproduce " + std::string(to_string(figure));
  io::Table table;
  table.metadata = run_metadata(cfg, command);

  if (figure != Figure::Fig3) {
    table.columns = {"strategy", "file_index", "popularity", "q"};
    const ContentModel content = cfg.content();
    for (Strategy s : cfg.strategies) detail::append_policy_rows(table, s, content, solve_strategy(cfg, s));
    return table;
  }

  table.columns = {"gamma", "lambda_u", "strategy", "source", "throughput", "stderr"};
  for (double gamma : fig3_gammas()) {
    for (double lambda : fig3_densities()) {
      ExperimentConfig point = cfg.with_parameter("gamma", gamma).with_parameter("lambda_u", lambda);
      const auto metrics = evaluate_point(point, {Strategy::ThptOpt, Strategy::HitOpt, Strategy::Mpc},
                                          {.exact = false, .simulate = true});
      auto sim_row = [&](const StrategyMetrics& m) {
        table.rows.push_back({gamma, lambda, std::string(to_string(m.strategy)), std::string("sim"),
                              m.simulated->throughput.mean, m.simulated->throughput.std_error});
      };
      sim_row(metrics[0]);
      table.rows.push_back({gamma, lambda, std::string("thpt-opt"), std::string("analytic"),
                            metrics[0].throughput_hat, 0.0});
      sim_row(metrics[1]);
      sim_row(metrics[2]);
    }
  }
  return table;
}

inline std::string render(const io::Table& table, OutputFormat format) {
  return format == OutputFormat::Json ? io::to_json(table) : io::to_csv(table);
}

}  // namespace d2dcache::experiment
