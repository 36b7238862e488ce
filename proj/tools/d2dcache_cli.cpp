#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "d2dcache/experiment.hpp"

namespace {

using namespace d2dcache;
using namespace d2dcache::experiment;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<double> gamma;
  std::string conflict;
  std::optional<std::size_t> snapshots;
  std::vector<std::string> sets;  // key=value overrides

  // --sa-* schedule overrides
  std::optional<double> sa_t0;
  std::optional<double> sa_cooling;
  std::optional<std::size_t> sa_moves;
  std::optional<std::size_t> sa_restarts;
  std::optional<double> sa_max_step;
  std::optional<double> sa_min_temperature_ratio;
  std::optional<std::size_t> sa_max_stale;
  bool sa_inequality = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Experiment config file (key = value)");
  cmd->add_option("--seed", f.seed, "RNG seed for annealing and simulation");
  cmd->add_option("--out", f.out, "Output path (default: stdout)");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--gamma", f.gamma, "Zipf exponent");
  cmd->add_option("--conflict", f.conflict, "Transmitter conflict rule")->check(CLI::IsMember({"nearest", "random"}));
  cmd->add_option("--snapshots", f.snapshots, "Monte Carlo snapshots per point");
  cmd->add_option("--set", f.sets, "Override any config key, e.g. --set lambda_u=5e-4");
  cmd->add_option("--sa-t0", f.sa_t0, "Initial annealing temperature (default: calibrated)");
  cmd->add_option("--sa-cooling", f.sa_cooling, "Geometric cooling factor");
  cmd->add_option("--sa-moves", f.sa_moves, "Moves per temperature");
  cmd->add_option("--sa-restarts", f.sa_restarts, "Independent annealing restarts");
  cmd->add_option("--sa-max-step", f.sa_max_step, "Largest probability mass moved at T0");
  cmd->add_option("--sa-min-temperature-ratio", f.sa_min_temperature_ratio, "Stop below this fraction of T0");
  cmd->add_option("--sa-max-stale", f.sa_max_stale, "Stop after this many temperatures without improvement");
  cmd->add_flag("--sa-inequality", f.sa_inequality, "Let annealing moves change the total cached mass");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config_path.empty() ? ExperimentConfig{} : load_config(f.config_path);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigParse, "--set expects key=value, got '" + kv + "'");
    set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output = f.out;
  if (!f.format.empty()) cfg.format = parse_format(f.format);
  if (f.gamma) cfg.gamma = *f.gamma;
  if (!f.conflict.empty()) cfg.conflict = parse_conflict(f.conflict);
  if (f.snapshots) cfg.n_snapshots = *f.snapshots;
  auto& s = cfg.schedule;
  if (f.sa_t0) s.initial_temperature = *f.sa_t0;
  if (f.sa_cooling) s.cooling = *f.sa_cooling;
  if (f.sa_moves) s.moves_per_temperature = *f.sa_moves;
  if (f.sa_restarts) s.restarts = *f.sa_restarts;
  if (f.sa_max_step) s.max_step = *f.sa_max_step;
  if (f.sa_min_temperature_ratio) s.min_temperature_ratio = *f.sa_min_temperature_ratio;
  if (f.sa_max_stale) s.max_stale_temperatures = *f.sa_max_stale;
  if (f.sa_inequality) s.inequality = true;
  return cfg;
}

void emit(const io::Table& table, const ExperimentConfig& cfg) {
  const std::string text = render(table, cfg.format);
  if (cfg.output.empty() || cfg.output == "-") {
    std::cout << text;
  } else {
    io::write_atomic(cfg.output, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic caching placement for D2D caching networks"};
  app.require_subcommand(1);

  CommonFlags optimize_flags, evaluate_flags, simulate_flags, reproduce_flags;
  auto* optimize = app.add_subcommand("optimize", "Caching probabilities per strategy");
  add_common_flags(optimize, optimize_flags);
  auto* evaluate = app.add_subcommand("evaluate", "Analytic and simulated metrics per sweep point and strategy");
  add_common_flags(evaluate, evaluate_flags);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo counters per sweep point and strategy");
  add_common_flags(simulate, simulate_flags);
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
  std::string figure;
  reproduce->add_option("figure", figure, "fig1, fig2 or fig3")->required();
  add_common_flags(reproduce, reproduce_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) {
      const auto cfg = resolve(optimize_flags);
      emit(cmd_optimize(cfg), cfg);
    } else if (evaluate->parsed()) {
      const auto cfg = resolve(evaluate_flags);
      emit(cmd_evaluate(cfg), cfg);
    } else if (simulate->parsed()) {
      const auto cfg = resolve(simulate_flags);
      emit(cmd_simulate(cfg), cfg);
    } else if (reproduce->parsed()) {
      const Figure fig = parse_figure(figure);
      const auto cfg = resolve(reproduce_flags);
      emit(cmd_reproduce(fig, cfg), figure_preset(fig, cfg));
    }
  } catch (const Error& e) {
    std::cerr << "d2dcache: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "d2dcache: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
