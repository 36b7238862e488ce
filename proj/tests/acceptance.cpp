// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed here and never tuned at run time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "d2dcache/d2dcache.hpp"
#include "oracles.hpp"

using namespace d2dcache;

namespace {

constexpr double kDensities[] = {1e-4, 1e-3};
constexpr double kGammas[] = {0.5, 1.2};
constexpr std::size_t kCapacity = 2;
constexpr std::size_t kLibrary = 20;

NetworkConfig reference_network(double lambda) {
  NetworkConfig cfg;  // rho 0.5, R_d 75 m, P_d 0.1 mW, sigma^2 -110 dBm, theta 0 dB, alpha 4
  cfg.lambda_u = lambda;
  return cfg;
}

struct Report {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[FAIL] " + what + "; ";
    }
  }
  void note(const std::string& what) { detail += what + "; "; }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c, double d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Analytic consistency.
Report analytic_consistency() {
  Report r;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_decomp = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const auto content = ContentModel::zipf(n, 3.0 * unit(rng));
    CachingPolicy policy{std::vector<double>(n), n};
    for (double& v : policy.q) v = unit(rng);
    NetworkConfig cfg;
    cfg.lambda_u = std::pow(10.0, -5.0 + 3.0 * unit(rng));
    cfg.rho = unit(rng);
    cfg.r_d = 10.0 + 190.0 * unit(rng);
    double decomposed = self_request_prob(content, policy);
    for (std::size_t i = 0; i < n; ++i) {
      decomposed += content.popularity[i] * (1.0 - policy.q[i]) * d2d_hit_prob_file(policy.q[i], cfg);
    }
    worst_decomp = std::max(worst_decomp, std::abs(cache_hit_prob(content, policy, cfg) - decomposed));
  }
  r.check(worst_decomp <= 1e-12, fmt("decomposition max error %.2e", worst_decomp));
  r.note(fmt("decomposition max err %.1e", worst_decomp));

  double worst_moment = 0.0;
  for (double lambda : kDensities) {
    const auto cfg = reference_network(lambda);
    for (double q = 1e-4; q <= 1.0 + 1e-12; q *= 1.5) {
      const double moment =
          oracle::simpson([&](double x) { return x * x * nearest_cacher_pdf(x, q, cfg); }, 0.0, cfg.r_d, 40000);
      worst_moment = std::max(worst_moment, std::abs(mean_sq_distance(q, cfg) - moment) / moment);
    }
  }
  r.check(worst_moment <= 1e-8, fmt("second moment rel error %.2e", worst_moment));
  r.note(fmt("E[d^2] max rel err %.1e", worst_moment));

  const auto cfg = reference_network(1e-4);
  const double r2 = cfg.r_d * cfg.r_d;
  const double limit_err = std::max(std::abs(mean_sq_distance(0.0, cfg) - r2 / 2.0),
                                    std::abs(mean_sq_distance(1e-9, cfg) - r2 / 2.0));
  r.check(limit_err <= 1e-6 * r2, fmt("q->0 limit error %.2e", limit_err));
  return r;
}

// 2. Lambert W and KKT.
Report lambert_and_kkt() {
  Report r;
  double worst_residual = 0.0;
  for (int k = 0; k <= 1800; ++k) {
    const double x = std::pow(10.0, -12.0 + k * (18.0 / 1800.0));
    const double w = lambert_w0(x);
    worst_residual = std::max(worst_residual, std::abs(w * std::exp(w) - x) / std::max(1.0, x));
  }
  r.check(worst_residual <= 1e-12, fmt("W residual %.2e", worst_residual));
  r.note(fmt("W scaled residual %.1e", worst_residual));

  double worst_sum = 0.0, worst_kkt = 0.0, worst_oracle = 0.0;
  for (double lambda : kDensities) {
    for (double gamma : kGammas) {
      const auto content = ContentModel::zipf(kLibrary, gamma);
      const auto cfg = reference_network(lambda);
      const auto res = optimize_cache_hit(content, cfg, kCapacity);
      const double c = cfg.disc_load();
      double s = 0.0;
      for (double q : res.policy.q) s += q;
      worst_sum = std::max(worst_sum, std::abs(s - kCapacity));
      for (std::size_t i = 0; i < kLibrary; ++i) {
        const double q = res.policy.q[i];
        const double gain = hit_marginal_gain(q, content.popularity[i], c);
        if (q > 0.0 && q < 1.0) worst_kkt = std::max(worst_kkt, std::abs(gain - res.dual) / res.dual);
        if (q == 1.0 && gain < res.dual * (1.0 - 1e-12)) r.check(false, "saturated file below dual");
        if (q == 0.0 && gain > res.dual * (1.0 + 1e-12)) r.check(false, "empty file above dual");
      }
      const double oracle = oracle::projected_gradient_hit_max(content.popularity, c, kCapacity, 10, 20000, 7);
      worst_oracle = std::max(worst_oracle, std::abs(res.hit_prob - oracle));
    }
  }
  r.check(worst_sum <= 1e-9, fmt("capacity gap %.2e", worst_sum));
  r.check(worst_kkt <= 1e-7, fmt("KKT stationarity %.2e", worst_kkt));
  r.check(worst_oracle <= 1e-6, fmt("projected-gradient gap %.2e", worst_oracle));
  r.note(fmt("sum gap %.1e, KKT %.1e", worst_sum, worst_kkt));
  r.note(fmt("PGA gap %.1e", worst_oracle));

  double worst_uniform = 0.0;
  for (double lambda : kDensities) {
    const auto res = optimize_cache_hit(ContentModel::zipf(kLibrary, 0.0), reference_network(lambda), kCapacity);
    for (double q : res.policy.q) worst_uniform = std::max(worst_uniform, std::abs(q - 0.1));
  }
  r.check(worst_uniform <= 1e-6, fmt("gamma=0 deviation %.2e", worst_uniform));
  return r;
}

// 3. Simulated annealing dominance.
Report annealing_dominance() {
  Report r;
  for (double lambda : kDensities) {
    for (double gamma : kGammas) {
      const auto content = ContentModel::zipf(kLibrary, gamma);
      const auto cfg = reference_network(lambda);
      const double t_hit = throughput_hat(content, optimize_cache_hit(content, cfg, kCapacity).policy, cfg).total;
      const double t_mpc = throughput_hat(content, mpc_policy(content, kCapacity), cfg).total;
      double worst_gain = 1e300;
      for (std::uint64_t seed : {1u, 42u, 1234u}) {
        const auto sa = optimize_throughput_sa(content, cfg, kCapacity, AnnealSchedule{}, seed);
        r.check(sa.objective >= std::max(t_hit, t_mpc),
                fmt("lambda=%g gamma=%g: SA below a start", lambda, gamma));
        worst_gain = std::min(worst_gain, (sa.objective - t_hit) / t_hit);
      }
      if (lambda == 1e-3) {
        r.check(worst_gain >= 0.01, fmt("lambda=%g gamma=%g: gain over hit-opt below 1%%", lambda, gamma));
      }
      r.note(fmt("lambda=%g gamma=%g", lambda, gamma) + fmt(" min gain over hit-opt %.4f", worst_gain));
    }
  }
  return r;
}

// 4. Monte Carlo agreement.
Report monte_carlo_agreement() {
  Report r;
  const sim::SimWindow window{1500.0};
  for (double lambda : kDensities) {
    for (double gamma : kGammas) {
      const auto content = ContentModel::zipf(kLibrary, gamma);
      const auto cfg = reference_network(lambda);
      const auto thpt = optimize_throughput_sa(content, cfg, kCapacity, AnnealSchedule{}, 42).policy;
      const auto hit = optimize_cache_hit(content, cfg, kCapacity).policy;
      const auto mpc = mpc_policy(content, kCapacity);

      for (const auto* policy : {&thpt, &hit, &mpc}) {
        const auto est = sim::estimate_metrics(content, *policy, cfg, window, 200, 1);
        const double analytic = cache_hit_prob(content, *policy, cfg);
        r.check(std::abs(est.hit_prob - analytic) <= 3.0 * est.hit_stderr,
                fmt("lambda=%g gamma=%g hit prob", lambda, gamma) +
                    fmt(" sim %.5f vs %.5f", est.hit_prob, analytic));
        if (policy != &thpt) continue;
        const double t_hat = throughput_hat(content, *policy, cfg).total;
        const double gap = std::abs(est.throughput.mean - t_hat);
        const double allowed = std::max(3.0 * est.throughput.std_error, 0.05 * t_hat);
        r.check(gap <= allowed, fmt("lambda=%g gamma=%g throughput", lambda, gamma) +
                                    fmt(" sim %.4e vs T_hat %.4e", est.throughput.mean, t_hat) +
                                    fmt(" (rel %.4f)", gap / t_hat));
        r.note(fmt("l=%g g=%g", lambda, gamma) + fmt(" T rel gap %.4f", (est.throughput.mean - t_hat) / t_hat));
      }
    }
  }
  return r;
}

// 5. Figure orderings.
Report figure_orderings() {
  Report r;
  for (double gamma : kGammas) {
    const auto content = ContentModel::zipf(kLibrary, gamma);
    const auto sparse = reference_network(1e-4);
    const auto hit_s = optimize_cache_hit(content, sparse, kCapacity).policy;
    const auto thpt_s = optimize_throughput_sa(content, sparse, kCapacity, AnnealSchedule{}, 42).policy;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < kLibrary; ++i) max_diff = std::max(max_diff, std::abs(thpt_s.q[i] - hit_s.q[i]));
    r.check(max_diff <= 0.1, fmt("(a) gamma=%g sparse max |dq| = %.3f", gamma, max_diff));
    r.note(fmt("(a) g=%g max|dq| %.3f", gamma, max_diff));

    const auto dense = reference_network(1e-3);
    const auto hit_d = optimize_cache_hit(content, dense, kCapacity).policy;
    const auto thpt_d = optimize_throughput_sa(content, dense, kCapacity, AnnealSchedule{}, 42).policy;
    r.check(thpt_d.q[0] > hit_d.q[0], fmt("(b) gamma=%g dense q1 %.3f", gamma, thpt_d.q[0]));
  }

  experiment::ExperimentConfig cfg;
  cfg.seed = 42;
  const auto fig3 = experiment::cmd_reproduce(experiment::Figure::Fig3, cfg);
  // (gamma, lambda, strategy) -> (throughput, stderr) for simulated curves.
  std::map<std::tuple<double, double, std::string>, std::pair<double, double>> sim;
  for (const auto& row : fig3.rows) {
    if (std::get<std::string>(row[3]) != "sim") continue;
    sim[{std::get<double>(row[0]), std::get<double>(row[1]), std::get<std::string>(row[2])}] = {
        std::get<double>(row[4]), std::get<double>(row[5])};
  }
  for (double gamma : kGammas) {
    for (double lambda : experiment::fig3_densities()) {
      const auto [t_thpt, se_thpt] = sim.at({gamma, lambda, "thpt-opt"});
      const auto [t_hit, se_hit] = sim.at({gamma, lambda, "hit-opt"});
      r.check(t_thpt + std::hypot(se_thpt, se_hit) >= t_hit,
              fmt("(c) gamma=%g lambda=%g thpt-opt below hit-opt", gamma, lambda));
    }
  }
  const auto [t_mpc, se_mpc] = sim.at({1.2, 1e-3, "mpc"});
  const auto [t_hit, se_hit] = sim.at({1.2, 1e-3, "hit-opt"});
  r.check(t_mpc + std::hypot(se_mpc, se_hit) > t_hit, "(d) MPC not above hit-opt at lambda=1e-3, gamma=1.2");
  r.note(fmt("(d) T_mpc %.4e vs T_hit %.4e", t_mpc, t_hit));
  return r;
}

// 6. Determinism of the CLI.
Report cli_determinism() {
  Report r;
  const auto dir = std::filesystem::temp_directory_path() / ("d2dcache-accept-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    const auto path = dir / ("fig3_" + std::to_string(k) + ".csv");
    const std::string cmd = std::string("\"") + D2DCACHE_CLI + "\" reproduce fig3 --seed 42 --out \"" +
                            path.string() + "\"";
    const int status = std::system(cmd.c_str());
    r.check(status == 0, "CLI exit status " + std::to_string(status));
    std::ifstream is(path, std::ios::binary);
    std::stringstream buf;
    buf << is.rdbuf();
    outputs[k] = buf.str();
  }
  r.check(!outputs[0].empty(), "empty output");
  r.check(outputs[0] == outputs[1], "outputs differ");
  r.note("bytes " + std::to_string(outputs[0].size()));
  std::filesystem::remove_all(dir);
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Report()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 analytic consistency", 10.0, analytic_consistency},
      {"2 Lambert W / KKT", 10.0, lambert_and_kkt},
      {"3 SA dominance", 120.0, annealing_dominance},
      {"4 Monte Carlo agreement", 900.0, monte_carlo_agreement},
      {"5 figure orderings", 900.0, figure_orderings},
      {"6 reproduce determinism", 900.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = c.run();
    } catch (const std::exception& e) {
      rep.pass = false;
      rep.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) rep.check(false, fmt("runtime %.1f s over budget", secs));
    std::printf("%s  criterion %s (%.1f s): %s\n", rep.pass ? "PASS" : "FAIL", c.name, secs, rep.detail.c_str());
    std::fflush(stdout);
    failures += rep.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
