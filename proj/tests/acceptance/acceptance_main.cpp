// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end gate: one line of PASS/FAIL per criterion, nonzero exit on any
// failure. Expect a few minutes of runtime at the default Monte Carlo sizes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairbeam/algorithms.hpp"
#include "fairbeam/reductions.hpp"
#include "fairbeam/scenario.hpp"
#include "fairbeam/sweep.hpp"
#include "fairbeam/verify.hpp"
#include "fairbeam/wmmse.hpp"
#include "support/test_oracles.hpp"

using namespace fairbeam;
using Clock = std::chrono::steady_clock;

namespace {

struct Gate {
  int failures = 0;

  void report(int index, const std::string& name, bool pass,
              const std::string& detail, double seconds) {
    std::printf("[%2d] %-34s %s  (%s, %.1f s)\n", index, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

ScenarioSpec paper_scenario(double snr_db, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.K = 3;
  spec.M_tilde = 4;
  spec.N_tilde = 1;
  spec.snr_db = snr_db;
  spec.master_seed = seed;
  return spec;
}

// --- criterion 1: single-user near-optimality ---------------------------

void criterion_single_user(Gate& gate) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  const std::array<double, 4> snrs = {-10.0, 0.0, 10.0, 20.0};
  for (int antennas : {2, 4}) {
    for (double snr : snrs) {
      for (int trial = 0; trial < 100; ++trial) {
        Rng rng = Rng::stream({90001u, static_cast<std::uint64_t>(antennas),
                               static_cast<std::uint64_t>(snr + 100),
                               static_cast<std::uint64_t>(trial)});
        NetworkConfig cfg(1, antennas, 1,
                          Eigen::VectorXd::Constant(1, snr_to_power_w(snr)),
                          1.0, 10.0, Eigen::VectorXd::Constant(1, 1.0));
        Eigen::MatrixXcd row(1, antennas);
        for (int i = 0; i < antennas; ++i) row(0, i) = rng.complex_normal();
        ChannelSet h(row);
        const SingleUserOracle oracle = oracle_single_user_ee(h, cfg);
        const SolveResult res =
            maxmin_ee(h, cfg, default_init(h, cfg), 1e-7, 1e-7);
        if (res.status != AlgoStatus::kConverged) {
          worst = 1.0;
          continue;
        }
        worst = std::max(worst, std::abs(res.min_ee - oracle.ee) / oracle.ee);
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(1, "single_user_near_optimality",
              worst <= 1e-3 && secs < 60.0,
              fmt("worst rel gap %.2e, bound 1e-3", worst), secs);
}

// --- criterion 2: initialization robustness -----------------------------

void criterion_init_robustness(Gate& gate) {
  const auto t0 = Clock::now();
  double worst_spread = 0.0;
  for (int channel = 0; channel < 10; ++channel) {
    const ScenarioSpec spec = paper_scenario(15.0, 7100 + channel);
    const Drop drop = generate_drop(spec, 0);
    double lo = 1e300, hi = -1e300;
    for (int init_idx = 0; init_idx < 10; ++init_idx) {
      Rng rng = Rng::stream({90002u, static_cast<std::uint64_t>(channel),
                             static_cast<std::uint64_t>(init_idx)});
      const BeamformerSet init =
          random_feasible_init(drop.channels, drop.config, rng);
      const SolveResult res =
          maxmin_ee(drop.channels, drop.config, init, 1e-5, 1e-5);
      if (res.status != AlgoStatus::kConverged) {
        lo = 0.0;
        hi = 1e300;
        break;
      }
      lo = std::min(lo, res.min_ee);
      hi = std::max(hi, res.min_ee);
    }
    worst_spread = std::max(worst_spread, (hi - lo) / hi);
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(2, "initialization_robustness", worst_spread <= 1e-3,
              fmt("worst relative spread %.2e, bound 1e-3", worst_spread),
              secs);
}

// --- criteria 3-5: the Monte Carlo comparison ----------------------------

struct SweepStats {
  std::vector<double> snr;
  // mean[snr][algo], per-drop values kept for the paired dominance check
  std::vector<std::array<double, 4>> mean;
  std::vector<PairedDrops> raw;
};

SweepStats run_comparison(int drops) {
  SweepStats stats;
  stats.snr = {-20.0, -15.0, -10.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  for (double snr : stats.snr) {
    const ScenarioSpec spec = paper_scenario(snr, 555000);
    PairedDrops paired = run_paired_drops(spec, drops, 1e-4, 0);
    std::array<double, 4> mean{};
    int ok = 0;
    for (int d = 0; d < drops; ++d) {
      if (!paired.ok[d]) continue;
      ++ok;
      for (int a = 0; a < 4; ++a) mean[a] += paired.min_ee[a][d];
    }
    for (int a = 0; a < 4; ++a) mean[a] = ok > 0 ? mean[a] / ok : 0.0;
    stats.mean.push_back(mean);
    stats.raw.push_back(std::move(paired));
    std::fprintf(stderr,
                 "    sweep snr %+5.1f dB: ok %d/%d, mean min-EE "
                 "%.3e %.3e %.3e %.3e\n",
                 snr, ok, drops, mean[0], mean[1], mean[2], mean[3]);
  }
  return stats;
}

void criterion_ordering(Gate& gate, const SweepStats& stats, int drops) {
  const auto t0 = Clock::now();
  bool mean_ordering = true;
  double worst_fraction = 1.0;
  for (std::size_t p = 0; p < stats.snr.size(); ++p) {
    if (stats.snr[p] < 0.0) continue;  // criterion covers 0..20 dB
    const auto& mean = stats.mean[p];
    if (!(mean[0] > mean[1] && mean[0] > mean[2])) mean_ordering = false;
    // Per-drop paired dominance against each competitor.
    const PairedDrops& raw = stats.raw[p];
    for (int a = 1; a < 4; ++a) {
      int good = 0, total = 0;
      for (int d = 0; d < drops; ++d) {
        if (!raw.ok[d]) continue;
        ++total;
        if (raw.min_ee[0][d] >= raw.min_ee[a][d] - 1e-4) ++good;
      }
      if (total > 0) {
        worst_fraction =
            std::min(worst_fraction, static_cast<double>(good) / total);
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(3, "algorithm_ordering",
              mean_ordering && worst_fraction >= 0.95,
              fmt("means ordered, worst paired dominance %.3f >= 0.95",
                  worst_fraction),
              secs);
}

void criterion_low_snr(Gate& gate, const SweepStats& stats) {
  double worst = 0.0;
  for (std::size_t p = 0; p < stats.snr.size(); ++p) {
    if (stats.snr[p] > -10.0) continue;  // -20, -15, -10 dB
    const auto& mean = stats.mean[p];
    const double hi = *std::max_element(mean.begin(), mean.end());
    const double lo = *std::min_element(mean.begin(), mean.end());
    worst = std::max(worst, hi / lo - 1.0);
  }
  gate.report(4, "low_snr_coincidence", worst <= 0.05,
              fmt("worst spread %.2e, bound 5e-2", worst), 0.0);
}

void criterion_baseline_equivalence(Gate& gate, const SweepStats& stats) {
  double worst = 0.0;
  for (std::size_t p = 0; p < stats.snr.size(); ++p) {
    const auto& mean = stats.mean[p];
    worst = std::max(worst, std::abs(mean[3] - mean[1]) / mean[1]);
  }
  gate.report(5, "baseline_equivalence", worst <= 0.01,
              fmt("worst PM-II vs max-min-rate gap %.2e, bound 1e-2", worst),
              0.0);
}

// --- criterion 6: identity suite -----------------------------------------

void criterion_identities(Gate& gate) {
  const auto t0 = Clock::now();
  const auto reports = verify_identities(90006, 1000, 1e-10);
  double worst = 0.0;
  bool pass = true;
  for (const auto& rep : reports) {
    worst = std::max(worst, rep.worst);
    pass = pass && rep.pass;
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(6, "wmmse_identity_suite", pass,
              fmt("worst deviation %.2e, bound 1e-10", worst), secs);
}

// --- criterion 7: monotone convergence -----------------------------------

void criterion_monotone(Gate& gate) {
  const auto t0 = Clock::now();
  const TraceAudit audit = audit_traces(90007, 500, 1e-4, 0);
  const bool pass = audit.worst_inner_violation <= 0.0 &&
                    audit.worst_outer_violation <= 0.0 &&
                    audit.worst_feasibility_violation <= 0.0 &&
                    audit.worst_final_g <= 1e-4 && audit.converged >= 1;
  std::ostringstream detail;
  detail << "violations inner " << audit.worst_inner_violation << " outer "
         << audit.worst_outer_violation << ", max |g| "
         << audit.worst_final_g << ", converged " << audit.converged << "/"
         << audit.converged + audit.capped;
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(7, "monotone_convergence", pass, detail.str(), secs);
}

// --- criterion 8: conic certification ------------------------------------

void criterion_conic(Gate& gate) {
  const auto t0 = Clock::now();
  Rng rng(90008);
  double worst_kkt = 0.0, worst_oracle = 0.0;
  int certified = 0, drawn = 0;
  while (certified < 200 && drawn < 500) {
    const testing::GeneratedSocp gen = testing::random_feasible_socp(rng, 100);
    ++drawn;
    const ConicSolution sol = solve_socp(gen.problem, 1e-7);
    const double kkt =
        sol.status == SolveStatus::kOptimal
            ? std::max({sol.primal_residual, sol.dual_residual,
                        sol.duality_gap})
            : 1.0;
    worst_kkt = std::max(worst_kkt, kkt);
    const double oracle = testing::subgradient_penalty_solve(
        gen.problem, gen.optimal_value, 1e-4, 400000);
    if (oracle >
        gen.optimal_value + 1e-4 * (1.0 + std::abs(gen.optimal_value))) {
      continue;  // oracle did not reach stationarity on this draw
    }
    ++certified;
    worst_oracle = std::max(
        worst_oracle,
        std::abs(sol.objective - oracle) / (1.0 + std::abs(sol.objective)));
  }

  double worst_power = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng prng = Rng::stream({90018u, static_cast<std::uint64_t>(trial)});
    NetworkConfig cfg(2, 2, 1, Eigen::VectorXd::Constant(2, 50.0), 0.2, 0.4,
                      Eigen::VectorXd::Constant(2, 1.0));
    Eigen::MatrixXcd rows(2, 4);
    for (int n = 0; n < 2; ++n)
      for (int i = 0; i < 4; ++i) rows(n, i) = prng.complex_normal();
    ChannelSet h(rows);
    Eigen::VectorXd gamma(2);
    for (int n = 0; n < 2; ++n) gamma(n) = prng.uniform(0.2, 3.0);
    const double truth = testing::powermin_duality_total_power(gamma, h, cfg);
    const BuiltSocp socp = build_powermin_socp(gamma, h, cfg, false);
    const ConicSolution sol = solve_socp(socp.problem, 1e-8);
    if (truth <= 0.0 || sol.status != SolveStatus::kOptimal) {
      worst_power = 1.0;
      continue;
    }
    worst_power =
        std::max(worst_power, std::abs(sol.objective - truth) / truth);
  }

  const bool pass = certified >= 200 && worst_kkt <= 1e-7 &&
                    worst_oracle <= 1e-3 && worst_power <= 1e-4;
  std::ostringstream detail;
  detail << "kkt " << worst_kkt << " (" << drawn << " draws), oracle gap "
         << worst_oracle << " (" << certified << " certified), duality gap "
         << worst_power;
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(8, "conic_solver_certification", pass, detail.str(), secs);
}

// --- criterion 9: grid lower bound ----------------------------------------

void criterion_grid_bound(Gate& gate) {
  const auto t0 = Clock::now();
  double worst = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    ScenarioSpec spec;
    spec.K = 2;
    spec.M_tilde = 2;
    spec.N_tilde = 1;
    spec.snr_db = -10.0 + 30.0 * (trial % 5) / 4.0;
    spec.master_seed = 90009 + trial;
    const Drop drop = generate_drop(spec, 0);
    const double bound =
        oracle_grid_lower_bound(drop.channels, drop.config, 32);
    const SolveResult res = maxmin_ee(
        drop.channels, drop.config, default_init(drop.channels, drop.config));
    const double solved =
        res.status == AlgoStatus::kConverged ? res.min_ee : 0.0;
    worst = std::max(worst, bound - solved);
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(9, "grid_lower_bound", worst <= 1e-3,
              fmt("worst bound excess %.2e, bound 1e-3", worst), secs);
}

// --- criterion 10: reproducibility ----------------------------------------

void criterion_reproducibility(Gate& gate) {
  const auto t0 = Clock::now();
  ScenarioSpec spec;
  spec.K = 2;
  spec.M_tilde = 2;
  spec.N_tilde = 1;
  spec.master_seed = 424242;
  SweepOptions options;
  options.snr_db = {-5.0, 10.0};
  options.drops = 3;
  std::ostringstream a, b;
  write_sweep_csv(run_sweep(spec, options), a);
  write_sweep_csv(run_sweep(spec, options), b);
  const bool identical = a.str() == b.str();

  std::ifstream golden(std::string(FAIRBEAM_TEST_DATA_DIR) +
                           "/sweep_small.csv",
                       std::ios::binary);
  std::ostringstream pinned;
  pinned << golden.rdbuf();
  const bool matches_golden = a.str() == pinned.str();
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  gate.report(10, "reproducibility", identical && matches_golden,
              std::string("rerun ") + (identical ? "identical" : "differs") +
                  ", golden " + (matches_golden ? "matches" : "differs"),
              secs);
}

}  // namespace

int main(int argc, char** argv) {
  int drops = 200;
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--drops") == 0 && i + 1 < argc) {
      drops = std::max(200, std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--criteria") == 0 && i + 1 < argc) {
      only = argv[++i];
    }
  }
  const auto wants = [&only](int index) {
    if (only.empty()) return true;
    std::stringstream list(only);
    std::string item;
    while (std::getline(list, item, ',')) {
      if (!item.empty() && std::atoi(item.c_str()) == index) return true;
    }
    return false;
  };

  Gate gate;
  const auto t0 = Clock::now();
  if (wants(1)) criterion_single_user(gate);
  if (wants(2)) criterion_init_robustness(gate);
  if (wants(3) || wants(4) || wants(5)) {
    const auto ts = Clock::now();
    const SweepStats stats = run_comparison(drops);
    std::fprintf(stderr, "    comparison sweep took %.1f s\n",
                 std::chrono::duration<double>(Clock::now() - ts).count());
    if (wants(3)) criterion_ordering(gate, stats, drops);
    if (wants(4)) criterion_low_snr(gate, stats);
    if (wants(5)) criterion_baseline_equivalence(gate, stats);
  }
  if (wants(6)) criterion_identities(gate);
  if (wants(7)) criterion_monotone(gate);
  if (wants(8)) criterion_conic(gate);
  if (wants(9)) criterion_grid_bound(gate);
  if (wants(10)) criterion_reproducibility(gate);

  const double total =
      std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("ACCEPTANCE: %s (%d failures, %.1f s)\n",
              gate.failures == 0 ? "all criteria passed" : "FAILURES",
              gate.failures, total);
  return gate.failures == 0 ? 0 : 1;
}
