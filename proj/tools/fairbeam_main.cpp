// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairbeam/algorithms.hpp"
#include "fairbeam/scenario.hpp"
#include "fairbeam/sweep.hpp"
#include "fairbeam/verify.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitNoConvergence = 3;

fairbeam::ScenarioSpec load_or_exit(const std::string& path,
                                    std::optional<std::uint64_t> seed) {
  if (!std::filesystem::exists(path)) {
    std::cerr << "error: config file not found: " << path << "\n";
    std::exit(kExitBadConfig);
  }
  try {
    fairbeam::ScenarioSpec spec = fairbeam::load_spec(path);
    if (seed) spec.master_seed = *seed;
    return spec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitBadConfig);
  }
}

void write_trace(const fairbeam::IterationTrace& trace,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write trace file: " << path << "\n";
    std::exit(kExitFailure);
  }
  for (const auto& rec : trace.inner) {
    nlohmann::json row;
    row["outer"] = rec.outer;
    row["inner"] = rec.inner;
    row["tau"] = rec.tau;
    row["min_surrogate_ee"] = rec.min_surrogate_ee;
    row["bs_power_w"] = std::vector<double>(
        rec.bs_power_w.data(), rec.bs_power_w.data() + rec.bs_power_w.size());
    row["solve_ms"] = rec.solve_ms;
    out << row.dump() << "\n";
  }
}

int cmd_solve(const std::string& config_path, const std::string& algorithm,
              std::optional<std::uint64_t> seed, int drop_index,
              const std::string& trace_path) {
  using namespace fairbeam;
  const ScenarioSpec spec = load_or_exit(config_path, seed);
  const Algorithm algo = algorithm_from_name(algorithm);

  Drop drop = generate_drop(spec, drop_index);
  const BeamformerSet init = default_init(drop.channels, drop.config);

  SolveResult result;
  int prerequisite_inner = 0;
  switch (algo) {
    case Algorithm::kMaxminEe:
      result = maxmin_ee(drop.channels, drop.config, init);
      break;
    case Algorithm::kMaxminRate:
      result = maxmin_rate(drop.channels, drop.config, init);
      break;
    case Algorithm::kPowermin1: {
      const SolveResult base = maxmin_ee(drop.channels, drop.config, init);
      prerequisite_inner = base.trace.total_inner();
      if (base.status != AlgoStatus::kConverged) {
        std::cerr << "error: target-producing solve did not converge\n";
        return kExitNoConvergence;
      }
      result = power_min_baseline(base.rates, drop.channels, drop.config);
      break;
    }
    case Algorithm::kPowermin2: {
      const SolveResult base = maxmin_rate(drop.channels, drop.config, init);
      prerequisite_inner = base.trace.total_inner();
      if (base.status != AlgoStatus::kConverged) {
        std::cerr << "error: target-producing solve did not converge\n";
        return kExitNoConvergence;
      }
      result = power_min_baseline(base.rates, drop.channels, drop.config);
      break;
    }
  }

  const char* status = result.status == AlgoStatus::kConverged ? "converged"
                       : result.status == AlgoStatus::kIterationCap
                           ? "iteration_cap"
                           : "infeasible";
  std::printf("algorithm %s drop %d status %s\n", algorithm.c_str(),
              drop_index, status);
  std::printf("min_ee %.10e nats/s/Hz/W (eta_final)\n", result.min_ee);
  std::printf("min_rate %.10e nats/s/Hz\n", result.min_rate);
  for (int n = 0; n < result.rates.size(); ++n) {
    std::printf("user %d rate %.10e ee %.10e power_w %.10e\n", n,
                result.rates(n), result.ees(n),
                result.w.column(n).squaredNorm());
  }
  const Eigen::VectorXd bs = per_bs_powers(result.w, drop.config);
  for (int k = 0; k < bs.size(); ++k) {
    std::printf("bs %d power_w %.10e budget_w %.10e\n", k, bs(k),
                drop.config.bs_power_w()(k));
  }
  std::printf("inner_iterations %d\n", result.trace.total_inner());
  if (prerequisite_inner > 0) {
    std::printf("prerequisite_inner_iterations %d\n", prerequisite_inner);
  }
  if (!trace_path.empty()) write_trace(result.trace, trace_path);
  return result.status == AlgoStatus::kConverged ? kExitOk
                                                 : kExitNoConvergence;
}

int cmd_sweep(const std::string& config_path, const std::string& snr_list,
              int drops, const std::string& out_path,
              std::optional<std::uint64_t> seed, double eps, int threads) {
  using namespace fairbeam;
  const ScenarioSpec spec = load_or_exit(config_path, seed);
  SweepOptions options;
  options.drops = drops;
  options.eps = eps;
  options.threads = threads;
  std::stringstream list(snr_list);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (!item.empty()) options.snr_db.push_back(std::stod(item));
  }
  if (options.snr_db.empty()) {
    std::cerr << "error: empty --snr-list\n";
    return kExitBadConfig;
  }
  const SweepResult result = run_sweep(spec, options);
  if (out_path.empty() || out_path == "-") {
    write_sweep_csv(result, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitFailure;
    }
    write_sweep_csv(result, out);
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int trials) {
  using namespace fairbeam;
  std::vector<PropertyReport> reports;
  if (suite == "identities") {
    reports = verify_identities(seed, trials);
  } else if (suite == "monotonic") {
    reports = verify_monotonic(seed, trials);
  } else if (suite == "oracle") {
    reports = verify_oracle(seed, trials);
  } else if (suite == "lemma1") {
    reports = verify_lemma1(seed, trials);
  } else if (suite == "all") {
    reports = verify_all(seed, trials);
  } else {
    std::cerr << "error: unknown suite " << suite << "\n";
    return kExitBadConfig;
  }
  bool all_pass = true;
  for (const PropertyReport& rep : reports) {
    std::string extra;
    if (!rep.detail.empty()) extra += " (" + rep.detail + ")";
    if (!rep.pass) {
      extra += " reproduce-with-seed " + std::to_string(rep.failing_seed);
    }
    std::printf("%-34s %s worst %.3e%s\n", rep.name.c_str(),
                rep.pass ? "PASS" : "FAIL", rep.worst, extra.c_str());
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? kExitOk : kExitFailure;
}

int cmd_drop(const std::string& config_path, int drop_index,
             const std::string& out_path, std::optional<std::uint64_t> seed) {
  using namespace fairbeam;
  const ScenarioSpec spec = load_or_exit(config_path, seed);
  const Drop drop = generate_drop(spec, drop_index);
  if (out_path.empty() || out_path == "-") {
    dump_drop(drop, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitFailure;
    }
    dump_drop(drop, out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-min energy-efficient multicell beamforming"};
  app.require_subcommand(1);

  std::string config_path;
  std::string algorithm = "maxmin_ee";
  std::optional<std::uint64_t> seed;
  int drop_index = 0;
  std::string trace_path;

  CLI::App* solve = app.add_subcommand("solve", "solve one channel drop");
  solve->add_option("config", config_path, "scenario config (json)")
      ->required();
  solve->add_option("--algorithm", algorithm,
                    "maxmin_ee | maxmin_rate | powermin1 | powermin2");
  solve->add_option("--seed", seed, "override master_seed");
  solve->add_option("--drop", drop_index, "drop index");
  solve->add_option("--trace", trace_path, "write per-iteration jsonl trace");

  std::string snr_list = "-20,-15,-10,-5,0,5,10,15,20";
  int drops = 200;
  std::string out_path;
  double eps = 1e-4;
  int threads = 0;

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep");
  sweep->add_option("config", config_path, "scenario config (json)")
      ->required();
  sweep->add_option("--snr-list", snr_list, "comma-separated SNR points (dB)");
  sweep->add_option("--drops", drops, "channel drops per SNR point")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "output csv path (default stdout)");
  sweep->add_option("--seed", seed, "override master_seed");
  sweep->add_option("--eps", eps, "algorithm tolerance");
  sweep->add_option("--threads", threads, "worker threads (0 = auto)");

  std::string suite = "all";
  std::uint64_t verify_seed = 20260810;
  int trials = 1000;

  CLI::App* verify = app.add_subcommand("verify", "randomized property suites");
  verify->add_option("--suite", suite,
                     "identities | monotonic | oracle | lemma1 | all");
  verify->add_option("--seed", verify_seed, "base seed");
  verify->add_option("--trials", trials, "trial count")
      ->check(CLI::PositiveNumber);

  CLI::App* dropcmd =
      app.add_subcommand("drop", "generate and dump one channel drop");
  dropcmd->add_option("config", config_path, "scenario config (json)")
      ->required();
  dropcmd->add_option("--drop", drop_index, "drop index");
  dropcmd->add_option("--out", out_path, "output path (default stdout)");
  dropcmd->add_option("--seed", seed, "override master_seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return cmd_solve(config_path, algorithm, seed, drop_index, trace_path);
    }
    if (sweep->parsed()) {
      return cmd_sweep(config_path, snr_list, drops, out_path, seed, eps,
                       threads);
    }
    if (verify->parsed()) {
      return cmd_verify(suite, verify_seed, trials);
    }
    if (dropcmd->parsed()) {
      return cmd_drop(config_path, drop_index, out_path, seed);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
