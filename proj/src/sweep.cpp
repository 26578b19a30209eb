// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fairbeam {

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kMaxminEe: return "maxmin_ee";
    case Algorithm::kMaxminRate: return "maxmin_rate";
    case Algorithm::kPowermin1: return "powermin1";
    case Algorithm::kPowermin2: return "powermin2";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  for (Algorithm algo : kAllAlgorithms) {
    if (algorithm_name(algo) == name) return algo;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace {

struct DropOutcome {
  bool ok = false;
  std::array<double, 4> min_ee{};
  std::array<double, 4> min_rate{};
};

/// One (snr, drop) cell: the two iterative algorithms from the deterministic
/// initialization, then each power minimization against the realized rates.
DropOutcome evaluate_drop(const ScenarioSpec& spec, int drop_index,
                          double eps) {
  DropOutcome out;
  const Drop drop = generate_drop(spec, drop_index);
  const BeamformerSet init = default_init(drop.channels, drop.config);

  const SolveResult ee =
      maxmin_ee(drop.channels, drop.config, init, eps, eps);
  if (ee.status != AlgoStatus::kConverged) return out;
  const SolveResult rate =
      maxmin_rate(drop.channels, drop.config, init, eps);
  if (rate.status != AlgoStatus::kConverged) return out;
  const SolveResult pm1 =
      power_min_baseline(ee.rates, drop.channels, drop.config);
  if (pm1.status != AlgoStatus::kConverged) return out;
  const SolveResult pm2 =
      power_min_baseline(rate.rates, drop.channels, drop.config);
  if (pm2.status != AlgoStatus::kConverged) return out;

  out.ok = true;
  const SolveResult* results[4] = {&ee, &rate, &pm1, &pm2};
  for (int a = 0; a < 4; ++a) {
    out.min_ee[a] = results[a]->min_ee;
    out.min_rate[a] = results[a]->min_rate;
  }
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace

PairedDrops run_paired_drops(const ScenarioSpec& spec, int drops, double eps,
                             int threads) {
  std::vector<DropOutcome> outcomes(drops);
  parallel_for(drops, threads, [&](int i) {
    outcomes[i] = evaluate_drop(spec, i, eps);
  });
  PairedDrops paired;
  paired.ok.resize(drops);
  for (int a = 0; a < 4; ++a) {
    paired.min_ee[a].resize(drops);
    paired.min_rate[a].resize(drops);
  }
  for (int i = 0; i < drops; ++i) {
    paired.ok[i] = outcomes[i].ok;
    for (int a = 0; a < 4; ++a) {
      paired.min_ee[a][i] = outcomes[i].min_ee[a];
      paired.min_rate[a][i] = outcomes[i].min_rate[a];
    }
  }
  return paired;
}

SweepResult run_sweep(const ScenarioSpec& spec, const SweepOptions& options) {
  if (options.drops < 1) throw std::invalid_argument("drops must be >= 1");
  if (options.snr_db.empty()) {
    throw std::invalid_argument("at least one snr point required");
  }
  SweepResult result;
  result.spec = spec;
  result.options = options;

  for (double snr : options.snr_db) {
    ScenarioSpec point = spec;
    point.snr_db = snr;
    const PairedDrops paired =
        run_paired_drops(point, options.drops, options.eps, options.threads);
    int ok = 0;
    for (bool b : paired.ok) ok += b ? 1 : 0;
    for (int a = 0; a < 4; ++a) {
      SweepCell cell;
      cell.snr_db = snr;
      cell.algorithm = kAllAlgorithms[a];
      cell.drops_ok = ok;
      cell.drops_failed = options.drops - ok;
      if (ok > 0) {
        double sum_ee = 0.0, sum_rate = 0.0;
        for (int i = 0; i < options.drops; ++i) {
          if (!paired.ok[i]) continue;
          sum_ee += paired.min_ee[a][i];
          sum_rate += paired.min_rate[a][i];
        }
        cell.mean_min_ee = sum_ee / ok;
        cell.mean_min_rate = sum_rate / ok;
        if (ok > 1) {
          double ss = 0.0;
          for (int i = 0; i < options.drops; ++i) {
            if (!paired.ok[i]) continue;
            const double d = paired.min_ee[a][i] - cell.mean_min_ee;
            ss += d * d;
          }
          cell.ci_half_width = 1.96 * std::sqrt(ss / (ok - 1) / ok);
        }
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# fairbeam sweep v1\n");
  os << buf;
  std::snprintf(buf, sizeof(buf), "# spec_hash %016llx\n",
                static_cast<unsigned long long>(spec_hash(result.spec)));
  os << buf;
  std::snprintf(buf, sizeof(buf), "# seed %llu\n",
                static_cast<unsigned long long>(result.spec.master_seed));
  os << buf;
  std::snprintf(buf, sizeof(buf), "# eps %.6e drops %d\n", result.options.eps,
                result.options.drops);
  os << buf;
  int failed = 0, total = 0;
  for (const SweepCell& cell : result.cells) {
    failed += cell.drops_failed;
    total += cell.drops_failed + cell.drops_ok;
  }
  std::snprintf(buf, sizeof(buf), "# failed_drop_rate %.6f\n",
                total > 0 ? static_cast<double>(failed) / total : 0.0);
  os << buf;
  os << "snr_db,algorithm,mean_min_ee,ci_half_width,mean_min_rate,drops_ok,"
        "drops_failed\n";
  for (const SweepCell& cell : result.cells) {
    std::snprintf(buf, sizeof(buf), "%.2f,%s,%.12e,%.12e,%.12e,%d,%d\n",
                  cell.snr_db, algorithm_name(cell.algorithm).c_str(),
                  cell.mean_min_ee, cell.ci_half_width, cell.mean_min_rate,
                  cell.drops_ok, cell.drops_failed);
    os << buf;
  }
}

}  // namespace fairbeam
