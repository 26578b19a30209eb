// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairbeam/algorithms.hpp"
#include "fairbeam/scenario.hpp"

namespace fairbeam {

enum class Algorithm { kMaxminEe, kMaxminRate, kPowermin1, kPowermin2 };

inline constexpr std::array<Algorithm, 4> kAllAlgorithms = {
    Algorithm::kMaxminEe, Algorithm::kMaxminRate, Algorithm::kPowermin1,
    Algorithm::kPowermin2};

std::string algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);

struct SweepOptions {
  std::vector<double> snr_db;
  int drops = 200;
  double eps = 1e-4;       // algorithm-level tolerance
  int threads = 0;         // 0 = hardware concurrency
};

struct SweepCell {
  double snr_db = 0.0;
  Algorithm algorithm = Algorithm::kMaxminEe;
  double mean_min_ee = 0.0;
  double ci_half_width = 0.0;  // 95% normal-approximation half width
  double mean_min_rate = 0.0;
  int drops_ok = 0;
  int drops_failed = 0;
};

struct SweepResult {
  ScenarioSpec spec;
  SweepOptions options;
  std::vector<SweepCell> cells;  // row-major: snr point, then algorithm
};

/// All four algorithms on identical channel realizations per (snr, drop)
/// pair; a drop that fails for any algorithm is excluded from every mean of
/// that snr point so the comparison stays paired. Drops are processed in
/// parallel but reduced in index order, so the result is independent of
/// scheduling.
SweepResult run_sweep(const ScenarioSpec& spec, const SweepOptions& options);

/// Per-drop minimum EE / minimum rate pairs for one snr point; used by the
/// paired statistical checks. results[algo][drop], failed drops flagged.
struct PairedDrops {
  std::array<std::vector<double>, 4> min_ee;
  std::array<std::vector<double>, 4> min_rate;
  std::vector<bool> ok;
};
PairedDrops run_paired_drops(const ScenarioSpec& spec, int drops, double eps,
                             int threads);

/// Stable CSV schema:
///   snr_db, algorithm, mean_min_ee, ci_half_width, mean_min_rate,
///   drops_ok, drops_failed
/// preceded by '#' metadata lines (schema version, spec hash, seed,
/// tolerances, drop counts). Identical inputs produce identical bytes.
void write_sweep_csv(const SweepResult& result, std::ostream& os);

}  // namespace fairbeam
