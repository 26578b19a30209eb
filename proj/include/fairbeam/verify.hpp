// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairbeam/algorithms.hpp"

namespace fairbeam {

struct PropertyReport {
  std::string name;
  bool pass = false;
  double worst = 0.0;           // worst observed deviation / violation
  double threshold = 0.0;       // the deviation bound that was enforced
  std::uint64_t failing_seed = 0;  // stream seed reproducing the failure
  std::string detail;
};

/// Closed-form identities on random instances: the rate/minimum-MSE link,
/// surrogate tightness at the closed-form (s, mu), and agreement of the two
/// evaluation routes of the parameterized per-user objective.
std::vector<PropertyReport> verify_identities(std::uint64_t seed, int trials,
                                              double threshold = 1e-10);

/// Trace audit over random max-min EE solves: inner objective non-decreasing
/// within every inner loop, the EE factor non-decreasing across outer
/// iterations, per-station feasibility at every iterate, and |g| below the
/// outer tolerance on converged runs.
std::vector<PropertyReport> verify_monotonic(std::uint64_t seed, int trials);

/// Max-min EE against the independent single-user optimum.
std::vector<PropertyReport> verify_oracle(std::uint64_t seed, int trials,
                                          double threshold = 1e-3);

/// Numerical check of the minimax interchange on random beamformers.
std::vector<PropertyReport> verify_lemma1(std::uint64_t seed, int trials);

std::vector<PropertyReport> verify_all(std::uint64_t seed, int trials);

/// Audit helper shared with the acceptance suite: returns the worst
/// monotonicity violation (positive = violation) and the worst |g| over
/// converged runs via the out parameters.
struct TraceAudit {
  double worst_inner_violation = 0.0;
  double worst_outer_violation = 0.0;
  double worst_feasibility_violation = 0.0;
  double worst_final_g = 0.0;
  int converged = 0;
  int capped = 0;
};
TraceAudit audit_traces(std::uint64_t seed, int trials, double eps,
                        int threads);

}  // namespace fairbeam
