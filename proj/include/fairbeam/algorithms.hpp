// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fairbeam/model.hpp"
#include "fairbeam/rng.hpp"

namespace fairbeam {

struct InnerIterationRecord {
  int outer = 0;
  int inner = 0;
  double tau = 0.0;                // min over users of g_n(eta)
  double min_surrogate_ee = 0.0;   // min_n surrogate_n / user power
  Eigen::VectorXd bs_power_w;      // per-station transmit power
  double solve_ms = 0.0;           // wall clock of the cone solve
};

struct OuterIterationRecord {
  double eta = 0.0;
  double g_eta = 0.0;
  int inner_iterations = 0;
};

struct IterationTrace {
  std::vector<OuterIterationRecord> outer;
  std::vector<InnerIterationRecord> inner;
  int total_inner() const { return static_cast<int>(inner.size()); }
};

enum class AlgoStatus { kConverged, kIterationCap, kInfeasible };

struct SolveResult {
  BeamformerSet w{Eigen::MatrixXcd::Zero(1, 1)};
  Eigen::VectorXd rates;
  Eigen::VectorXd ees;
  double min_ee = 0.0;
  double min_rate = 0.0;
  AlgoStatus status = AlgoStatus::kIterationCap;
  IterationTrace trace;
};

struct IterationLimits {
  int max_outer = 50;
  int max_inner = 200;
};

/// Per-user channel-matched directions with one common power scale chosen so
/// the tightest per-station budget is met exactly. Deterministic in the
/// channel; always feasible.
BeamformerSet default_init(const ChannelSet& h, const NetworkConfig& cfg);

/// Random entries scaled to a random feasible fraction of the budgets.
BeamformerSet random_feasible_init(const ChannelSet& h,
                                   const NetworkConfig& cfg, Rng& rng);

/// Two-layer max-min energy-efficiency solve: the outer layer updates the
/// fractional-programming factor eta, the inner layer alternates the cone
/// beamformer update with the closed-form receiver and weight updates until
/// the slack objective stalls. Converged means |g(eta)| <= eps_outer with
/// per-station feasibility certified.
SolveResult maxmin_ee(const ChannelSet& h, const NetworkConfig& cfg,
                      const BeamformerSet& init, double eps_inner = 1e-4,
                      double eps_outer = 1e-4, IterationLimits caps = {});

/// Single-layer max-min rate solve: closed-form (mu, s) updates followed by
/// the max-min surrogate cone program; stops when the surrogate objective
/// change drops below eps.
SolveResult maxmin_rate(const ChannelSet& h, const NetworkConfig& cfg,
                        const BeamformerSet& init, double eps = 1e-4,
                        int cap = 200);

/// Total power minimization hitting the given per-user rate targets
/// (converted to SINR targets), reporting the energy efficiencies realized
/// by the minimum-power beamformers. Per-station caps are enforced.
SolveResult power_min_baseline(const Eigen::VectorXd& rate_targets,
                               const ChannelSet& h, const NetworkConfig& cfg);

struct SingleUserOracle {
  double power_w = 0.0;
  double ee = 0.0;
};

/// Exact single-user optimum: channel-matched transmission with per-station
/// budget split, transmit power maximizing the energy-efficiency ratio by
/// golden-section search on the (unimodal) power axis.
SingleUserOracle oracle_single_user_ee(const ChannelSet& h,
                                       const NetworkConfig& cfg);

/// Exhaustive per-user power grid with channel-matched and zero-forcing
/// directions; a certified lower bound on the max-min energy efficiency.
/// Limited to 3 users (combinatorial growth).
double oracle_grid_lower_bound(const ChannelSet& h, const NetworkConfig& cfg,
                               int grid_points);

}  // namespace fairbeam
