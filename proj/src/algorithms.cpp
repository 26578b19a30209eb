// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairbeam/conic.hpp"
#include "fairbeam/reductions.hpp"
#include "fairbeam/wmmse.hpp"

namespace fairbeam {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from) {
  return std::chrono::duration<double, std::milli>(Clock::now() - from)
      .count();
}

// Cone solves are run tighter than the algorithm-level tolerances so solver
// noise stays out of the convergence and monotonicity checks.
constexpr double kInnerSolveTol = 1e-7;
// Residual level past which an unconverged cone solve is still usable as an
// iterate; anything worse aborts the run.
constexpr double kUsableResidual = 1e-5;

void check_feasible_init(const BeamformerSet& w, const NetworkConfig& cfg) {
  for (int k = 0; k < cfg.cells(); ++k) {
    const double p = per_bs_power(w, k, cfg);
    if (p > cfg.bs_power_w()(k) * (1.0 + 1e-9) + 1e-12) {
      throw std::invalid_argument(
          "initial beamformers violate a per-station power budget");
    }
  }
}

/// Scales the whole matrix down if any station budget is (numerically)
/// exceeded, restoring exact feasibility after a cone solve.
BeamformerSet snap_feasible(Eigen::MatrixXcd w, const NetworkConfig& cfg) {
  BeamformerSet cand(std::move(w));
  double factor = 1.0;
  for (int k = 0; k < cfg.cells(); ++k) {
    const double p = per_bs_power(cand, k, cfg);
    if (p > cfg.bs_power_w()(k)) {
      factor = std::min(factor, std::sqrt(cfg.bs_power_w()(k) / p));
    }
  }
  if (factor >= 1.0) return cand;
  return BeamformerSet(cand.columns() * factor);
}

bool solution_usable(const ConicSolution& sol) {
  if (sol.status == SolveStatus::kOptimal) return true;
  if (sol.status != SolveStatus::kMaxIters) return false;
  return std::max({sol.primal_residual, sol.dual_residual, sol.duality_gap}) <=
         kUsableResidual;
}

void fill_result_metrics(SolveResult& res, const ChannelSet& h,
                         const NetworkConfig& cfg) {
  const int users = cfg.total_users();
  res.rates.resize(users);
  res.ees.resize(users);
  for (int n = 0; n < users; ++n) {
    res.rates(n) = rate(n, res.w, h, cfg);
    res.ees(n) = user_ee(n, res.w, h, cfg);
  }
  res.min_rate = res.rates.minCoeff();
  res.min_ee = res.ees.minCoeff();
}

}  // namespace

BeamformerSet default_init(const ChannelSet& h, const NetworkConfig& cfg) {
  const int users = cfg.total_users();
  Eigen::MatrixXcd w(cfg.total_antennas(), users);
  for (int n = 0; n < users; ++n) {
    const Eigen::VectorXcd dir = h.rows().row(n).adjoint();
    const double norm = dir.norm();
    if (norm == 0.0) throw std::invalid_argument("user with zero channel");
    w.col(n) = dir / norm;
  }
  BeamformerSet unit(w);
  double scale = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.cells(); ++k) {
    const double p = per_bs_power(unit, k, cfg);
    if (p > 0.0) scale = std::min(scale, cfg.bs_power_w()(k) / p);
  }
  return BeamformerSet(w * std::sqrt(scale));
}

BeamformerSet random_feasible_init(const ChannelSet& h,
                                   const NetworkConfig& cfg, Rng& rng) {
  const int users = cfg.total_users();
  const int antennas = cfg.total_antennas();
  Eigen::MatrixXcd w(antennas, users);
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) w(i, n) = rng.complex_normal();
  }
  BeamformerSet raw(w);
  double scale = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.cells(); ++k) {
    const double p = per_bs_power(raw, k, cfg);
    if (p > 0.0) scale = std::min(scale, cfg.bs_power_w()(k) / p);
  }
  (void)h;
  return BeamformerSet(w * std::sqrt(scale * rng.uniform(0.05, 1.0)));
}

SolveResult maxmin_ee(const ChannelSet& h, const NetworkConfig& cfg,
                      const BeamformerSet& init, double eps_inner,
                      double eps_outer, IterationLimits caps) {
  check_feasible_init(init, cfg);
  const int users = cfg.total_users();

  SolveResult res;
  res.w = init;
  res.status = AlgoStatus::kIterationCap;

  BeamformerSet w = init;
  Eigen::VectorXcd mu = mmse_receivers(w, h, cfg);
  Eigen::VectorXd s = mmse_weights(w, h, cfg);

  SolverSettings settings;
  settings.tol = kInnerSolveTol;

  bool solver_trouble = false;
  for (int outer = 0; outer < caps.max_outer && !solver_trouble; ++outer) {
    const double eta = ee_factor(w, s, mu, h, cfg);
    double tau_prev = 0.0;
    double tau = 0.0;
    int inner_count = 0;
    for (int inner = 0; inner < caps.max_inner; ++inner) {
      const auto t0 = Clock::now();
      const BuiltSocp socp = build_inner_socp(eta, s, mu, h, cfg);
      const ConicSolution sol = solve_socp(socp.problem, settings);
      const double ms = elapsed_ms(t0);
      if (!solution_usable(sol)) {
        solver_trouble = true;
        break;
      }
      w = snap_feasible(socp.layout.unpack(sol.x), cfg);
      mu = mmse_receivers(w, h, cfg);
      s = mmse_weights(w, h, cfg);
      tau = std::numeric_limits<double>::infinity();
      for (int n = 0; n < users; ++n) {
        tau = std::min(tau, g_value(n, eta, s(n), mu(n), w, h, cfg));
      }
      ++inner_count;
      res.trace.inner.push_back({outer, inner, tau,
                                 ee_factor(w, s, mu, h, cfg),
                                 per_bs_powers(w, cfg), ms});
      // The first comparison would be against the bookkeeping value 0, so
      // at least two inner rounds are always run.
      if (inner >= 1 && std::abs(tau - tau_prev) <= eps_inner) break;
      tau_prev = tau;
    }
    res.trace.outer.push_back({eta, tau, inner_count});
    if (!solver_trouble && std::abs(tau) <= eps_outer) {
      res.status = AlgoStatus::kConverged;
      break;
    }
  }

  res.w = w;
  fill_result_metrics(res, h, cfg);
  return res;
}

SolveResult maxmin_rate(const ChannelSet& h, const NetworkConfig& cfg,
                        const BeamformerSet& init, double eps, int cap) {
  check_feasible_init(init, cfg);
  const int users = cfg.total_users();

  SolveResult res;
  res.w = init;
  res.status = AlgoStatus::kIterationCap;

  BeamformerSet w = init;
  SolverSettings settings;
  settings.tol = kInnerSolveTol;

  double r_prev = 0.0;
  for (int iter = 0; iter < cap; ++iter) {
    const Eigen::VectorXcd mu = mmse_receivers(w, h, cfg);
    const Eigen::VectorXd s = mmse_weights(w, h, cfg);
    const auto t0 = Clock::now();
    // eta = 0 turns the parameterized subtractive objective into the plain
    // rate surrogate, which is exactly the max-min rate subproblem.
    const BuiltSocp socp = build_inner_socp(0.0, s, mu, h, cfg);
    const ConicSolution sol = solve_socp(socp.problem, settings);
    const double ms = elapsed_ms(t0);
    if (!solution_usable(sol)) break;
    w = snap_feasible(socp.layout.unpack(sol.x), cfg);
    double r = std::numeric_limits<double>::infinity();
    for (int n = 0; n < users; ++n) {
      r = std::min(r, surrogate_rate(n, s(n), mu(n), w, h, cfg));
    }
    res.trace.inner.push_back(
        {iter, 0, r, ee_factor(w, s, mu, h, cfg), per_bs_powers(w, cfg), ms});
    res.trace.outer.push_back({0.0, r, 1});
    if (iter >= 1 && std::abs(r - r_prev) <= eps) {
      res.status = AlgoStatus::kConverged;
      break;
    }
    r_prev = r;
  }

  res.w = w;
  fill_result_metrics(res, h, cfg);
  return res;
}

SolveResult power_min_baseline(const Eigen::VectorXd& rate_targets,
                               const ChannelSet& h, const NetworkConfig& cfg) {
  const int users = cfg.total_users();
  if (rate_targets.size() != users) {
    throw std::invalid_argument("one rate target per user required");
  }
  Eigen::VectorXd gamma(users);
  for (int n = 0; n < users; ++n) {
    // Nat-rate inversion; floor keeps degenerate zero-rate targets solvable.
    gamma(n) = std::max(std::expm1(rate_targets(n)), 1e-12);
  }

  SolveResult res;
  const auto t0 = Clock::now();
  const BuiltSocp socp = build_powermin_socp(gamma, h, cfg, true);
  SolverSettings settings;
  settings.tol = kInnerSolveTol;
  const ConicSolution sol = solve_socp(socp.problem, settings);
  const double ms = elapsed_ms(t0);

  if (sol.status == SolveStatus::kInfeasible ||
      sol.status == SolveStatus::kUnbounded) {
    res.status = AlgoStatus::kInfeasible;
    res.w = BeamformerSet::zero(cfg.total_antennas(), users);
    fill_result_metrics(res, h, cfg);
    return res;
  }
  if (!solution_usable(sol)) {
    res.status = AlgoStatus::kIterationCap;
    res.w = BeamformerSet::zero(cfg.total_antennas(), users);
    fill_result_metrics(res, h, cfg);
    return res;
  }

  res.w = snap_feasible(socp.layout.unpack(sol.x), cfg);
  res.status = AlgoStatus::kConverged;
  res.trace.inner.push_back({0, 0, sol.objective, 0.0,
                             per_bs_powers(res.w, cfg), ms});
  fill_result_metrics(res, h, cfg);
  return res;
}

}  // namespace fairbeam
