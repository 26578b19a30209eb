// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "fairbeam/scenario.hpp"
#include "fairbeam/wmmse.hpp"

namespace fairbeam {

namespace {

struct RandomInstance {
  NetworkConfig cfg;
  ChannelSet h;
  BeamformerSet w;
};

/// Unit-scale random instance: iid complex-Gaussian channels, random
/// feasible beamformers, O(1) powers and noise.
RandomInstance random_instance(Rng& rng, int max_cells = 3,
                               int max_antennas = 3, int max_users = 2) {
  const int cells = 1 + static_cast<int>(rng.below(max_cells));
  const int per_bs = 1 + static_cast<int>(rng.below(max_antennas));
  const int per_cell = 1 + static_cast<int>(rng.below(max_users));
  const int users = cells * per_cell;
  const int antennas = cells * per_bs;

  Eigen::VectorXd budget(cells);
  for (int k = 0; k < cells; ++k) budget(k) = rng.uniform(0.5, 20.0);
  Eigen::VectorXd noise(users);
  for (int n = 0; n < users; ++n) noise(n) = rng.uniform(0.2, 2.0);
  NetworkConfig cfg(cells, per_bs, per_cell, budget, rng.uniform(0.0, 2.0),
                    rng.uniform(0.0, 5.0), noise);

  Eigen::MatrixXcd rows(users, antennas);
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) rows(n, i) = rng.complex_normal();
  }
  ChannelSet h(std::move(rows));

  Eigen::MatrixXcd w(antennas, users);
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) w(i, n) = rng.complex_normal();
  }
  BeamformerSet raw(w);
  double scale = 1.0;
  for (int k = 0; k < cells; ++k) {
    const double p = per_bs_power(raw, k, cfg);
    if (p > 0.0) scale = std::min(scale, cfg.bs_power_w()(k) / p);
  }
  return RandomInstance{cfg, std::move(h),
                        BeamformerSet(w * std::sqrt(scale * rng.uniform(0.1, 1.0)))};
}

double rel_dev(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), 1e-15);
}

}  // namespace

std::vector<PropertyReport> verify_identities(std::uint64_t seed, int trials,
                                              double threshold) {
  PropertyReport duality{"rate_equals_minus_log_mmse", true, 0.0, threshold, 0, ""};
  PropertyReport tight{"surrogate_tight_at_closed_form", true, 0.0, threshold, 0, ""};
  PropertyReport routes{"g_two_route_consistency", true, 0.0, threshold, 0, ""};

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    Rng rng = Rng::stream({s, 0x1DE17ULL});
    const RandomInstance inst = random_instance(rng);
    const int users = inst.cfg.total_users();
    for (int n = 0; n < users; ++n) {
      const double r = rate(n, inst.w, inst.h, inst.cfg);
      const double m = mmse_value(n, inst.w, inst.h, inst.cfg);
      const double d1 = rel_dev(r, -std::log(m));
      if (d1 > duality.worst) {
        duality.worst = d1;
        if (d1 > threshold) duality.failing_seed = s;
      }

      const Complex mu = mmse_receiver(n, inst.w, inst.h, inst.cfg);
      const double sw = weight_update(n, inst.w, inst.h, inst.cfg);
      const double sur = surrogate_rate(n, sw, mu, inst.w, inst.h, inst.cfg);
      const double d2 = rel_dev(sur, r);
      if (d2 > tight.worst) {
        tight.worst = d2;
        if (d2 > threshold) tight.failing_seed = s;
      }

      const double eta = rng.uniform(0.0, 3.0) *
                         std::max(user_ee(n, inst.w, inst.h, inst.cfg), 1e-3);
      const double ga = g_value(n, eta, sw, mu, inst.w, inst.h, inst.cfg);
      const double gb =
          g_value_compact(n, eta, sw, mu, inst.w, inst.h, inst.cfg);
      const double d3 = std::abs(ga - gb) / (1.0 + std::abs(ga));
      if (d3 > routes.worst) {
        routes.worst = d3;
        if (d3 > threshold) routes.failing_seed = s;
      }
    }
  }
  duality.pass = duality.worst <= threshold;
  tight.pass = tight.worst <= threshold;
  routes.pass = routes.worst <= threshold;
  return {duality, tight, routes};
}

TraceAudit audit_traces(std::uint64_t seed, int trials, double eps,
                        int threads) {
  TraceAudit audit;
  std::mutex mu;
  std::atomic<int> next{0};
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, trials));

  const auto work = [&]() {
    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      Rng rng = Rng::stream({s, 0x30203ULL});
      ScenarioSpec spec;
      spec.K = 1 + static_cast<int>(rng.below(3));
      spec.M_tilde = 1 + static_cast<int>(rng.below(2));
      spec.N_tilde = 1;
      spec.snr_db = rng.uniform(-10.0, 20.0);
      spec.master_seed = s;
      const Drop drop = generate_drop(spec, 0);
      const BeamformerSet init = default_init(drop.channels, drop.config);
      const SolveResult res =
          maxmin_ee(drop.channels, drop.config, init, eps, eps);

      double inner_violation = 0.0;
      double outer_violation = 0.0;
      double feas_violation = 0.0;
      // tau non-decreasing within each inner loop.
      for (std::size_t i = 1; i < res.trace.inner.size(); ++i) {
        const auto& prev = res.trace.inner[i - 1];
        const auto& cur = res.trace.inner[i];
        if (cur.outer != prev.outer || cur.inner != prev.inner + 1) continue;
        const double tol = 1e-6 * (1.0 + std::abs(prev.tau));
        inner_violation =
            std::max(inner_violation, prev.tau - cur.tau - tol);
      }
      // eta non-decreasing across outer iterations.
      for (std::size_t i = 1; i < res.trace.outer.size(); ++i) {
        const double tol = 1e-6 * (1.0 + std::abs(res.trace.outer[i - 1].eta));
        outer_violation =
            std::max(outer_violation,
                     res.trace.outer[i - 1].eta - res.trace.outer[i].eta - tol);
      }
      // per-station feasibility at every traced iterate.
      for (const auto& rec : res.trace.inner) {
        for (int k = 0; k < drop.config.cells(); ++k) {
          feas_violation =
              std::max(feas_violation,
                       rec.bs_power_w(k) - drop.config.bs_power_w()(k) - 1e-6);
        }
      }

      std::lock_guard<std::mutex> lock(mu);
      audit.worst_inner_violation =
          std::max(audit.worst_inner_violation, inner_violation);
      audit.worst_outer_violation =
          std::max(audit.worst_outer_violation, outer_violation);
      audit.worst_feasibility_violation =
          std::max(audit.worst_feasibility_violation, feas_violation);
      if (res.status == AlgoStatus::kConverged) {
        ++audit.converged;
        if (!res.trace.outer.empty()) {
          audit.worst_final_g = std::max(
              audit.worst_final_g, std::abs(res.trace.outer.back().g_eta));
        }
      } else {
        ++audit.capped;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  return audit;
}

std::vector<PropertyReport> verify_monotonic(std::uint64_t seed, int trials) {
  const double eps = 1e-4;
  const TraceAudit audit = audit_traces(seed, trials, eps, 0);
  PropertyReport inner{"inner_tau_monotone", audit.worst_inner_violation <= 0.0,
                       audit.worst_inner_violation, 0.0, seed, ""};
  PropertyReport outer{"outer_eta_monotone", audit.worst_outer_violation <= 0.0,
                       audit.worst_outer_violation, 0.0, seed, ""};
  PropertyReport feas{"per_bs_feasibility",
                      audit.worst_feasibility_violation <= 0.0,
                      audit.worst_feasibility_violation, 0.0, seed, ""};
  PropertyReport root{"converged_g_below_eps", audit.worst_final_g <= eps,
                      audit.worst_final_g, eps, seed, ""};
  root.detail = "converged " + std::to_string(audit.converged) + "/" +
                std::to_string(audit.converged + audit.capped);
  return {inner, outer, feas, root};
}

std::vector<PropertyReport> verify_oracle(std::uint64_t seed, int trials,
                                          double threshold) {
  PropertyReport rep{"single_user_near_optimal", true, 0.0, threshold, 0, ""};
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    Rng rng = Rng::stream({s, 0x0AC1EULL});
    const int per_bs = 1 + static_cast<int>(rng.below(4));
    NetworkConfig cfg(1, per_bs, 1,
                      Eigen::VectorXd::Constant(1, rng.uniform(0.5, 100.0)),
                      rng.uniform(0.1, 2.0), rng.uniform(0.5, 10.0),
                      Eigen::VectorXd::Constant(1, 1.0));
    Eigen::MatrixXcd rows(1, per_bs);
    for (int i = 0; i < per_bs; ++i) rows(0, i) = rng.complex_normal();
    ChannelSet h(std::move(rows));
    const SingleUserOracle oracle = oracle_single_user_ee(h, cfg);
    const BeamformerSet init = default_init(h, cfg);
    const SolveResult res = maxmin_ee(h, cfg, init, 1e-7, 1e-7);
    const double gap = std::abs(res.min_ee - oracle.ee) /
                       std::max(oracle.ee, 1e-15);
    if (gap > rep.worst) {
      rep.worst = gap;
      if (gap > threshold) rep.failing_seed = s;
    }
  }
  rep.pass = rep.worst <= threshold;
  return {rep};
}

std::vector<PropertyReport> verify_lemma1(std::uint64_t seed, int trials) {
  PropertyReport rep{"minimax_interchange", true, 0.0, 0.0, 0, ""};
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    Rng rng = Rng::stream({s, 0x1E44A1ULL});
    const RandomInstance inst = random_instance(rng);
    if (!lemma1_check(inst.w, inst.h, inst.cfg)) {
      ++failures;
      rep.failing_seed = s;
    }
  }
  rep.worst = failures;
  rep.pass = failures == 0;
  rep.detail = std::to_string(failures) + " failures / " +
               std::to_string(trials) + " trials";
  return {rep};
}

std::vector<PropertyReport> verify_all(std::uint64_t seed, int trials) {
  std::vector<PropertyReport> all;
  for (auto& r : verify_identities(seed, trials)) all.push_back(std::move(r));
  for (auto& r : verify_monotonic(seed, std::min(trials, 100))) {
    all.push_back(std::move(r));
  }
  for (auto& r : verify_oracle(seed, std::min(trials, 50))) {
    all.push_back(std::move(r));
  }
  for (auto& r : verify_lemma1(seed, trials)) all.push_back(std::move(r));
  return all;
}

}  // namespace fairbeam
