// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fairbeam/algorithms.hpp"

namespace fairbeam {

namespace {

/// Best coherent combining gain at total power p under per-station caps:
/// maximize sum_k sqrt(rho_k) * g_k with sum rho_k = p, rho_k <= P_k, where
/// g_k is the channel norm of station k's block. Returns the achieved
/// |h^H w|. Solved by waterfilling with an active cap set.
double capped_mrt_gain(double p, const Eigen::VectorXd& block_norms,
                       const Eigen::VectorXd& caps) {
  const int cells = static_cast<int>(block_norms.size());
  std::vector<bool> capped(cells, false);
  for (int pass = 0; pass < cells + 1; ++pass) {
    double free_power = p;
    double free_weight = 0.0;
    for (int k = 0; k < cells; ++k) {
      if (capped[k]) {
        free_power -= caps(k);
      } else {
        free_weight += block_norms(k) * block_norms(k);
      }
    }
    if (free_weight <= 0.0 || free_power <= 0.0) break;
    bool changed = false;
    for (int k = 0; k < cells; ++k) {
      if (capped[k]) continue;
      const double rho =
          free_power * block_norms(k) * block_norms(k) / free_weight;
      if (rho > caps(k)) {
        capped[k] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  double free_power = p;
  double free_weight = 0.0;
  for (int k = 0; k < cells; ++k) {
    if (capped[k]) {
      free_power -= caps(k);
    } else {
      free_weight += block_norms(k) * block_norms(k);
    }
  }
  free_power = std::max(free_power, 0.0);
  double gain = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double rho = capped[k] ? caps(k)
                                 : (free_weight > 0.0
                                        ? free_power * block_norms(k) *
                                              block_norms(k) / free_weight
                                        : 0.0);
    gain += std::sqrt(rho) * block_norms(k);
  }
  return gain;
}

}  // namespace

SingleUserOracle oracle_single_user_ee(const ChannelSet& h,
                                       const NetworkConfig& cfg) {
  if (cfg.total_users() != 1 || h.users() != 1) {
    throw std::invalid_argument("single-user oracle needs exactly one user");
  }
  if (h.antennas() != cfg.total_antennas()) {
    throw std::invalid_argument("channel dimensions do not match the config");
  }
  const int cells = cfg.cells();
  Eigen::VectorXd block_norms(cells);
  for (int k = 0; k < cells; ++k) {
    block_norms(k) = h.bs_block(0, k, cfg.antennas_per_bs()).norm();
  }
  const Eigen::VectorXd& caps = cfg.bs_power_w();
  const double p_total = caps.sum();
  const double noise = cfg.noise_w()(0);
  const double overhead = cfg.fixed_overhead_w();

  const auto ee_at = [&](double p) {
    if (p <= 0.0) return 0.0;
    const double gain = capped_mrt_gain(p, block_norms, caps);
    return std::log1p(gain * gain / noise) / (p + overhead);
  };

  // Coarse bracket first (guards the golden section against a flat start),
  // then golden-section refinement inside the bracketing interval.
  const int coarse = 128;
  double best_p = 0.0;
  double best_v = ee_at(0.0);
  int best_i = 0;
  for (int i = 1; i <= coarse; ++i) {
    const double p = p_total * i / coarse;
    const double v = ee_at(p);
    if (v > best_v) {
      best_v = v;
      best_p = p;
      best_i = i;
    }
  }
  double lo = p_total * std::max(0, best_i - 1) / coarse;
  double hi = p_total * std::min(coarse, best_i + 1) / coarse;

  const double gr = 0.6180339887498949;  // 1/phi
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = ee_at(x1);
  double f2 = ee_at(x2);
  while (b - a > 1e-12 * (1.0 + p_total)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = ee_at(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = ee_at(x1);
    }
  }
  const double p_star = 0.5 * (a + b);
  const double v_star = ee_at(p_star);
  if (v_star >= best_v) {
    return {p_star, v_star};
  }
  return {best_p, best_v};
}

double oracle_grid_lower_bound(const ChannelSet& h, const NetworkConfig& cfg,
                               int grid_points) {
  const int users = cfg.total_users();
  if (users > 3) {
    throw std::invalid_argument(
        "grid oracle limited to 3 users (combinatorial growth)");
  }
  if (grid_points < 2) throw std::invalid_argument("need at least 2 grid points");
  const int antennas = cfg.total_antennas();

  // Candidate direction sets: channel-matched and zero-forcing.
  std::vector<Eigen::MatrixXcd> direction_sets;
  {
    Eigen::MatrixXcd mrt(antennas, users);
    for (int n = 0; n < users; ++n) {
      const Eigen::VectorXcd dir = h.rows().row(n).adjoint();
      const double norm = dir.norm();
      if (norm == 0.0) return 0.0;
      mrt.col(n) = dir / norm;
    }
    direction_sets.push_back(std::move(mrt));
  }
  if (users > 1 && antennas >= users) {
    // Columns of the pseudoinverse of the row-channel matrix null the
    // crosstalk; normalize each.
    const Eigen::MatrixXcd rows = h.rows();
    const Eigen::MatrixXcd gram = rows * rows.adjoint();
    const auto lu = gram.fullPivLu();
    if (lu.isInvertible()) {
      Eigen::MatrixXcd zf = rows.adjoint() * lu.inverse();
      bool ok = true;
      for (int n = 0; n < users; ++n) {
        const double norm = zf.col(n).norm();
        if (norm <= 0.0 || !std::isfinite(norm)) {
          ok = false;
          break;
        }
        zf.col(n) /= norm;
      }
      if (ok) direction_sets.push_back(std::move(zf));
    }
  }

  double best = 0.0;
  Eigen::VectorXd p(users);
  for (const Eigen::MatrixXcd& dirs : direction_sets) {
    // Per-station power share of each unit direction.
    Eigen::MatrixXd share(cfg.cells(), users);
    for (int n = 0; n < users; ++n) {
      for (int k = 0; k < cfg.cells(); ++k) {
        share(k, n) = dirs.col(n)
                          .segment(k * cfg.antennas_per_bs(),
                                   cfg.antennas_per_bs())
                          .squaredNorm();
      }
    }
    Eigen::VectorXd p_max(users);
    for (int n = 0; n < users; ++n) {
      double cap = std::numeric_limits<double>::infinity();
      for (int k = 0; k < cfg.cells(); ++k) {
        if (share(k, n) > 0.0) {
          cap = std::min(cap, cfg.bs_power_w()(k) / share(k, n));
        }
      }
      p_max(n) = cap;
    }

    std::vector<int> idx(users, 0);
    while (true) {
      for (int n = 0; n < users; ++n) {
        p(n) = p_max(n) * idx[n] / (grid_points - 1);
      }
      bool feasible = true;
      for (int k = 0; k < cfg.cells(); ++k) {
        double used = 0.0;
        for (int n = 0; n < users; ++n) used += p(n) * share(k, n);
        if (used > cfg.bs_power_w()(k) * (1.0 + 1e-12)) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        Eigen::MatrixXcd w(antennas, users);
        for (int n = 0; n < users; ++n) {
          w.col(n) = std::sqrt(p(n)) * dirs.col(n);
        }
        const BeamformerSet bf(std::move(w));
        double min_ee = std::numeric_limits<double>::infinity();
        for (int n = 0; n < users; ++n) {
          min_ee = std::min(min_ee, user_ee(n, bf, h, cfg));
        }
        best = std::max(best, min_ee);
      }
      int d = 0;
      while (d < users && ++idx[d] == grid_points) {
        idx[d] = 0;
        ++d;
      }
      if (d == users) break;
    }
  }
  return best;
}

}  // namespace fairbeam
