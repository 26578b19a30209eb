// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairbeam {

double weight_update(int user, const BeamformerSet& w, const ChannelSet& h,
                     const NetworkConfig& cfg) {
  return 1.0 / mmse_value(user, w, h, cfg);
}

Eigen::VectorXcd mmse_receivers(const BeamformerSet& w, const ChannelSet& h,
                                const NetworkConfig& cfg) {
  const Eigen::MatrixXcd x = crosstalk(w, h);
  Eigen::VectorXcd mu(cfg.total_users());
  for (int n = 0; n < cfg.total_users(); ++n) {
    const double denom = x.row(n).squaredNorm() + cfg.noise_w()(n);
    mu(n) = std::conj(x(n, n)) / denom;
  }
  return mu;
}

Eigen::VectorXd mmse_weights(const BeamformerSet& w, const ChannelSet& h,
                             const NetworkConfig& cfg) {
  const Eigen::MatrixXcd x = crosstalk(w, h);
  Eigen::VectorXd s(cfg.total_users());
  for (int n = 0; n < cfg.total_users(); ++n) {
    s(n) = 1.0 / detail::mmse_from_row(n, x.row(n), cfg.noise_w()(n));
  }
  return s;
}

double surrogate_rate(int user, double weight, Complex receiver,
                      const BeamformerSet& w, const ChannelSet& h,
                      const NetworkConfig& cfg) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("surrogate weight must be positive");
  }
  return -weight * mse(user, receiver, w, h, cfg) + std::log(weight) + 1.0;
}

double g_value(int user, double eta, double weight, Complex receiver,
               const BeamformerSet& w, const ChannelSet& h,
               const NetworkConfig& cfg) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("surrogate weight must be positive");
  }
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  const Eigen::RowVectorXcd row = h.rows().row(user) * w.columns();
  double interference = 0.0;
  for (int m = 0; m < row.size(); ++m) {
    if (m != user) interference += std::norm(row(m));
  }
  const double mu2 = std::norm(receiver);
  return -weight * mu2 * interference - eta * w.column(user).squaredNorm() -
         weight * std::norm(1.0 - receiver * row(user)) + std::log(weight) +
         1.0 - weight * mu2 * cfg.noise_w()(user) -
         eta * cfg.fixed_overhead_w();
}

double g_value_compact(int user, double eta, double weight, Complex receiver,
                       const BeamformerSet& w, const ChannelSet& h,
                       const NetworkConfig& cfg) {
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  return surrogate_rate(user, weight, receiver, w, h, cfg) -
         eta * (w.column(user).squaredNorm() + cfg.fixed_overhead_w());
}

double ee_factor(const BeamformerSet& w, const Eigen::VectorXd& weights,
                 const Eigen::VectorXcd& receivers, const ChannelSet& h,
                 const NetworkConfig& cfg) {
  if (weights.size() != cfg.total_users() ||
      receivers.size() != cfg.total_users()) {
    throw std::invalid_argument("one (s, mu) pair per user required");
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 0; n < cfg.total_users(); ++n) {
    const double num = surrogate_rate(n, weights(n), receivers(n), w, h, cfg);
    const double den = w.column(n).squaredNorm() + cfg.fixed_overhead_w();
    if (den <= 0.0) throw std::domain_error("zero user power consumption");
    worst = std::min(worst, num / den);
  }
  // Rates and powers are nonnegative, so a negative ratio can only come from
  // a suboptimal surrogate; the factor is defined as nonnegative.
  return std::max(worst, 0.0);
}

bool lemma1_check(const BeamformerSet& w, const ChannelSet& h,
                  const NetworkConfig& cfg) {
  const int users = cfg.total_users();
  // min over n of the per-user inner maximum, each via the closed forms.
  double min_of_max = std::numeric_limits<double>::infinity();
  for (int n = 0; n < users; ++n) {
    const Complex mu = mmse_receiver(n, w, h, cfg);
    const double s = weight_update(n, w, h, cfg);
    const double den = w.column(n).squaredNorm() + cfg.fixed_overhead_w();
    min_of_max =
        std::min(min_of_max, surrogate_rate(n, s, mu, w, h, cfg) / den);
  }
  // Joint maximization over all (s, mu) of the minimum: the inner problem is
  // separable across users, so the joint maximizer is the same closed form
  // per user and only the reduction order differs.
  const Eigen::VectorXcd mu = mmse_receivers(w, h, cfg);
  const Eigen::VectorXd s = mmse_weights(w, h, cfg);
  double max_of_min = std::numeric_limits<double>::infinity();
  for (int n = 0; n < users; ++n) {
    const double den = w.column(n).squaredNorm() + cfg.fixed_overhead_w();
    max_of_min =
        std::min(max_of_min, surrogate_rate(n, s(n), mu(n), w, h, cfg) / den);
  }
  // Both orderings must also agree with the direct min user EE.
  double min_ee = std::numeric_limits<double>::infinity();
  for (int n = 0; n < users; ++n) {
    min_ee = std::min(min_ee, user_ee(n, w, h, cfg));
  }
  const double scale = 1.0 + std::abs(min_ee);
  return std::abs(min_of_max - max_of_min) <= 1e-9 * scale &&
         std::abs(min_of_max - min_ee) <= 1e-9 * scale;
}

}  // namespace fairbeam
