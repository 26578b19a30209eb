// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fairbeam/model.hpp"

namespace fairbeam {

/// Optimal WMMSE weight for user n at the current beamformers,
/// s_n = 1/mmse_n; always >= 1.
double weight_update(int user, const BeamformerSet& w, const ChannelSet& h,
                     const NetworkConfig& cfg);

/// Closed-form receivers for all users (the per-user MMSE scalars).
Eigen::VectorXcd mmse_receivers(const BeamformerSet& w, const ChannelSet& h,
                                const NetworkConfig& cfg);

/// Closed-form weights for all users, s_n = 1/mmse_n.
Eigen::VectorXd mmse_weights(const BeamformerSet& w, const ChannelSet& h,
                             const NetworkConfig& cfg);

/// Concave rate surrogate -s_n*mse_n + log(s_n) + 1. Maximized jointly over
/// (s_n, mu_n) it equals rate_n; it never exceeds rate_n.
double surrogate_rate(int user, double weight, Complex receiver,
                      const BeamformerSet& w, const ChannelSet& h,
                      const NetworkConfig& cfg);

/// Per-user objective of the parameterized subtractive problem,
/// surrogate_n - eta*(||w_n||^2 + overhead), evaluated term by term in its
/// expanded quadratic form.
double g_value(int user, double eta, double weight, Complex receiver,
               const BeamformerSet& w, const ChannelSet& h,
               const NetworkConfig& cfg);

/// Same quantity computed as surrogate minus the weighted power; kept as an
/// independent route for consistency checks of the expansion.
double g_value_compact(int user, double eta, double weight, Complex receiver,
                       const BeamformerSet& w, const ChannelSet& h,
                       const NetworkConfig& cfg);

/// Fractional-iteration factor: min over users of surrogate_n divided by the
/// user power consumption, clamped to >= 0. With closed-form (s, mu) this is
/// the minimum per-user energy efficiency.
double ee_factor(const BeamformerSet& w, const Eigen::VectorXd& weights,
                 const Eigen::VectorXcd& receivers, const ChannelSet& h,
                 const NetworkConfig& cfg);

/// Evaluates the minimax identity numerically: min-over-users of the
/// per-user inner maximum versus the joint maximum of the minimum, both via
/// the closed-form inner maximizers. True when the two orderings agree to
/// 1e-9 (scaled); doubles as a regression check of the closed forms.
bool lemma1_check(const BeamformerSet& w, const ChannelSet& h,
                  const NetworkConfig& cfg);

}  // namespace fairbeam
