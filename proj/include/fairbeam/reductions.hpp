// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "fairbeam/conic.hpp"
#include "fairbeam/model.hpp"

namespace fairbeam {

/// Layout of the realified beamforming variables inside a cone program.
/// Complex entries are interleaved (re, im) pairs, streams stored
/// column-major: w_n's antenna i sits at 2*(n*M + i). One trailing scalar
/// (the slack tau, or the power epigraph) follows the beamformer block.
struct BeamformerLayout {
  int antennas = 0;
  int users = 0;

  int re_index(int antenna, int user) const {
    return 2 * (user * antennas + antenna);
  }
  int im_index(int antenna, int user) const {
    return re_index(antenna, user) + 1;
  }
  int aux_index() const { return 2 * antennas * users; }
  int num_vars() const { return 2 * antennas * users + 1; }

  Eigen::MatrixXcd unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack(const Eigen::MatrixXcd& w, double aux) const;
  std::string describe() const;
};

struct BuiltSocp {
  ConicProblem problem;
  BeamformerLayout layout;
};

/// Cone program for the inner beamformer update at fixed (eta, s, mu):
///
///   minimize tau
///   s.t.     per-station power cones   ||stacked station block|| <= sqrt(P_k)
///            per-user quadratic cones  -g_n(eta) <= tau,
///
/// each user constraint lifted via ||[2u; t-1]|| <= t+1 <=> ||u||^2 <= t with
/// t = tau - c_n, u stacking sqrt(s_n)|mu_n| h_n^H w_m (m != n),
/// sqrt(eta) w_n and sqrt(s_n)(1 - mu_n h_n^H w_n), and
/// c_n = -log(s_n) - 1 + s_n |mu_n|^2 sigma_n^2 + eta * overhead.
/// The minimized slack equals -min_n g_n(eta) at the optimum.
BuiltSocp build_inner_socp(double eta, const Eigen::VectorXd& weights,
                           const Eigen::VectorXcd& receivers,
                           const ChannelSet& h, const NetworkConfig& cfg);

/// Cone program minimizing total transmit power subject to per-user SINR
/// targets (phase-normalized so h_n^H w_n is real), optional per-station
/// power caps, and a quadratic epigraph making the objective value the
/// total power in watts.
BuiltSocp build_powermin_socp(const Eigen::VectorXd& sinr_targets,
                              const ChannelSet& h, const NetworkConfig& cfg,
                              bool include_caps);

}  // namespace fairbeam
