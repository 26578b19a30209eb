// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fairbeam {

using Complex = std::complex<double>;

/// Static description of a multicell joint-transmission downlink: K cells,
/// each base station with M_tilde antennas and N_tilde single-antenna users.
/// All stations jointly serve all N = K*N_tilde users from M = K*M_tilde
/// antennas. Antenna and user indices are grouped by cell, cell k owning
/// antennas [k*M_tilde, (k+1)*M_tilde).
class NetworkConfig {
 public:
  NetworkConfig(int cells, int antennas_per_bs, int users_per_cell,
                Eigen::VectorXd bs_power_w, double circuit_power_w,
                double base_power_w, Eigen::VectorXd noise_w);

  int cells() const { return cells_; }
  int antennas_per_bs() const { return antennas_per_bs_; }
  int users_per_cell() const { return users_per_cell_; }
  int total_antennas() const { return cells_ * antennas_per_bs_; }
  int total_users() const { return cells_ * users_per_cell_; }

  const Eigen::VectorXd& bs_power_w() const { return bs_power_w_; }
  double circuit_power_w() const { return circuit_power_w_; }
  double base_power_w() const { return base_power_w_; }
  const Eigen::VectorXd& noise_w() const { return noise_w_; }

  /// Per-user share of the static consumption, (M*P_c + K*P_0)/N.
  /// Appears in every per-user energy-efficiency denominator.
  double fixed_overhead_w() const { return fixed_overhead_w_; }

 private:
  int cells_;
  int antennas_per_bs_;
  int users_per_cell_;
  Eigen::VectorXd bs_power_w_;
  double circuit_power_w_;
  double base_power_w_;
  Eigen::VectorXd noise_w_;
  double fixed_overhead_w_;
};

/// Downlink channels: row n holds h_n^H, the conjugated channel from all M
/// transmit antennas to user n, large- and small-scale gain combined.
class ChannelSet {
 public:
  explicit ChannelSet(Eigen::MatrixXcd rows_adjoint);

  int users() const { return static_cast<int>(rows_.rows()); }
  int antennas() const { return static_cast<int>(rows_.cols()); }

  /// N x M matrix with h_n^H in row n.
  const Eigen::MatrixXcd& rows() const { return rows_; }

  /// The M_tilde-wide slice of h_n^H belonging to base station bs.
  Eigen::RowVectorXcd bs_block(int user, int bs, int antennas_per_bs) const;

 private:
  Eigen::MatrixXcd rows_;
};

/// Cascaded beamforming matrix, column n = w_n (entries in sqrt(watts)).
class BeamformerSet {
 public:
  explicit BeamformerSet(Eigen::MatrixXcd columns);

  static BeamformerSet zero(int antennas, int users) {
    return BeamformerSet(Eigen::MatrixXcd::Zero(antennas, users));
  }

  int antennas() const { return static_cast<int>(w_.rows()); }
  int users() const { return static_cast<int>(w_.cols()); }
  const Eigen::MatrixXcd& columns() const { return w_; }
  Eigen::VectorXcd column(int user) const { return w_.col(user); }

 private:
  Eigen::MatrixXcd w_;
};

/// Per-user auxiliary variables of the WMMSE reformulation plus the scalar
/// state of the outer fractional iteration.
struct AuxiliaryState {
  Eigen::VectorXcd receivers;  // mu, length N
  Eigen::VectorXd weights;     // s, length N, all > 0 when set from an MMSE
  double ee_factor = 0.0;      // eta >= 0
  double inner_objective = 0.0;  // tau
};

/// h_n^H w_m for all (n, m); row n = user, column m = stream.
Eigen::MatrixXcd crosstalk(const BeamformerSet& w, const ChannelSet& h);

double sinr(int user, const BeamformerSet& w, const ChannelSet& h,
            const NetworkConfig& cfg);

/// log(1 + SINR_n) in nats/s/Hz.
double rate(int user, const BeamformerSet& w, const ChannelSet& h,
            const NetworkConfig& cfg);

/// rate_n / (||w_n||^2 + fixed overhead). Throws std::domain_error when the
/// denominator is exactly zero (w_n = 0 and zero static power).
double user_ee(int user, const BeamformerSet& w, const ChannelSet& h,
               const NetworkConfig& cfg);

/// Mean square error of the scaled estimate mu_n * y_n against x_n.
double mse(int user, Complex receiver, const BeamformerSet& w,
           const ChannelSet& h, const NetworkConfig& cfg);

/// Receive scalar minimizing mse over mu_n for fixed beamformers.
Complex mmse_receiver(int user, const BeamformerSet& w, const ChannelSet& h,
                      const NetworkConfig& cfg);

/// Minimum MSE; equals 1/(1 + SINR_n), always in (0, 1].
double mmse_value(int user, const BeamformerSet& w, const ChannelSet& h,
                  const NetworkConfig& cfg);

/// Transmit power drawn from base station bs: the squared norm of the
/// antenna rows owned by that station, summed over all streams.
double per_bs_power(const BeamformerSet& w, int bs, const NetworkConfig& cfg);

/// All K per-station powers at once.
Eigen::VectorXd per_bs_powers(const BeamformerSet& w,
                              const NetworkConfig& cfg);

namespace detail {
// Shared kernels evaluated from a precomputed crosstalk row to avoid
// rebuilding H*W inside per-user loops.
double sinr_from_row(int user, const Eigen::RowVectorXcd& row, double noise);
double mmse_from_row(int user, const Eigen::RowVectorXcd& row, double noise);
}  // namespace detail

}  // namespace fairbeam
