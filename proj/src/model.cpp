// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fairbeam {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

void check_user(int user, const NetworkConfig& cfg) {
  require(user >= 0 && user < cfg.total_users(), "user index out of range");
}

void check_dims(const BeamformerSet& w, const ChannelSet& h,
                const NetworkConfig& cfg) {
  require(w.antennas() == cfg.total_antennas() &&
              h.antennas() == cfg.total_antennas() &&
              w.users() == cfg.total_users() && h.users() == cfg.total_users(),
          "beamformer/channel dimensions do not match the configuration");
}

}  // namespace

NetworkConfig::NetworkConfig(int cells, int antennas_per_bs,
                             int users_per_cell, Eigen::VectorXd bs_power_w,
                             double circuit_power_w, double base_power_w,
                             Eigen::VectorXd noise_w)
    : cells_(cells),
      antennas_per_bs_(antennas_per_bs),
      users_per_cell_(users_per_cell),
      bs_power_w_(std::move(bs_power_w)),
      circuit_power_w_(circuit_power_w),
      base_power_w_(base_power_w),
      noise_w_(std::move(noise_w)) {
  require(cells_ >= 1 && antennas_per_bs_ >= 1 && users_per_cell_ >= 1,
          "cell, antenna and user counts must be at least 1");
  require(bs_power_w_.size() == cells_, "need one power budget per cell");
  require((bs_power_w_.array() > 0.0).all() && bs_power_w_.allFinite(),
          "power budgets must be positive and finite");
  require(circuit_power_w_ >= 0.0 && std::isfinite(circuit_power_w_),
          "circuit power must be nonnegative");
  require(base_power_w_ >= 0.0 && std::isfinite(base_power_w_),
          "base power must be nonnegative");
  require(noise_w_.size() == total_users(), "need one noise variance per user");
  require((noise_w_.array() > 0.0).all() && noise_w_.allFinite(),
          "noise variances must be positive and finite");
  fixed_overhead_w_ =
      (total_antennas() * circuit_power_w_ + cells_ * base_power_w_) /
      static_cast<double>(total_users());
}

ChannelSet::ChannelSet(Eigen::MatrixXcd rows_adjoint)
    : rows_(std::move(rows_adjoint)) {
  require(rows_.rows() >= 1 && rows_.cols() >= 1, "channel matrix is empty");
  require(rows_.allFinite(), "channel coefficients must be finite");
}

Eigen::RowVectorXcd ChannelSet::bs_block(int user, int bs,
                                         int antennas_per_bs) const {
  require(user >= 0 && user < users(), "user index out of range");
  require(bs >= 0 && (bs + 1) * antennas_per_bs <= antennas(),
          "base station block out of range");
  return rows_.row(user).segment(bs * antennas_per_bs, antennas_per_bs);
}

BeamformerSet::BeamformerSet(Eigen::MatrixXcd columns) : w_(std::move(columns)) {
  require(w_.rows() >= 1 && w_.cols() >= 1, "beamformer matrix is empty");
  require(w_.allFinite(), "beamformer entries must be finite");
}

Eigen::MatrixXcd crosstalk(const BeamformerSet& w, const ChannelSet& h) {
  require(w.antennas() == h.antennas(),
          "beamformer/channel antenna counts differ");
  return h.rows() * w.columns();
}

namespace detail {

double sinr_from_row(int user, const Eigen::RowVectorXcd& row, double noise) {
  const double signal = std::norm(row(user));
  double interference = 0.0;
  for (int m = 0; m < row.size(); ++m) {
    if (m != user) interference += std::norm(row(m));
  }
  if (signal == 0.0) return 0.0;
  return signal / (interference + noise);
}

double mmse_from_row(int user, const Eigen::RowVectorXcd& row, double noise) {
  // (I + sigma^2) / (S + I + sigma^2); algebraically 1 - S/(S+I+sigma^2)
  // but better conditioned at high SINR.
  const double signal = std::norm(row(user));
  double interference = 0.0;
  for (int m = 0; m < row.size(); ++m) {
    if (m != user) interference += std::norm(row(m));
  }
  return (interference + noise) / (signal + interference + noise);
}

}  // namespace detail

double sinr(int user, const BeamformerSet& w, const ChannelSet& h,
            const NetworkConfig& cfg) {
  check_user(user, cfg);
  check_dims(w, h, cfg);
  const Eigen::RowVectorXcd row = h.rows().row(user) * w.columns();
  return detail::sinr_from_row(user, row, cfg.noise_w()(user));
}

double rate(int user, const BeamformerSet& w, const ChannelSet& h,
            const NetworkConfig& cfg) {
  return std::log1p(sinr(user, w, h, cfg));
}

double user_ee(int user, const BeamformerSet& w, const ChannelSet& h,
               const NetworkConfig& cfg) {
  const double r = rate(user, w, h, cfg);
  const double denom =
      w.column(user).squaredNorm() + cfg.fixed_overhead_w();
  if (denom <= 0.0) {
    throw std::domain_error(
        "user power consumption is zero: no beamformer power and no static "
        "power");
  }
  return r / denom;
}

double mse(int user, Complex receiver, const BeamformerSet& w,
           const ChannelSet& h, const NetworkConfig& cfg) {
  check_user(user, cfg);
  check_dims(w, h, cfg);
  const Eigen::RowVectorXcd row = h.rows().row(user) * w.columns();
  double interference = 0.0;
  for (int m = 0; m < row.size(); ++m) {
    if (m != user) interference += std::norm(row(m));
  }
  const double mu2 = std::norm(receiver);
  return mu2 * interference + mu2 * cfg.noise_w()(user) +
         std::norm(1.0 - receiver * row(user));
}

Complex mmse_receiver(int user, const BeamformerSet& w, const ChannelSet& h,
                      const NetworkConfig& cfg) {
  check_user(user, cfg);
  check_dims(w, h, cfg);
  const Eigen::RowVectorXcd row = h.rows().row(user) * w.columns();
  const double denom = row.squaredNorm() + cfg.noise_w()(user);
  return std::conj(row(user)) / denom;
}

double mmse_value(int user, const BeamformerSet& w, const ChannelSet& h,
                  const NetworkConfig& cfg) {
  check_user(user, cfg);
  check_dims(w, h, cfg);
  const Eigen::RowVectorXcd row = h.rows().row(user) * w.columns();
  return detail::mmse_from_row(user, row, cfg.noise_w()(user));
}

double per_bs_power(const BeamformerSet& w, int bs, const NetworkConfig& cfg) {
  require(bs >= 0 && bs < cfg.cells(), "base station index out of range");
  require(w.antennas() == cfg.total_antennas() &&
              w.users() == cfg.total_users(),
          "beamformer dimensions do not match the configuration");
  return w.columns()
      .middleRows(bs * cfg.antennas_per_bs(), cfg.antennas_per_bs())
      .squaredNorm();
}

Eigen::VectorXd per_bs_powers(const BeamformerSet& w,
                              const NetworkConfig& cfg) {
  Eigen::VectorXd p(cfg.cells());
  for (int k = 0; k < cfg.cells(); ++k) p(k) = per_bs_power(w, k, cfg);
  return p;
}

}  // namespace fairbeam
