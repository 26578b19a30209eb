// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "fairbeam/model.hpp"

namespace fairbeam {

struct PathLossModel {
  double slope = -38.0;      // dB per decade of distance (meters)
  double intercept = -34.5;  // dB at 1 m
};

/// Everything needed to reproduce one Monte Carlo experiment: cluster
/// geometry, propagation constants, power assumptions and the seed.
struct ScenarioSpec {
  int K = 3;          // cells
  int M_tilde = 4;    // antennas per base station
  int N_tilde = 1;    // users per cell
  double inter_bs_distance_m = 1000.0;
  double min_user_bs_distance_m = 400.0;
  double bandwidth_hz = 1e7;
  double noise_figure_db = 9.0;
  double shadowing_std_db = 8.0;
  PathLossModel pathloss;
  double snr_db = 10.0;  // per-station transmit budget, 10*log10(P/1W)
  double P_c_dbm = 30.0;
  double P_0_dbm = 40.0;
  std::uint64_t master_seed = 1;
  // Optional direct budget override (watts per station); when set, snr_db
  // only labels the point and the budget is taken verbatim.
  std::optional<double> tx_power_w;

  void validate() const;
};

/// One channel realization: user positions, per-(user, station) large-scale
/// gains, combined channel rows, and the derived solver configuration.
struct Drop {
  Eigen::MatrixXd user_positions_m;   // N x 2
  Eigen::MatrixXd large_scale_gain;   // N x K, linear power gain
  ChannelSet channels;
  NetworkConfig config;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Thermal noise power over the scenario bandwidth including the receiver
/// noise figure, using the -174 dBm/Hz density convention.
double noise_power_w(const ScenarioSpec& spec);

/// Transmit budget from the SNR axis label: P = 10^(snr/10) watts.
double snr_to_power_w(double snr_db);

/// Station coordinates: a regular K-gon with the given side length (single
/// station at the origin, a 1 km segment for K = 2, triangle for K = 3...).
Eigen::MatrixXd bs_positions(const ScenarioSpec& spec);

NetworkConfig make_config(const ScenarioSpec& spec);

/// Deterministic function of (spec.master_seed, drop_index): places users
/// uniformly in each serving cell's annulus [min distance, half the
/// inter-station distance], draws lognormal shadowing per (user, station)
/// pair and unit complex-Gaussian small-scale fading.
Drop generate_drop(const ScenarioSpec& spec, int drop_index);

ScenarioSpec load_spec(const std::filesystem::path& path);
void save_spec(const ScenarioSpec& spec, const std::filesystem::path& path);
ScenarioSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ScenarioSpec& spec);

/// 64-bit content hash of the canonical serialization; pinned into sweep
/// output headers.
std::uint64_t spec_hash(const ScenarioSpec& spec);

void dump_drop(const Drop& drop, std::ostream& os);

}  // namespace fairbeam
