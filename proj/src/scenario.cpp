// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fairbeam/rng.hpp"
#include "json.hpp"

namespace fairbeam {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kThermalNoiseDbmPerHz = -174.0;
}  // namespace

void ScenarioSpec::validate() const {
  if (K < 1 || M_tilde < 1 || N_tilde < 1) {
    throw std::invalid_argument("K, M_tilde, N_tilde must be at least 1");
  }
  if (!(inter_bs_distance_m > 0.0) || !(min_user_bs_distance_m > 0.0)) {
    throw std::invalid_argument("distances must be positive");
  }
  if (!(min_user_bs_distance_m < inter_bs_distance_m)) {
    throw std::invalid_argument(
        "min user distance must be below the inter-station distance");
  }
  if (!(min_user_bs_distance_m < inter_bs_distance_m / 2.0)) {
    throw std::invalid_argument(
        "the annulus [min distance, half inter-station distance] is empty");
  }
  if (!(bandwidth_hz > 0.0) || !(shadowing_std_db >= 0.0)) {
    throw std::invalid_argument("bad bandwidth or shadowing deviation");
  }
  if (tx_power_w && !(*tx_power_w > 0.0)) {
    throw std::invalid_argument("transmit power override must be positive");
  }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double noise_power_w(const ScenarioSpec& spec) {
  spec.validate();
  const double dbm = kThermalNoiseDbmPerHz + 10.0 * std::log10(spec.bandwidth_hz) +
                     spec.noise_figure_db;
  return dbm_to_watts(dbm);
}

double snr_to_power_w(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

Eigen::MatrixXd bs_positions(const ScenarioSpec& spec) {
  Eigen::MatrixXd pos(spec.K, 2);
  if (spec.K == 1) {
    pos.setZero();
    return pos;
  }
  // Regular K-gon with side length inter_bs_distance_m.
  const double radius =
      spec.inter_bs_distance_m / (2.0 * std::sin(kPi / spec.K));
  for (int k = 0; k < spec.K; ++k) {
    const double angle = 2.0 * kPi * k / spec.K;
    pos(k, 0) = radius * std::cos(angle);
    pos(k, 1) = radius * std::sin(angle);
  }
  return pos;
}

NetworkConfig make_config(const ScenarioSpec& spec) {
  spec.validate();
  const double p =
      spec.tx_power_w ? *spec.tx_power_w : snr_to_power_w(spec.snr_db);
  const int users = spec.K * spec.N_tilde;
  return NetworkConfig(spec.K, spec.M_tilde, spec.N_tilde,
                       Eigen::VectorXd::Constant(spec.K, p),
                       dbm_to_watts(spec.P_c_dbm), dbm_to_watts(spec.P_0_dbm),
                       Eigen::VectorXd::Constant(users, noise_power_w(spec)));
}

Drop generate_drop(const ScenarioSpec& spec, int drop_index) {
  spec.validate();
  if (drop_index < 0) throw std::invalid_argument("drop index must be >= 0");
  const int users = spec.K * spec.N_tilde;
  const int antennas = spec.K * spec.M_tilde;
  const Eigen::MatrixXd bs = bs_positions(spec);

  Rng rng = Rng::stream({spec.master_seed,
                         static_cast<std::uint64_t>(drop_index), 0xd20bULL});

  // Users uniform over the serving cell's annulus (uniform in area).
  Eigen::MatrixXd positions(users, 2);
  const double r_min = spec.min_user_bs_distance_m;
  const double r_max = spec.inter_bs_distance_m / 2.0;
  for (int n = 0; n < users; ++n) {
    const int cell = n / spec.N_tilde;
    const double u = rng.uniform();
    const double r = std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    positions(n, 0) = bs(cell, 0) + r * std::cos(theta);
    positions(n, 1) = bs(cell, 1) + r * std::sin(theta);
  }

  // Large-scale gain per (user, station): path loss plus shadowing, in dB.
  Eigen::MatrixXd gain(users, spec.K);
  for (int n = 0; n < users; ++n) {
    for (int k = 0; k < spec.K; ++k) {
      const double d = (positions.row(n) - bs.row(k)).norm();
      const double shadow = spec.shadowing_std_db * rng.normal();
      const double db =
          spec.pathloss.slope * std::log10(d) + spec.pathloss.intercept + shadow;
      gain(n, k) = std::pow(10.0, db / 10.0);
    }
  }

  // Combined rows: sqrt(gain) times unit complex-Gaussian small-scale.
  Eigen::MatrixXcd rows(users, antennas);
  for (int n = 0; n < users; ++n) {
    for (int k = 0; k < spec.K; ++k) {
      const double amp = std::sqrt(gain(n, k));
      for (int i = 0; i < spec.M_tilde; ++i) {
        // Stored conjugated: row n holds h_n^H.
        rows(n, k * spec.M_tilde + i) = amp * std::conj(rng.complex_normal());
      }
    }
  }

  return Drop{std::move(positions), std::move(gain), ChannelSet(std::move(rows)),
              make_config(spec)};
}

namespace {

using nlohmann::json;

json to_json(const ScenarioSpec& s) {
  json j;
  j["K"] = s.K;
  j["M_tilde"] = s.M_tilde;
  j["N_tilde"] = s.N_tilde;
  j["inter_bs_distance_m"] = s.inter_bs_distance_m;
  j["min_user_bs_distance_m"] = s.min_user_bs_distance_m;
  j["bandwidth_hz"] = s.bandwidth_hz;
  j["noise_figure_db"] = s.noise_figure_db;
  j["shadowing_std_db"] = s.shadowing_std_db;
  j["pathloss"] = {{"slope", s.pathloss.slope},
                   {"intercept", s.pathloss.intercept}};
  j["snr_db"] = s.snr_db;
  j["P_c_dbm"] = s.P_c_dbm;
  j["P_0_dbm"] = s.P_0_dbm;
  j["master_seed"] = s.master_seed;
  if (s.tx_power_w) j["tx_power_w"] = *s.tx_power_w;
  return j;
}

ScenarioSpec from_json(const json& j) {
  ScenarioSpec s;
  s.K = j.value("K", s.K);
  s.M_tilde = j.value("M_tilde", s.M_tilde);
  s.N_tilde = j.value("N_tilde", s.N_tilde);
  s.inter_bs_distance_m = j.value("inter_bs_distance_m", s.inter_bs_distance_m);
  s.min_user_bs_distance_m =
      j.value("min_user_bs_distance_m", s.min_user_bs_distance_m);
  s.bandwidth_hz = j.value("bandwidth_hz", s.bandwidth_hz);
  s.noise_figure_db = j.value("noise_figure_db", s.noise_figure_db);
  s.shadowing_std_db = j.value("shadowing_std_db", s.shadowing_std_db);
  if (j.contains("pathloss")) {
    s.pathloss.slope = j["pathloss"].value("slope", s.pathloss.slope);
    s.pathloss.intercept =
        j["pathloss"].value("intercept", s.pathloss.intercept);
  }
  s.snr_db = j.value("snr_db", s.snr_db);
  s.P_c_dbm = j.value("P_c_dbm", s.P_c_dbm);
  s.P_0_dbm = j.value("P_0_dbm", s.P_0_dbm);
  s.master_seed = j.value("master_seed", s.master_seed);
  if (j.contains("tx_power_w")) s.tx_power_w = j["tx_power_w"].get<double>();
  s.validate();
  return s;
}

}  // namespace

ScenarioSpec spec_from_json_text(const std::string& text) {
  return from_json(json::parse(text));
}

std::string spec_to_json_text(const ScenarioSpec& spec) {
  return to_json(spec).dump(2) + "\n";
}

ScenarioSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return spec_from_json_text(buf.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed config " + path.string() + ": " +
                             e.what());
  }
}

void save_spec(const ScenarioSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write config file: " + path.string());
  }
  out << spec_to_json_text(spec);
}

std::uint64_t spec_hash(const ScenarioSpec& spec) {
  // FNV-1a over the canonical serialization.
  const std::string text = spec_to_json_text(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void dump_drop(const Drop& drop, std::ostream& os) {
  char buf[128];
  const int users = drop.channels.users();
  const int antennas = drop.channels.antennas();
  os << "users " << users << " antennas " << antennas << " cells "
     << drop.config.cells() << "\n";
  for (int n = 0; n < users; ++n) {
    std::snprintf(buf, sizeof(buf), "position %d %.6f %.6f\n", n,
                  drop.user_positions_m(n, 0), drop.user_positions_m(n, 1));
    os << buf;
  }
  for (int n = 0; n < users; ++n) {
    for (int k = 0; k < drop.config.cells(); ++k) {
      std::snprintf(buf, sizeof(buf), "gain %d %d %.12e\n", n, k,
                    drop.large_scale_gain(n, k));
      os << buf;
    }
  }
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) {
      const Complex v = drop.channels.rows()(n, i);
      std::snprintf(buf, sizeof(buf), "h %d %d %.12e %.12e\n", n, i, v.real(),
                    v.imag());
      os << buf;
    }
  }
}

}  // namespace fairbeam
