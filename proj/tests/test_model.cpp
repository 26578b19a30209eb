// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>

#include "doctest.h"
#include "fairbeam/model.hpp"
#include "fairbeam/rng.hpp"

using namespace fairbeam;
using std::complex;

namespace {

NetworkConfig unit_config(int cells, int per_bs, int per_cell,
                          double power = 1.0, double pc = 0.0,
                          double p0 = 0.0, double noise = 1.0) {
  return NetworkConfig(
      cells, per_bs, per_cell, Eigen::VectorXd::Constant(cells, power), pc, p0,
      Eigen::VectorXd::Constant(cells * per_cell, noise));
}

struct RandomCase {
  NetworkConfig cfg;
  ChannelSet h;
  BeamformerSet w;
};

RandomCase random_case(Rng& rng) {
  const int cells = 1 + static_cast<int>(rng.below(3));
  const int per_bs = 1 + static_cast<int>(rng.below(3));
  const int per_cell = 1 + static_cast<int>(rng.below(2));
  const int users = cells * per_cell;
  const int antennas = cells * per_bs;
  Eigen::MatrixXcd rows(users, antennas);
  Eigen::MatrixXcd w(antennas, users);
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) {
      rows(n, i) = rng.complex_normal();
      w(i, n) = rng.complex_normal();
    }
  }
  return RandomCase{unit_config(cells, per_bs, per_cell, 10.0, 0.5, 1.0),
                    ChannelSet(rows), BeamformerSet(w)};
}

}  // namespace

TEST_CASE("config derives totals and overhead") {
  // 3 cells, 4 antennas each, 1 user per cell; 1 W circuit, 10 W base.
  NetworkConfig cfg = unit_config(3, 4, 1, 31.62, 1.0, 10.0, 1.0);
  CHECK(cfg.total_antennas() == 12);
  CHECK(cfg.total_users() == 3);
  CHECK(cfg.fixed_overhead_w() == doctest::Approx((12.0 * 1 + 3 * 10) / 3.0));
  CHECK(cfg.fixed_overhead_w() == doctest::Approx(14.0));
}

TEST_CASE("config validation rejects bad inputs") {
  CHECK_THROWS_AS(unit_config(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(unit_config(1, 1, 1, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(unit_config(1, 1, 1, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(unit_config(1, 1, 1, 1.0, 0.0, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("single user sinr and rate closed forms") {
  NetworkConfig cfg = unit_config(1, 1, 1);
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("sinr equals transmit power for unit channel and noise") {
    const double p = 2.7;
    BeamformerSet w(Eigen::MatrixXcd::Constant(1, 1, std::sqrt(p)));
    CHECK(sinr(0, w, h, cfg) == doctest::Approx(p));
  }
  SUBCASE("zero beamformer gives exactly zero sinr and rate") {
    BeamformerSet w = BeamformerSet::zero(1, 1);
    CHECK(sinr(0, w, h, cfg) == 0.0);
    CHECK(rate(0, w, h, cfg) == 0.0);
  }
  SUBCASE("rate is the natural log of 1 + sinr") {
    BeamformerSet w(Eigen::MatrixXcd::Constant(1, 1, std::sqrt(3.0)));
    CHECK(rate(0, w, h, cfg) == doctest::Approx(std::log(4.0)));
    BeamformerSet we(
        Eigen::MatrixXcd::Constant(1, 1, std::sqrt(std::exp(1.0) - 1.0)));
    CHECK(rate(0, we, h, cfg) == doctest::Approx(1.0));
  }
}

TEST_CASE("two-user interference example") {
  // h_1 = [1, 0]; both streams beamform onto antenna 1 with unit power.
  NetworkConfig cfg = unit_config(1, 2, 2);
  Eigen::MatrixXcd rows(2, 2);
  rows << 1, 0, 0, 1;
  ChannelSet h(rows);
  Eigen::MatrixXcd w(2, 2);
  w << 1, 1, 0, 0;
  BeamformerSet bf(w);
  CHECK(sinr(0, bf, h, cfg) == doctest::Approx(0.5));
}

TEST_CASE("per-user energy efficiency") {
  SUBCASE("direct evaluation with static power") {
    NetworkConfig cfg = unit_config(1, 1, 1, 10.0, 1.0, 10.0);
    ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
    BeamformerSet w(Eigen::MatrixXcd::Ones(1, 1));
    // rate = ln 2, power = 1 + (1*1 + 1*10)/1 = 12
    CHECK(user_ee(0, w, h, cfg) == doctest::Approx(std::log(2.0) / 12.0));
  }
  SUBCASE("zero rate gives zero efficiency") {
    NetworkConfig cfg = unit_config(1, 1, 1, 10.0, 1.0, 0.0);
    ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
    BeamformerSet w = BeamformerSet::zero(1, 1);
    CHECK(user_ee(0, w, h, cfg) == 0.0);
  }
  SUBCASE("all-zero power consumption is a domain error") {
    NetworkConfig cfg = unit_config(1, 1, 1, 10.0, 0.0, 0.0);
    ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
    BeamformerSet w = BeamformerSet::zero(1, 1);
    CHECK_THROWS_AS(user_ee(0, w, h, cfg), std::domain_error);
  }
}

TEST_CASE("mse closed forms") {
  NetworkConfig cfg = unit_config(1, 1, 1);
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  BeamformerSet w(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("zero receiver leaves only the bias term") {
    CHECK(mse(0, complex<double>(0.0), w, h, cfg) == doctest::Approx(1.0));
  }
  SUBCASE("unit receiver on unit channel") {
    // |mu|^2 sigma^2 + |1 - mu|^2 = 1 + 0
    CHECK(mse(0, complex<double>(1.0), w, h, cfg) == doctest::Approx(1.0));
  }
  SUBCASE("receiver optimality against random scalars") {
    Rng rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
      RandomCase rc = random_case(rng);
      for (int n = 0; n < rc.cfg.total_users(); ++n) {
        const complex<double> star = mmse_receiver(n, rc.w, rc.h, rc.cfg);
        const double opt = mse(n, star, rc.w, rc.h, rc.cfg);
        for (int k = 0; k < 100; ++k) {
          const complex<double> probe =
              star + 0.5 * rng.complex_normal() * rng.uniform(0.0, 2.0);
          CHECK(opt <= mse(n, probe, rc.w, rc.h, rc.cfg) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("mmse receiver closed forms") {
  NetworkConfig cfg = unit_config(1, 1, 1);
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("zero beamformers give a zero receiver") {
    BeamformerSet w = BeamformerSet::zero(1, 1);
    CHECK(std::abs(mmse_receiver(0, w, h, cfg)) == 0.0);
  }
  SUBCASE("unit channel and beamformer") {
    BeamformerSet w(Eigen::MatrixXcd::Ones(1, 1));
    CHECK(mmse_receiver(0, w, h, cfg).real() == doctest::Approx(0.5));
  }
  SUBCASE("plugging the receiver into the mse recovers the minimum") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      RandomCase rc = random_case(rng);
      for (int n = 0; n < rc.cfg.total_users(); ++n) {
        const double direct =
            mse(n, mmse_receiver(n, rc.w, rc.h, rc.cfg), rc.w, rc.h, rc.cfg);
        CHECK(direct ==
              doctest::Approx(mmse_value(n, rc.w, rc.h, rc.cfg)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("mmse value closed forms") {
  NetworkConfig cfg = unit_config(1, 1, 1);
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("zero beamformers give mmse of one") {
    CHECK(mmse_value(0, BeamformerSet::zero(1, 1), h, cfg) == 1.0);
  }
  SUBCASE("sinr of three gives one quarter") {
    BeamformerSet w(Eigen::MatrixXcd::Constant(1, 1, std::sqrt(3.0)));
    CHECK(mmse_value(0, w, h, cfg) == doctest::Approx(0.25));
  }
  SUBCASE("mmse equals one over one plus sinr") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
      RandomCase rc = random_case(rng);
      for (int n = 0; n < rc.cfg.total_users(); ++n) {
        CHECK(mmse_value(n, rc.w, rc.h, rc.cfg) ==
              doctest::Approx(1.0 / (1.0 + sinr(n, rc.w, rc.h, rc.cfg)))
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("per-station power block selection") {
  SUBCASE("single cell reduces to the squared Frobenius norm") {
    NetworkConfig cfg = unit_config(1, 3, 2);
    Rng rng(7);
    Eigen::MatrixXcd w(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int n = 0; n < 2; ++n) w(i, n) = rng.complex_normal();
    BeamformerSet bf(w);
    CHECK(per_bs_power(bf, 0, cfg) == doctest::Approx(w.squaredNorm()));
  }
  SUBCASE("two single-antenna stations split by rows") {
    NetworkConfig cfg = unit_config(2, 1, 1);
    Eigen::MatrixXcd w(2, 2);
    w << complex<double>(0.7, 0.1), 0.0, complex<double>(0.0, -1.2), 0.0;
    BeamformerSet bf(w);
    CHECK(per_bs_power(bf, 0, cfg) == doctest::Approx(std::norm(w(0, 0))));
    CHECK(per_bs_power(bf, 1, cfg) == doctest::Approx(std::norm(w(1, 0))));
  }
  SUBCASE("zero beamformers draw no power") {
    NetworkConfig cfg = unit_config(2, 2, 1);
    CHECK(per_bs_power(BeamformerSet::zero(4, 2), 0, cfg) == 0.0);
  }
  SUBCASE("station powers sum to the total") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      RandomCase rc = random_case(rng);
      double total = 0.0;
      for (int k = 0; k < rc.cfg.cells(); ++k) {
        total += per_bs_power(rc.w, k, rc.cfg);
      }
      CHECK(total == doctest::Approx(rc.w.columns().squaredNorm()));
    }
  }
  SUBCASE("index out of range throws") {
    NetworkConfig cfg = unit_config(2, 1, 1);
    CHECK_THROWS_AS(per_bs_power(BeamformerSet::zero(2, 2), 2, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("rate mmse duality and phase invariance") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase rc = random_case(rng);
    for (int n = 0; n < rc.cfg.total_users(); ++n) {
      const double r = rate(n, rc.w, rc.h, rc.cfg);
      const double m = mmse_value(n, rc.w, rc.h, rc.cfg);
      CHECK(r == doctest::Approx(-std::log(m)).epsilon(1e-12));
      CHECK(m > 0.0);
      CHECK(m <= 1.0);
    }
    // Rotating any column by a common phase leaves every sinr unchanged.
    const int col = static_cast<int>(rng.below(rc.cfg.total_users()));
    Eigen::MatrixXcd rotated = rc.w.columns();
    rotated.col(col) *= std::polar(1.0, rng.uniform(0.0, 6.28));
    BeamformerSet wr(rotated);
    for (int n = 0; n < rc.cfg.total_users(); ++n) {
      CHECK(sinr(n, wr, rc.h, rc.cfg) ==
            doctest::Approx(sinr(n, rc.w, rc.h, rc.cfg)).epsilon(1e-12));
    }
  }
}

TEST_CASE("dimension mismatches throw") {
  NetworkConfig cfg = unit_config(1, 2, 1);
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 3));  // wrong antenna count
  BeamformerSet w = BeamformerSet::zero(2, 1);
  CHECK_THROWS_AS(sinr(0, w, h, cfg), std::invalid_argument);
  CHECK_THROWS_AS(sinr(5, BeamformerSet::zero(2, 1),
                       ChannelSet(Eigen::MatrixXcd::Ones(1, 2)), cfg),
                  std::invalid_argument);
}
