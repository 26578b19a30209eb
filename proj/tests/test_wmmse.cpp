// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "fairbeam/rng.hpp"
#include "fairbeam/wmmse.hpp"

using namespace fairbeam;

namespace {

struct Instance {
  NetworkConfig cfg;
  ChannelSet h;
  BeamformerSet w;
};

Instance random_instance(Rng& rng) {
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
  Eigen::VectorXd noise(users);
  for (int n = 0; n < users; ++n) noise(n) = rng.uniform(0.3, 2.0);
  return Instance{NetworkConfig(cells, per_bs, per_cell,
                                Eigen::VectorXd::Constant(cells, 10.0), 0.6,
                                2.0, noise),
                  ChannelSet(rows), BeamformerSet(w)};
}

NetworkConfig tiny_config() {
  return NetworkConfig(1, 1, 1, Eigen::VectorXd::Constant(1, 10.0), 0.5, 1.0,
                       Eigen::VectorXd::Constant(1, 1.0));
}

}  // namespace

TEST_CASE("weight update closed forms") {
  NetworkConfig cfg = tiny_config();
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("zero beamformers give unit weight") {
    CHECK(weight_update(0, BeamformerSet::zero(1, 1), h, cfg) ==
          doctest::Approx(1.0));
  }
  SUBCASE("weight is one plus sinr") {
    BeamformerSet w(Eigen::MatrixXcd::Constant(1, 1, std::sqrt(3.0)));
    CHECK(weight_update(0, w, h, cfg) == doctest::Approx(4.0));
  }
  SUBCASE("surrogate at the optimal weight recovers the rate") {
    Rng rng(17);
    for (int t = 0; t < 30; ++t) {
      Instance inst = random_instance(rng);
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const Complex mu = mmse_receiver(n, inst.w, inst.h, inst.cfg);
        const double s = weight_update(n, inst.w, inst.h, inst.cfg);
        CHECK(s >= 1.0);
        CHECK(surrogate_rate(n, s, mu, inst.w, inst.h, inst.cfg) ==
              doctest::Approx(rate(n, inst.w, inst.h, inst.cfg))
                  .epsilon(1e-11));
        // The weight is the argmax over a fine 1-D scan of the surrogate.
        double best = -1e300, best_s = 0.0;
        for (int k = 1; k <= 4000; ++k) {
          const double cand = s * 2.0 * k / 4000.0;
          const double val =
              surrogate_rate(n, cand, mu, inst.w, inst.h, inst.cfg);
          if (val > best) {
            best = val;
            best_s = cand;
          }
        }
        CHECK(std::abs(best_s - s) <= s * 1e-3 + 1e-9);
      }
    }
  }
}

TEST_CASE("surrogate rate basics") {
  NetworkConfig cfg = tiny_config();
  ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
  BeamformerSet w(Eigen::MatrixXcd::Ones(1, 1));
  SUBCASE("unit weight zero receiver evaluates to zero") {
    CHECK(surrogate_rate(0, 1.0, Complex(0.0), w, h, cfg) ==
          doctest::Approx(0.0));
  }
  SUBCASE("nonpositive weights are rejected") {
    CHECK_THROWS_AS(surrogate_rate(0, 0.0, Complex(0.5), w, h, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(surrogate_rate(0, -1.0, Complex(0.5), w, h, cfg),
                    std::invalid_argument);
  }
  SUBCASE("never exceeds the rate") {
    Rng rng(23);
    for (int t = 0; t < 30; ++t) {
      Instance inst = random_instance(rng);
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const double r = rate(n, inst.w, inst.h, inst.cfg);
        for (int k = 0; k < 20; ++k) {
          const double s = rng.uniform(0.05, 8.0);
          const Complex mu = 0.7 * rng.complex_normal();
          CHECK(surrogate_rate(n, s, mu, inst.w, inst.h, inst.cfg) <=
                r + 1e-10);
        }
      }
    }
  }
  SUBCASE("argmax over the weight at fixed receiver is 1/mse") {
    Rng rng(29);
    for (int t = 0; t < 10; ++t) {
      Instance inst = random_instance(rng);
      const Complex mu = 0.4 * rng.complex_normal();
      const double m = mse(0, mu, inst.w, inst.h, inst.cfg);
      // Golden-section over s confirms stationarity at 1/mse.
      double lo = 1e-4, hi = 10.0 / m;
      const double gr = 0.6180339887498949;
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      auto f = [&](double s) {
        return surrogate_rate(0, s, mu, inst.w, inst.h, inst.cfg);
      };
      double f1 = f(x1), f2 = f(x2);
      while (hi - lo > 1e-10 * (1.0 + hi)) {
        if (f1 < f2) {
          lo = x1; x1 = x2; f1 = f2; x2 = lo + gr * (hi - lo); f2 = f(x2);
        } else {
          hi = x2; x2 = x1; f2 = f1; x1 = hi - gr * (hi - lo); f1 = f(x1);
        }
      }
      CHECK(0.5 * (lo + hi) == doctest::Approx(1.0 / m).epsilon(1e-5));
    }
  }
}

TEST_CASE("parameterized objective g") {
  Rng rng(31);
  SUBCASE("eta zero with optimal auxiliaries recovers the rate") {
    for (int t = 0; t < 20; ++t) {
      Instance inst = random_instance(rng);
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const Complex mu = mmse_receiver(n, inst.w, inst.h, inst.cfg);
        const double s = weight_update(n, inst.w, inst.h, inst.cfg);
        CHECK(g_value(n, 0.0, s, mu, inst.w, inst.h, inst.cfg) ==
              doctest::Approx(rate(n, inst.w, inst.h, inst.cfg))
                  .epsilon(1e-11));
      }
    }
  }
  SUBCASE("eta at the per-user ratio zeroes g") {
    for (int t = 0; t < 20; ++t) {
      Instance inst = random_instance(rng);
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const Complex mu = mmse_receiver(n, inst.w, inst.h, inst.cfg);
        const double s = weight_update(n, inst.w, inst.h, inst.cfg);
        const double eta = user_ee(n, inst.w, inst.h, inst.cfg);
        CHECK(g_value(n, eta, s, mu, inst.w, inst.h, inst.cfg) ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
      }
    }
  }
  SUBCASE("large eta forces g negative") {
    for (int t = 0; t < 20; ++t) {
      Instance inst = random_instance(rng);
      double max_ee = 0.0;
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        max_ee = std::max(max_ee, user_ee(n, inst.w, inst.h, inst.cfg));
      }
      const double eta = 10.0 * max_ee + 1e-6;
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const Complex mu = mmse_receiver(n, inst.w, inst.h, inst.cfg);
        const double s = weight_update(n, inst.w, inst.h, inst.cfg);
        CHECK(g_value(n, eta, s, mu, inst.w, inst.h, inst.cfg) < 0.0);
      }
    }
  }
  SUBCASE("expanded and compact routes agree") {
    for (int t = 0; t < 50; ++t) {
      Instance inst = random_instance(rng);
      for (int n = 0; n < inst.cfg.total_users(); ++n) {
        const double s = rng.uniform(0.5, 5.0);
        const Complex mu = 0.5 * rng.complex_normal();
        const double eta = rng.uniform(0.0, 0.4);
        const double a = g_value(n, eta, s, mu, inst.w, inst.h, inst.cfg);
        const double b =
            g_value_compact(n, eta, s, mu, inst.w, inst.h, inst.cfg);
        CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
      }
    }
  }
  SUBCASE("g is affine and strictly decreasing in eta") {
    Instance inst = random_instance(rng);
    const double s = 2.0;
    const Complex mu(0.3, -0.2);
    const double g0 = g_value(0, 0.0, s, mu, inst.w, inst.h, inst.cfg);
    const double g1 = g_value(0, 1.0, s, mu, inst.w, inst.h, inst.cfg);
    const double g2 = g_value(0, 2.0, s, mu, inst.w, inst.h, inst.cfg);
    CHECK(g1 < g0);
    CHECK(g2 - g1 == doctest::Approx(g1 - g0).epsilon(1e-9));
  }
}

TEST_CASE("ee factor") {
  Rng rng(37);
  SUBCASE("single user at the closed forms equals the user efficiency") {
    for (int t = 0; t < 10; ++t) {
      NetworkConfig cfg = tiny_config();
      Eigen::MatrixXcd hrow(1, 1);
      hrow(0, 0) = rng.complex_normal();
      ChannelSet h(hrow);
      Eigen::MatrixXcd wcol(1, 1);
      wcol(0, 0) = rng.complex_normal();
      BeamformerSet w(wcol);
      const Eigen::VectorXcd mu = mmse_receivers(w, h, cfg);
      const Eigen::VectorXd s = mmse_weights(w, h, cfg);
      CHECK(ee_factor(w, s, mu, h, cfg) ==
            doctest::Approx(user_ee(0, w, h, cfg)).epsilon(1e-11));
    }
  }
  SUBCASE("symmetric users share the common value") {
    NetworkConfig cfg(1, 2, 2, Eigen::VectorXd::Constant(1, 10.0), 0.5, 1.0,
                      Eigen::VectorXd::Constant(2, 1.0));
    Eigen::MatrixXcd rows(2, 2);
    rows << 1, 0, 0, 1;
    ChannelSet h(rows);
    Eigen::MatrixXcd w(2, 2);
    w << 1.3, 0, 0, 1.3;
    BeamformerSet bf(w);
    const Eigen::VectorXcd mu = mmse_receivers(bf, h, cfg);
    const Eigen::VectorXd s = mmse_weights(bf, h, cfg);
    CHECK(ee_factor(bf, s, mu, h, cfg) ==
          doctest::Approx(user_ee(0, bf, h, cfg)).epsilon(1e-11));
    CHECK(user_ee(0, bf, h, cfg) ==
          doctest::Approx(user_ee(1, bf, h, cfg)).epsilon(1e-12));
  }
  SUBCASE("suboptimal auxiliaries underestimate the minimum efficiency") {
    for (int t = 0; t < 30; ++t) {
      Instance inst = random_instance(rng);
      const int users = inst.cfg.total_users();
      Eigen::VectorXd s(users);
      Eigen::VectorXcd mu(users);
      for (int n = 0; n < users; ++n) {
        s(n) = rng.uniform(0.2, 6.0);
        mu(n) = 0.5 * rng.complex_normal();
      }
      double min_ee = 1e300;
      for (int n = 0; n < users; ++n) {
        min_ee = std::min(min_ee, user_ee(n, inst.w, inst.h, inst.cfg));
      }
      CHECK(ee_factor(inst.w, s, mu, inst.h, inst.cfg) <= min_ee + 1e-10);
    }
  }
}

TEST_CASE("minimax interchange holds numerically") {
  Rng rng(41);
  SUBCASE("random instances, both orderings agree") {
    for (int t = 0; t < 20; ++t) {
      // The cited setting: 2 cells, 2 antennas each, 1 user per cell.
      const int users = 2, antennas = 4;
      Eigen::MatrixXcd rows(users, antennas);
      Eigen::MatrixXcd w(antennas, users);
      for (int n = 0; n < users; ++n) {
        for (int i = 0; i < antennas; ++i) {
          rows(n, i) = rng.complex_normal();
          w(i, n) = rng.complex_normal();
        }
      }
      NetworkConfig cfg(2, 2, 1, Eigen::VectorXd::Constant(2, 10.0), 0.5, 1.0,
                        Eigen::VectorXd::Constant(2, 1.0));
      CHECK(lemma1_check(BeamformerSet(w), ChannelSet(rows), cfg));
    }
  }
  SUBCASE("single user trivially") {
    NetworkConfig cfg = tiny_config();
    ChannelSet h(Eigen::MatrixXcd::Ones(1, 1));
    BeamformerSet w(Eigen::MatrixXcd::Constant(1, 1, 0.8));
    CHECK(lemma1_check(w, h, cfg));
  }
}
