// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/reductions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairbeam {

namespace {

/// Writes the realified pair of rows for the complex-linear functional
/// sum_i coeffs(i) * w(i, user) into rows (row, row+1) of a.
/// Re-part row: [Re c, -Im c] on the (re, im) columns; Im-part row:
/// [Im c, Re c]. The rows are written negated because the cone slack is
/// b - A x.
void write_complex_rows(Eigen::MatrixXd& a, int row,
                        const BeamformerLayout& lay, int user,
                        const Eigen::VectorXcd& coeffs) {
  for (int i = 0; i < lay.antennas; ++i) {
    const double cr = coeffs(i).real();
    const double ci = coeffs(i).imag();
    a(row, lay.re_index(i, user)) = -cr;
    a(row, lay.im_index(i, user)) = ci;
    a(row + 1, lay.re_index(i, user)) = -ci;
    a(row + 1, lay.im_index(i, user)) = -cr;
  }
}

}  // namespace

Eigen::MatrixXcd BeamformerLayout::unpack(const Eigen::VectorXd& x) const {
  if (x.size() < num_vars()) {
    throw std::invalid_argument("solution vector shorter than the layout");
  }
  Eigen::MatrixXcd w(antennas, users);
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) {
      w(i, n) = Complex(x(re_index(i, n)), x(im_index(i, n)));
    }
  }
  return w;
}

Eigen::VectorXd BeamformerLayout::pack(const Eigen::MatrixXcd& w,
                                       double aux) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_vars());
  for (int n = 0; n < users; ++n) {
    for (int i = 0; i < antennas; ++i) {
      x(re_index(i, n)) = w(i, n).real();
      x(im_index(i, n)) = w(i, n).imag();
    }
  }
  x(aux_index()) = aux;
  return x;
}

std::string BeamformerLayout::describe() const {
  std::ostringstream os;
  os << "interleaved (re, im); w[antenna i, user n] at 2*(n*" << antennas
     << "+i), aux scalar at " << aux_index() << ", " << num_vars()
     << " variables";
  return os.str();
}

BuiltSocp build_inner_socp(double eta, const Eigen::VectorXd& weights,
                           const Eigen::VectorXcd& receivers,
                           const ChannelSet& h, const NetworkConfig& cfg) {
  const int users = cfg.total_users();
  const int antennas = cfg.total_antennas();
  if (h.users() != users || h.antennas() != antennas) {
    throw std::invalid_argument("channel dimensions do not match the config");
  }
  if (weights.size() != users || receivers.size() != users) {
    throw std::invalid_argument("one (s, mu) pair per user required");
  }
  if (!(weights.array() > 0.0).all()) {
    throw std::invalid_argument("surrogate weights must be positive");
  }
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");

  BuiltSocp out;
  out.layout = BeamformerLayout{antennas, users};
  const int n_var = out.layout.num_vars();
  const int tau = out.layout.aux_index();
  const int cells = cfg.cells();
  const int per_bs = cfg.antennas_per_bs();

  const int power_dim = 2 * per_bs * users + 1;
  const int user_dim = 2 * (users - 1) + 2 * antennas + 2 + 2;
  const int m = cells * power_dim + users * user_dim;

  ConicProblem& p = out.problem;
  p.c = Eigen::VectorXd::Zero(n_var);
  p.c(tau) = 1.0;
  p.a = Eigen::MatrixXd::Zero(m, n_var);
  p.b = Eigen::VectorXd::Zero(m);

  int row = 0;
  for (int k = 0; k < cells; ++k) {
    p.b(row) = std::sqrt(cfg.bs_power_w()(k));
    ++row;
    for (int nn = 0; nn < users; ++nn) {
      for (int i = k * per_bs; i < (k + 1) * per_bs; ++i) {
        p.a(row, out.layout.re_index(i, nn)) = -1.0;
        p.a(row + 1, out.layout.im_index(i, nn)) = -1.0;
        row += 2;
      }
    }
    p.cones.push_back({ConeKind::kSoc, power_dim});
  }

  const double overhead = cfg.fixed_overhead_w();
  for (int nn = 0; nn < users; ++nn) {
    const double s_n = weights(nn);
    const Complex mu_n = receivers(nn);
    const double c_n = -std::log(s_n) - 1.0 +
                       s_n * std::norm(mu_n) * cfg.noise_w()(nn) +
                       eta * overhead;
    // Row nn is h_n^H already, so its entries are the w coefficients of
    // h_n^H w directly.
    const Eigen::VectorXcd coeffs = h.rows().row(nn).transpose();

    // radius: tau - c_n + 1
    p.a(row, tau) = -1.0;
    p.b(row) = 1.0 - c_n;
    ++row;
    // 2 sqrt(s_n) |mu_n| h_n^H w_m, m != n
    const double cross_scale = 2.0 * std::sqrt(s_n) * std::abs(mu_n);
    for (int mm = 0; mm < users; ++mm) {
      if (mm == nn) continue;
      write_complex_rows(p.a, row, out.layout, mm, cross_scale * coeffs);
      row += 2;
    }
    // 2 sqrt(eta) w_n
    const double eta_scale = 2.0 * std::sqrt(eta);
    for (int i = 0; i < antennas; ++i) {
      p.a(row, out.layout.re_index(i, nn)) = -eta_scale;
      p.a(row + 1, out.layout.im_index(i, nn)) = -eta_scale;
      row += 2;
    }
    // 2 sqrt(s_n) (1 - mu_n h_n^H w_n)
    const double self_scale = 2.0 * std::sqrt(s_n);
    write_complex_rows(p.a, row, out.layout, nn,
                       Eigen::VectorXcd(-self_scale * mu_n * coeffs));
    p.b(row) = self_scale;
    row += 2;
    // tau - c_n - 1
    p.a(row, tau) = -1.0;
    p.b(row) = -c_n - 1.0;
    ++row;
    p.cones.push_back({ConeKind::kSoc, user_dim});
  }

  p.validate();
  return out;
}

BuiltSocp build_powermin_socp(const Eigen::VectorXd& sinr_targets,
                              const ChannelSet& h, const NetworkConfig& cfg,
                              bool include_caps) {
  const int users = cfg.total_users();
  const int antennas = cfg.total_antennas();
  if (h.users() != users || h.antennas() != antennas) {
    throw std::invalid_argument("channel dimensions do not match the config");
  }
  if (sinr_targets.size() != users || !(sinr_targets.array() > 0.0).all()) {
    throw std::invalid_argument("need one positive SINR target per user");
  }

  BuiltSocp out;
  out.layout = BeamformerLayout{antennas, users};
  const int n_var = out.layout.num_vars();
  const int t = out.layout.aux_index();
  const int cells = cfg.cells();
  const int per_bs = cfg.antennas_per_bs();

  const int user_dim = 2 * users + 2;
  const int power_dim = 2 * per_bs * users + 1;
  const int epi_dim = 2 * antennas * users + 2;
  const int m = users + users * user_dim +
                (include_caps ? cells * power_dim : 0) + epi_dim;

  ConicProblem& p = out.problem;
  p.c = Eigen::VectorXd::Zero(n_var);
  p.c(t) = 1.0;
  p.a = Eigen::MatrixXd::Zero(m, n_var);
  p.b = Eigen::VectorXd::Zero(m);

  int row = 0;
  // Phase normalization: Im(h_n^H w_n) = 0.
  for (int nn = 0; nn < users; ++nn) {
    const Eigen::VectorXcd coeffs = h.rows().row(nn).transpose();
    for (int i = 0; i < antennas; ++i) {
      p.a(row, out.layout.re_index(i, nn)) = -coeffs(i).imag();
      p.a(row, out.layout.im_index(i, nn)) = -coeffs(i).real();
    }
    ++row;
  }
  p.cones.push_back({ConeKind::kZero, users});

  // sqrt(1 + 1/gamma_n) Re(h_n^H w_n) >= ||[h_n^H w_1 .. h_n^H w_N, sigma_n]||
  for (int nn = 0; nn < users; ++nn) {
    const Eigen::VectorXcd coeffs = h.rows().row(nn).transpose();
    const double lead = std::sqrt(1.0 + 1.0 / sinr_targets(nn));
    for (int i = 0; i < antennas; ++i) {
      p.a(row, out.layout.re_index(i, nn)) = -lead * coeffs(i).real();
      p.a(row, out.layout.im_index(i, nn)) = lead * coeffs(i).imag();
    }
    ++row;
    for (int mm = 0; mm < users; ++mm) {
      write_complex_rows(p.a, row, out.layout, mm, coeffs);
      row += 2;
    }
    p.b(row) = std::sqrt(cfg.noise_w()(nn));
    ++row;
    p.cones.push_back({ConeKind::kSoc, user_dim});
  }

  if (include_caps) {
    for (int k = 0; k < cells; ++k) {
      p.b(row) = std::sqrt(cfg.bs_power_w()(k));
      ++row;
      for (int nn = 0; nn < users; ++nn) {
        for (int i = k * per_bs; i < (k + 1) * per_bs; ++i) {
          p.a(row, out.layout.re_index(i, nn)) = -1.0;
          p.a(row + 1, out.layout.im_index(i, nn)) = -1.0;
          row += 2;
        }
      }
      p.cones.push_back({ConeKind::kSoc, power_dim});
    }
  }

  // ||[2 vec(W); t - 1]|| <= t + 1, i.e. ||W||_F^2 <= t.
  p.a(row, t) = -1.0;
  p.b(row) = 1.0;
  ++row;
  for (int nn = 0; nn < users; ++nn) {
    for (int i = 0; i < antennas; ++i) {
      p.a(row, out.layout.re_index(i, nn)) = -2.0;
      p.a(row + 1, out.layout.im_index(i, nn)) = -2.0;
      row += 2;
    }
  }
  p.a(row, t) = -1.0;
  p.b(row) = -1.0;
  ++row;
  p.cones.push_back({ConeKind::kSoc, epi_dim});

  p.validate();
  return out;
}

}  // namespace fairbeam
