// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#include "fairbeam/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fairbeam {

namespace {

constexpr double kStepMax = 0.999;
constexpr double kStepScale = 0.98;  // backoff on the combined step
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 0.9999;
constexpr double kDeltaReg = 1e-10;  // static regularization, refined away

struct Layout {
  int n = 0;                      // variables
  int m_eq = 0;                   // zero-cone rows
  int m_lp = 0;                   // nonnegative rows
  std::vector<int> soc_dims;      // second-order cone sizes, in order
  int m_in = 0;                   // m_lp + sum(soc_dims)
  std::vector<int> eq_rows;       // original row of each equality row
  std::vector<int> in_rows;       // original row of each inequality row
};

Layout make_layout(const ConicProblem& p) {
  Layout lay;
  lay.n = p.num_vars();
  int row = 0;
  // Nonnegative rows are gathered in front of the second-order cones so the
  // scaled iterates have the usual LP-block-then-SOC-blocks shape.
  std::vector<int> lp_rows;
  std::vector<int> soc_rows;
  for (const ConeSpec& cone : p.cones) {
    switch (cone.kind) {
      case ConeKind::kZero:
        for (int i = 0; i < cone.dim; ++i) lay.eq_rows.push_back(row + i);
        lay.m_eq += cone.dim;
        break;
      case ConeKind::kNonneg:
        for (int i = 0; i < cone.dim; ++i) lp_rows.push_back(row + i);
        lay.m_lp += cone.dim;
        break;
      case ConeKind::kSoc:
        for (int i = 0; i < cone.dim; ++i) soc_rows.push_back(row + i);
        lay.soc_dims.push_back(cone.dim);
        break;
    }
    row += cone.dim;
  }
  lay.in_rows = std::move(lp_rows);
  lay.in_rows.insert(lay.in_rows.end(), soc_rows.begin(), soc_rows.end());
  lay.m_in = static_cast<int>(lay.in_rows.size());
  return lay;
}

/// Nesterov-Todd scaling state for the inequality block. The LP part stores
/// W^2 diagonally; each SOC stores eta^2 and the normalized scaling point
/// wbar with wbar_0^2 - ||wbar_1||^2 = 1. With J = diag(1, -I):
///   W^2  v = eta^2 (2 wbar wbar' - J) v
///   W^-2 v = eta^-2 (2 (J wbar)(J wbar)' - J) v
struct Scaling {
  Eigen::VectorXd lp_w2;  // s_i / z_i
  struct Soc {
    double eta2 = 1.0;
    Eigen::VectorXd wbar;
  };
  std::vector<Soc> socs;
};

double jdot(const Eigen::Ref<const Eigen::VectorXd>& u,
            const Eigen::Ref<const Eigen::VectorXd>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

class HsdSolver {
 public:
  HsdSolver(const ConicProblem& p, const SolverSettings& settings)
      : p_(p), set_(settings), lay_(make_layout(p)) {
    const int n = lay_.n;
    c_ = p.c;
    a_eq_.resize(lay_.m_eq, n);
    b_eq_.resize(lay_.m_eq);
    for (int i = 0; i < lay_.m_eq; ++i) {
      a_eq_.row(i) = p.a.row(lay_.eq_rows[i]);
      b_eq_(i) = p.b(lay_.eq_rows[i]);
    }
    g_.resize(lay_.m_in, n);
    h_.resize(lay_.m_in);
    for (int i = 0; i < lay_.m_in; ++i) {
      g_.row(i) = p.a.row(lay_.in_rows[i]);
      h_(i) = p.b(lay_.in_rows[i]);
    }
    row_scale_eq_ = Eigen::VectorXd::Ones(lay_.m_eq);
    row_scale_in_ = Eigen::VectorXd::Ones(lay_.m_in);
    if (set_.equilibrate) equilibrate();
    precompute_gram();
  }

  ConicSolution solve();

 private:
  // --- data in the internal (equilibrated, reordered) layout -------------
  const ConicProblem& p_;
  SolverSettings set_;
  Layout lay_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd a_eq_;
  Eigen::VectorXd b_eq_;
  Eigen::MatrixXd g_;
  Eigen::VectorXd h_;
  Eigen::VectorXd row_scale_eq_;  // original row = scale * internal row
  Eigen::VectorXd row_scale_in_;
  std::vector<Eigen::MatrixXd> soc_gram_;  // G_c' G_c per second-order cone
  std::vector<Eigen::VectorXd> soc_g0_;    // first row of each cone block

  // --- iterate -------------------------------------------------------------
  Eigen::VectorXd x_, y_, z_, s_;
  double tau_ = 1.0, kappa_ = 1.0;
  Scaling scal_;
  Eigen::VectorXd lambda_;

  // factorization state
  Eigen::LDLT<Eigen::MatrixXd> m_ldlt_;
  Eigen::MatrixXd m_mat_;
  Eigen::MatrixXd schur_;
  Eigen::LDLT<Eigen::MatrixXd> schur_ldlt_;
  double delta_ = kDeltaReg;
  // Fallback on the unsquared KKT system for rank-deficient or
  // ill-conditioned normal equations.
  mutable bool use_lu_ = false;
  mutable bool lu_ready_ = false;
  mutable Eigen::PartialPivLU<Eigen::MatrixXd> kkt_lu_;

  // residual bookkeeping
  Eigen::VectorXd rx_, ry_, rz_;
  double rt_ = 0.0;
  double cx_ = 0.0, by_ = 0.0, hz_ = 0.0;
  double pres_ = 0.0, dres_ = 0.0, gap_ = 0.0, relgap_ = 0.0, mu_ = 0.0;
  double pinfres_ = std::numeric_limits<double>::infinity();
  double dinfres_ = std::numeric_limits<double>::infinity();
  double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;

  void equilibrate();
  void precompute_gram();

  int soc_offset(int k) const {
    int off = lay_.m_lp;
    for (int j = 0; j < k; ++j) off += lay_.soc_dims[j];
    return off;
  }

  // Scaled-space cone algebra over the inequality block.
  bool update_scaling();
  void apply_w(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  void apply_w2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  void apply_w2inv(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  void cone_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    Eigen::VectorXd& out) const;
  void cone_divide(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                   Eigen::VectorXd& out) const;
  void bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const;
  double line_search(const Eigen::VectorXd& ds_by_w,
                     const Eigen::VectorXd& w_dz, double dtau,
                     double dkap) const;

  bool factor_kkt();
  void factor_lu() const;
  void solve_kkt(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                 const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                 Eigen::VectorXd& dy, Eigen::VectorXd& dz) const;
  void solve_kkt_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                      const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                      Eigen::VectorXd& dy, Eigen::VectorXd& dz) const;
  double kkt_residual(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                      const Eigen::VectorXd& bz, const Eigen::VectorXd& dx,
                      const Eigen::VectorXd& dy, const Eigen::VectorXd& dz,
                      Eigen::VectorXd& ex, Eigen::VectorXd& ey,
                      Eigen::VectorXd& ez) const;

  void compute_residuals();
  void update_statistics();

  ConicSolution extract(SolveStatus status) const;
};

void HsdSolver::equilibrate() {
  // One scalar per constraint row, shared across a whole second-order cone
  // so the cone is preserved; the scalar is the max-abs entry of [A | b]
  // over the rows it covers.
  for (int i = 0; i < lay_.m_eq; ++i) {
    double d = std::max(a_eq_.row(i).cwiseAbs().maxCoeff(),
                        std::abs(b_eq_(i)));
    if (d < 1e-12) d = 1.0;
    a_eq_.row(i) /= d;
    b_eq_(i) /= d;
    row_scale_eq_(i) = d;
  }
  for (int i = 0; i < lay_.m_lp; ++i) {
    double d = std::max(g_.row(i).cwiseAbs().maxCoeff(), std::abs(h_(i)));
    if (d < 1e-12) d = 1.0;
    g_.row(i) /= d;
    h_(i) /= d;
    row_scale_in_(i) = d;
  }
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    double d = g_.middleRows(off, dim).cwiseAbs().maxCoeff();
    d = std::max(d, h_.segment(off, dim).cwiseAbs().maxCoeff());
    if (d < 1e-12) d = 1.0;
    g_.middleRows(off, dim) /= d;
    h_.segment(off, dim) /= d;
    row_scale_in_.segment(off, dim).setConstant(d);
  }
}

void HsdSolver::precompute_gram() {
  soc_gram_.clear();
  soc_g0_.clear();
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    Eigen::MatrixXd gram(lay_.n, lay_.n);
    gram.noalias() = g_.middleRows(off, dim).transpose() * g_.middleRows(off, dim);
    soc_gram_.push_back(std::move(gram));
    soc_g0_.push_back(g_.row(off).transpose());
  }
}

bool HsdSolver::update_scaling() {
  scal_.lp_w2.resize(lay_.m_lp);
  for (int i = 0; i < lay_.m_lp; ++i) {
    if (s_(i) <= 0.0 || z_(i) <= 0.0) return false;
    scal_.lp_w2(i) = s_(i) / z_(i);
  }
  scal_.socs.assign(lay_.soc_dims.size(), {});
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto sseg = s_.segment(off, dim);
    const auto zseg = z_.segment(off, dim);
    const double sres = jdot(sseg, sseg);
    const double zres = jdot(zseg, zseg);
    if (sres <= 0.0 || zres <= 0.0) return false;
    const double snorm = std::sqrt(sres);
    const double znorm = std::sqrt(zres);
    Eigen::VectorXd sbar = sseg / snorm;
    Eigen::VectorXd zbar = zseg / znorm;
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Scaling::Soc soc;
    soc.eta2 = snorm / znorm;
    soc.wbar.resize(dim);
    soc.wbar(0) = (0.5 / gamma) * (sbar(0) + zbar(0));
    soc.wbar.tail(dim - 1) =
        (0.5 / gamma) * (sbar.tail(dim - 1) - zbar.tail(dim - 1));
    scal_.socs[static_cast<std::size_t>(k)] = std::move(soc);
  }
  // lambda = W z
  apply_w(z_, lambda_);
  return true;
}

void HsdSolver::apply_w(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  out.resize(lay_.m_in);
  out.head(lay_.m_lp) =
      scal_.lp_w2.head(lay_.m_lp).cwiseSqrt().cwiseProduct(v.head(lay_.m_lp));
  for (std::size_t k = 0; k < scal_.socs.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto& sc = scal_.socs[k];
    const double eta = std::sqrt(sc.eta2);
    const auto vseg = v.segment(off, dim);
    const double tail_dot = sc.wbar.tail(dim - 1).dot(vseg.tail(dim - 1));
    out(off) = eta * (sc.wbar(0) * vseg(0) + tail_dot);
    out.segment(off + 1, dim - 1) =
        eta * (vseg.tail(dim - 1) +
               (vseg(0) + tail_dot / (1.0 + sc.wbar(0))) * sc.wbar.tail(dim - 1));
  }
}

void HsdSolver::apply_w2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  out.resize(lay_.m_in);
  out.head(lay_.m_lp) =
      scal_.lp_w2.head(lay_.m_lp).cwiseProduct(v.head(lay_.m_lp));
  for (std::size_t k = 0; k < scal_.socs.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto& sc = scal_.socs[k];
    const auto vseg = v.segment(off, dim);
    const double wv = sc.wbar(0) * vseg(0) +
                      sc.wbar.tail(dim - 1).dot(vseg.tail(dim - 1));
    // eta^2 (2 wbar (wbar'v) - J v)
    out(off) = sc.eta2 * (2.0 * sc.wbar(0) * wv - vseg(0));
    out.segment(off + 1, dim - 1) =
        sc.eta2 * (2.0 * wv * sc.wbar.tail(dim - 1) + vseg.tail(dim - 1));
  }
}

void HsdSolver::apply_w2inv(const Eigen::VectorXd& v,
                            Eigen::VectorXd& out) const {
  out.resize(lay_.m_in);
  out.head(lay_.m_lp) =
      v.head(lay_.m_lp).cwiseQuotient(scal_.lp_w2.head(lay_.m_lp));
  for (std::size_t k = 0; k < scal_.socs.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto& sc = scal_.socs[k];
    const auto vseg = v.segment(off, dim);
    // (J wbar)'v = wbar_0 v_0 - wbar_1'v_1
    const double jwv = sc.wbar(0) * vseg(0) -
                       sc.wbar.tail(dim - 1).dot(vseg.tail(dim - 1));
    out(off) = (2.0 * sc.wbar(0) * jwv - vseg(0)) / sc.eta2;
    out.segment(off + 1, dim - 1) =
        (-2.0 * jwv * sc.wbar.tail(dim - 1) + vseg.tail(dim - 1)) / sc.eta2;
  }
}

void HsdSolver::cone_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                             Eigen::VectorXd& out) const {
  out.resize(lay_.m_in);
  out.head(lay_.m_lp) =
      u.head(lay_.m_lp).cwiseProduct(v.head(lay_.m_lp));
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto useg = u.segment(off, dim);
    const auto vseg = v.segment(off, dim);
    out(off) = useg.dot(vseg);
    out.segment(off + 1, dim - 1) =
        useg(0) * vseg.tail(dim - 1) + vseg(0) * useg.tail(dim - 1);
  }
}

void HsdSolver::cone_divide(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                            Eigen::VectorXd& out) const {
  out.resize(lay_.m_in);
  out.head(lay_.m_lp) = w.head(lay_.m_lp).cwiseQuotient(u.head(lay_.m_lp));
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto useg = u.segment(off, dim);
    const auto wseg = w.segment(off, dim);
    const double rho = jdot(useg, useg);
    const double zeta = useg.tail(dim - 1).dot(wseg.tail(dim - 1));
    out(off) = (useg(0) * wseg(0) - zeta) / rho;
    const double factor = (zeta / useg(0) - wseg(0)) / rho;
    out.segment(off + 1, dim - 1) =
        factor * useg.tail(dim - 1) + wseg.tail(dim - 1) / useg(0);
  }
}

void HsdSolver::bring_to_cone(const Eigen::VectorXd& r,
                              Eigen::VectorXd& out) const {
  double alpha = -0.99;
  for (int i = 0; i < lay_.m_lp; ++i) {
    if (r(i) <= 0.0 && -r(i) > alpha) alpha = -r(i);
  }
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const double res = r(off) - r.segment(off + 1, dim - 1).norm();
    if (res <= 0.0 && -res > alpha) alpha = -res;
  }
  alpha += 1.0;
  out = r;
  out.head(lay_.m_lp).array() += alpha;
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    out(soc_offset(static_cast<int>(k))) += alpha;
  }
}

double HsdSolver::line_search(const Eigen::VectorXd& ds_by_w,
                              const Eigen::VectorXd& w_dz, double dtau,
                              double dkap) const {
  double alpha = 2.0;
  if (lay_.m_lp > 0) {
    const double rho_min =
        (ds_by_w.head(lay_.m_lp).cwiseQuotient(lambda_.head(lay_.m_lp)))
            .minCoeff();
    const double sig_min =
        (w_dz.head(lay_.m_lp).cwiseQuotient(lambda_.head(lay_.m_lp)))
            .minCoeff();
    const double worst = std::min(rho_min, sig_min);
    if (worst < 0.0) alpha = std::min(alpha, 1.0 / (-worst));
  }
  if (dtau < 0.0) alpha = std::min(alpha, -tau_ / dtau);
  if (dkap < 0.0) alpha = std::min(alpha, -kappa_ / dkap);
  for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto lam = lambda_.segment(off, dim);
    const double lknorm2 = jdot(lam, lam);
    if (lknorm2 <= 0.0) continue;
    const double lknorm = std::sqrt(lknorm2);
    Eigen::VectorXd lbar = lam / lknorm;
    // Maximum steps along ds and dz to the scaled cone boundary.
    for (const auto* dir : {&ds_by_w, &w_dz}) {
      const auto d = dir->segment(off, dim);
      const double lbar_d = lbar(0) * d(0) - lbar.tail(dim - 1).dot(d.tail(dim - 1));
      const double f = (lbar_d + d(0)) / (1.0 + lbar(0));
      Eigen::VectorXd rho(dim);
      rho(0) = lbar_d / lknorm;
      rho.tail(dim - 1) =
          (d.tail(dim - 1) - f * lbar.tail(dim - 1)) / lknorm;
      const double margin = rho.tail(dim - 1).norm() - rho(0);
      if (margin > 0.0) alpha = std::min(alpha, 1.0 / margin);
    }
  }
  return std::min(alpha, kStepMax);
}

bool HsdSolver::factor_kkt() {
  const int n = lay_.n;
  m_mat_.resize(n, n);
  m_mat_.setZero();
  // LP block: G_lp' diag(z/s) G_lp.
  for (int i = 0; i < lay_.m_lp; ++i) {
    m_mat_.noalias() +=
        (1.0 / scal_.lp_w2(i)) * (g_.row(i).transpose() * g_.row(i));
  }
  // SOC blocks: eta^-2 (G_c'G_c - 2 g0 g0' + 2 u u') with u = G_c' J wbar.
  for (std::size_t k = 0; k < scal_.socs.size(); ++k) {
    const int off = soc_offset(static_cast<int>(k));
    const int dim = lay_.soc_dims[k];
    const auto& sc = scal_.socs[k];
    Eigen::VectorXd jw(dim);
    jw(0) = sc.wbar(0);
    jw.tail(dim - 1) = -sc.wbar.tail(dim - 1);
    Eigen::VectorXd u = g_.middleRows(off, dim).transpose() * jw;
    const double inv_eta2 = 1.0 / sc.eta2;
    m_mat_.noalias() += inv_eta2 * soc_gram_[k];
    m_mat_.noalias() -=
        (2.0 * inv_eta2) * (soc_g0_[k] * soc_g0_[k].transpose());
    m_mat_.noalias() += (2.0 * inv_eta2) * (u * u.transpose());
  }
  lu_ready_ = false;
  use_lu_ = false;
  const double diag_scale = std::max(1.0, m_mat_.diagonal().maxCoeff());
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd reg = m_mat_;
    reg.diagonal().array() += delta_ * diag_scale;
    m_ldlt_.compute(reg);
    bool ok = m_ldlt_.info() == Eigen::Success;
    if (ok && lay_.m_eq > 0) {
      schur_.noalias() = a_eq_ * m_ldlt_.solve(a_eq_.transpose());
      schur_.diagonal().array() +=
          delta_ * std::max(1.0, schur_.diagonal().cwiseAbs().maxCoeff());
      schur_ldlt_.compute(schur_);
      ok = schur_ldlt_.info() == Eigen::Success;
    }
    if (ok) return true;
    delta_ *= 1e3;
  }
  use_lu_ = true;  // LDLT could not factor; fall back to the full system
  return true;
}

void HsdSolver::factor_lu() const {
  const int n = lay_.n;
  const int dim = n + lay_.m_eq + lay_.m_in;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  k.block(0, n, n, lay_.m_eq) = a_eq_.transpose();
  k.block(n, 0, lay_.m_eq, n) = a_eq_;
  k.block(0, n + lay_.m_eq, n, lay_.m_in) = g_.transpose();
  k.block(n + lay_.m_eq, 0, lay_.m_in, n) = g_;
  // -W^2 block.
  const int zoff = n + lay_.m_eq;
  for (int i = 0; i < lay_.m_lp; ++i) {
    k(zoff + i, zoff + i) = -scal_.lp_w2(i);
  }
  for (std::size_t c = 0; c < scal_.socs.size(); ++c) {
    const int off = zoff + soc_offset(static_cast<int>(c));
    const int d = lay_.soc_dims[c];
    const auto& sc = scal_.socs[c];
    Eigen::MatrixXd w2 =
        2.0 * sc.eta2 * (sc.wbar * sc.wbar.transpose());
    w2(0, 0) -= sc.eta2;
    for (int i = 1; i < d; ++i) w2(i, i) += sc.eta2;
    k.block(off, off, d, d) = -w2;
  }
  // Quasi-definite static regularization scaled to the data blocks (the
  // scaling block can be enormous near convergence); iterative refinement
  // against the true system recovers the accuracy.
  const double data_scale =
      1.0 + std::max(g_.cwiseAbs().maxCoeff(),
                     lay_.m_eq > 0 ? a_eq_.cwiseAbs().maxCoeff() : 0.0);
  const double reg = 1e-11 * data_scale;
  for (int i = 0; i < dim; ++i) k(i, i) += i < n ? reg : -reg;
  kkt_lu_.compute(k);
  lu_ready_ = true;
}

void HsdSolver::solve_kkt_once(const Eigen::VectorXd& bx,
                               const Eigen::VectorXd& by,
                               const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                               Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
  if (use_lu_) {
    if (!lu_ready_) factor_lu();
    Eigen::VectorXd rhs(lay_.n + lay_.m_eq + lay_.m_in);
    rhs.head(lay_.n) = bx;
    if (lay_.m_eq > 0) rhs.segment(lay_.n, lay_.m_eq) = by;
    rhs.tail(lay_.m_in) = bz;
    const Eigen::VectorXd sol = kkt_lu_.solve(rhs);
    dx = sol.head(lay_.n);
    dy = sol.segment(lay_.n, lay_.m_eq);
    dz = sol.tail(lay_.m_in);
    return;
  }
  Eigen::VectorXd w2inv_bz;
  apply_w2inv(bz, w2inv_bz);
  Eigen::VectorXd bx_tilde = bx;
  bx_tilde.noalias() += g_.transpose() * w2inv_bz;
  if (lay_.m_eq > 0) {
    const Eigen::VectorXd m_bx = m_ldlt_.solve(bx_tilde);
    dy = schur_ldlt_.solve(a_eq_ * m_bx - by);
    dx = m_ldlt_.solve(bx_tilde - a_eq_.transpose() * dy);
  } else {
    dy.resize(0);
    dx = m_ldlt_.solve(bx_tilde);
  }
  Eigen::VectorXd gdx = g_ * dx;
  apply_w2inv(gdx - bz, dz);
}

double HsdSolver::kkt_residual(const Eigen::VectorXd& bx,
                               const Eigen::VectorXd& by,
                               const Eigen::VectorXd& bz,
                               const Eigen::VectorXd& dx,
                               const Eigen::VectorXd& dy,
                               const Eigen::VectorXd& dz, Eigen::VectorXd& ex,
                               Eigen::VectorXd& ey, Eigen::VectorXd& ez) const {
  ex = bx;
  if (lay_.m_eq > 0) ex.noalias() -= a_eq_.transpose() * dy;
  ex.noalias() -= g_.transpose() * dz;
  if (lay_.m_eq > 0) {
    ey = by;
    ey.noalias() -= a_eq_ * dx;
  } else {
    ey.resize(0);
  }
  Eigen::VectorXd w2dz;
  apply_w2(dz, w2dz);
  ez = bz;
  ez.noalias() -= g_ * dx;
  ez += w2dz;
  return std::max({ex.lpNorm<Eigen::Infinity>(),
                   lay_.m_eq > 0 ? ey.lpNorm<Eigen::Infinity>() : 0.0,
                   ez.lpNorm<Eigen::Infinity>()});
}

void HsdSolver::solve_kkt(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                          const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                          Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
  solve_kkt_once(bx, by, bz, dx, dy, dz);
  const double thresh = 1e-12 * (1.0 + bx.lpNorm<Eigen::Infinity>() +
                                 bz.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd ex, ey, ez;
  double err = kkt_residual(bx, by, bz, dx, dy, dz, ex, ey, ez);
  for (int pass = 0; pass < 4; ++pass) {
    if (err <= thresh || !std::isfinite(err)) return;
    Eigen::VectorXd cx, cy, cz;
    solve_kkt_once(ex, ey, ez, cx, cy, cz);
    dx += cx;
    if (lay_.m_eq > 0) dy += cy;
    dz += cz;
    err = kkt_residual(bx, by, bz, dx, dy, dz, ex, ey, ez);
  }
  if (err > 1e3 * thresh && !use_lu_ && std::isfinite(err)) {
    // Normal equations hit their conditioning floor; redo on the full
    // system, keeping whichever solution has the smaller residual.
    Eigen::VectorXd lx, ly, lz;
    use_lu_ = true;
    solve_kkt_once(bx, by, bz, lx, ly, lz);
    Eigen::VectorXd fx, fy, fz;
    double lerr = kkt_residual(bx, by, bz, lx, ly, lz, fx, fy, fz);
    for (int pass = 0; pass < 2 && lerr > thresh && std::isfinite(lerr);
         ++pass) {
      Eigen::VectorXd cx, cy, cz;
      solve_kkt_once(fx, fy, fz, cx, cy, cz);
      lx += cx;
      if (lay_.m_eq > 0) ly += cy;
      lz += cz;
      lerr = kkt_residual(bx, by, bz, lx, ly, lz, fx, fy, fz);
    }
    use_lu_ = false;
    if (std::isfinite(lerr) && lerr < err) {
      dx = lx;
      dy = ly;
      dz = lz;
    }
  }
}

void HsdSolver::compute_residuals() {
  // rx = -A'y - G'z - tau c ; ry = A x - tau b ; rz = s + G x - tau h
  rx_ = -(g_.transpose() * z_) - tau_ * c_;
  if (lay_.m_eq > 0) rx_.noalias() -= a_eq_.transpose() * y_;
  if (lay_.m_eq > 0) {
    ry_ = a_eq_ * x_ - tau_ * b_eq_;
  } else {
    ry_.resize(0);
  }
  rz_ = s_ + g_ * x_ - tau_ * h_;
  cx_ = c_.dot(x_);
  by_ = lay_.m_eq > 0 ? b_eq_.dot(y_) : 0.0;
  hz_ = h_.dot(z_);
  rt_ = kappa_ + cx_ + by_ + hz_;
}

void HsdSolver::update_statistics() {
  gap_ = s_.dot(z_);
  mu_ = (gap_ + kappa_ * tau_) /
        (lay_.m_lp + static_cast<int>(lay_.soc_dims.size()) + 1);
  const double nx = x_.norm();
  const double ny = lay_.m_eq > 0 ? y_.norm() : 0.0;
  const double nz = z_.norm();
  const double ns = s_.norm();
  const double pcost = cx_ / tau_;
  const double dcost = -(hz_ + by_) / tau_;
  if (pcost < 0.0) {
    relgap_ = gap_ / (tau_ * tau_) / (-pcost);
  } else if (dcost > 0.0) {
    relgap_ = gap_ / (tau_ * tau_) / dcost;
  } else {
    relgap_ = std::numeric_limits<double>::infinity();
  }
  const double nry =
      lay_.m_eq > 0 ? ry_.norm() / std::max(resy0_ + nx, 1.0) : 0.0;
  const double nrz = rz_.norm() / std::max(resz0_ + nx + ns, 1.0);
  pres_ = std::max(nry, nrz) / tau_;
  dres_ = rx_.norm() / std::max(resx0_ + ny + nz, 1.0) / tau_;

  pinfres_ = std::numeric_limits<double>::infinity();
  dinfres_ = std::numeric_limits<double>::infinity();
  Eigen::VectorXd hrx = -(g_.transpose() * z_);
  if (lay_.m_eq > 0) hrx.noalias() -= a_eq_.transpose() * y_;
  if (hz_ + by_ < -set_.tol * std::max(ny + nz, 1.0)) {
    pinfres_ = hrx.norm() / std::max(ny + nz, 1.0);
  }
  if (cx_ < -set_.tol * std::max(nx, 1.0)) {
    const double hresy = lay_.m_eq > 0 ? (a_eq_ * x_).norm() : 0.0;
    const double hresz = (s_ + g_ * x_).norm();
    dinfres_ = std::max(hresy / std::max(nx, 1.0),
                        hresz / std::max(nx + ns, 1.0));
  }
}

ConicSolution HsdSolver::extract(SolveStatus status) const {
  ConicSolution sol;
  sol.status = status;
  const int m = p_.num_rows();
  sol.x = Eigen::VectorXd::Zero(lay_.n);
  sol.y = Eigen::VectorXd::Zero(m);
  sol.slack = Eigen::VectorXd::Zero(m);

  double scale = 1.0;
  if (status == SolveStatus::kOptimal || status == SolveStatus::kMaxIters) {
    scale = 1.0 / tau_;
  } else if (status == SolveStatus::kInfeasible) {
    const double q = -(by_ + hz_);
    scale = q > 0.0 ? 1.0 / q : 1.0;
  } else if (status == SolveStatus::kUnbounded) {
    scale = cx_ < 0.0 ? 1.0 / (-cx_) : 1.0;
  }
  sol.x = x_ * scale;
  for (int i = 0; i < lay_.m_eq; ++i) {
    sol.y(lay_.eq_rows[i]) = y_(i) * scale / row_scale_eq_(i);
  }
  for (int i = 0; i < lay_.m_in; ++i) {
    sol.y(lay_.in_rows[i]) = z_(i) * scale / row_scale_in_(i);
    sol.slack(lay_.in_rows[i]) = s_(i) * scale * row_scale_in_(i);
  }
  sol.objective = p_.c.dot(sol.x);

  // Certified residuals on the original data.
  const Eigen::VectorXd prim = p_.b - p_.a * sol.x - sol.slack;
  sol.primal_residual = prim.norm() / (1.0 + p_.b.norm());
  const Eigen::VectorXd dual = p_.a.transpose() * sol.y + p_.c;
  sol.dual_residual = dual.norm() / (1.0 + p_.c.norm());
  const double pobj = sol.objective;
  const double dobj = -p_.b.dot(sol.y);
  sol.duality_gap =
      std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return sol;
}

ConicSolution HsdSolver::solve() {
  const int n = lay_.n;
  x_ = Eigen::VectorXd::Zero(n);
  y_ = Eigen::VectorXd::Zero(lay_.m_eq);
  z_ = Eigen::VectorXd::Zero(lay_.m_in);
  s_ = Eigen::VectorXd::Zero(lay_.m_in);
  lambda_ = Eigen::VectorXd::Zero(lay_.m_in);

  resx0_ = std::max(1.0, c_.norm());
  resy0_ = std::max(1.0, b_eq_.norm());
  resz0_ = std::max(1.0, h_.norm());

  // Identity scaling for the initial point.
  scal_.lp_w2 = Eigen::VectorXd::Ones(lay_.m_lp);
  scal_.socs.clear();
  for (int dim : lay_.soc_dims) {
    Scaling::Soc soc;
    soc.eta2 = 1.0;
    soc.wbar = Eigen::VectorXd::Zero(dim);
    soc.wbar(0) = 1.0;
    scal_.socs.push_back(std::move(soc));
  }
  if (!factor_kkt()) return extract(SolveStatus::kMaxIters);

  // Primal init: argmin ||Gx - h|| s.t. Ax = b, slack brought into the cone.
  Eigen::VectorXd dx, dy, dz;
  solve_kkt(Eigen::VectorXd::Zero(n), b_eq_, h_, dx, dy, dz);
  x_ = dx;
  bring_to_cone(-dz, s_);
  // Dual init: least-norm multipliers brought into the cone.
  solve_kkt(-c_, Eigen::VectorXd::Zero(lay_.m_eq),
            Eigen::VectorXd::Zero(lay_.m_in), dx, dy, dz);
  y_ = dy;
  bring_to_cone(dz, z_);
  tau_ = 1.0;
  kappa_ = 1.0;

  ConicSolution best;
  double best_metric = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < set_.max_iters; ++iter) {
    compute_residuals();
    update_statistics();

    const double metric = std::max({pres_, dres_, relgap_});
    if (metric < best_metric && tau_ > 1e-10) {
      best_metric = metric;
      best = extract(SolveStatus::kMaxIters);
      best.iterations = iter;
    }

    if (pres_ <= set_.tol && dres_ <= set_.tol &&
        (gap_ / (tau_ * tau_) <= set_.tol || relgap_ <= set_.tol)) {
      ConicSolution sol = extract(SolveStatus::kOptimal);
      sol.iterations = iter;
      if (std::max({sol.primal_residual, sol.dual_residual,
                    sol.duality_gap}) <= set_.tol) {
        return sol;
      }
      // Internal measures converged but the certified residuals have not;
      // keep iterating.
      if (iter + 1 >= set_.max_iters) break;
    }
    if (pinfres_ <= set_.tol && tau_ < kappa_) {
      ConicSolution sol = extract(SolveStatus::kInfeasible);
      sol.iterations = iter;
      return sol;
    }
    if (dinfres_ <= set_.tol && tau_ < kappa_) {
      ConicSolution sol = extract(SolveStatus::kUnbounded);
      sol.iterations = iter;
      return sol;
    }

    if (!update_scaling()) break;
    if (!factor_kkt()) break;

    const auto eq_dot = [this](const Eigen::VectorXd& v) {
      return lay_.m_eq > 0 ? b_eq_.dot(v) : 0.0;
    };

    // Constant part shared by both directions.
    Eigen::VectorXd dx1, dy1, dz1;
    solve_kkt(-c_, b_eq_, h_, dx1, dy1, dz1);
    const double dtau_denom =
        kappa_ / tau_ - c_.dot(dx1) - eq_dot(dy1) - h_.dot(dz1);

    // Affine (predictor) direction.
    Eigen::VectorXd dx2, dy2, dz2;
    {
      const Eigen::VectorXd bx = rx_;
      const Eigen::VectorXd by = -ry_;
      const Eigen::VectorXd bz = s_ - rz_;
      solve_kkt(bx, by, bz, dx2, dy2, dz2);
    }
    const double dtau_aff =
        (rt_ - kappa_ + c_.dot(dx2) + eq_dot(dy2) + h_.dot(dz2)) / dtau_denom;
    Eigen::VectorXd dz_aff = dz2 + dtau_aff * dz1;
    Eigen::VectorXd w_dz_aff;
    apply_w(dz_aff, w_dz_aff);
    Eigen::VectorXd ds_by_w_aff = -w_dz_aff - lambda_;
    const double dkap_aff = -kappa_ - (kappa_ / tau_) * dtau_aff;
    const double alpha_aff =
        line_search(ds_by_w_aff, w_dz_aff, dtau_aff, dkap_aff);

    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::clamp(sigma, kSigmaMin, kSigmaMax);

    // Combined (corrector) direction.
    Eigen::VectorXd ds_comb, mehrotra;
    cone_product(lambda_, lambda_, ds_comb);
    cone_product(ds_by_w_aff, w_dz_aff, mehrotra);
    ds_comb += mehrotra;
    const double sigma_mu = sigma * mu_;
    ds_comb.head(lay_.m_lp).array() -= sigma_mu;
    for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k) {
      ds_comb(soc_offset(static_cast<int>(k))) -= sigma_mu;
    }
    Eigen::VectorXd lam_div;
    cone_divide(lambda_, ds_comb, lam_div);
    Eigen::VectorXd w_lam_div;
    apply_w(lam_div, w_lam_div);
    const double one_minus_sigma = 1.0 - sigma;
    {
      const Eigen::VectorXd bx = one_minus_sigma * rx_;
      const Eigen::VectorXd by = -one_minus_sigma * ry_;
      const Eigen::VectorXd bz = -one_minus_sigma * rz_ + w_lam_div;
      solve_kkt(bx, by, bz, dx2, dy2, dz2);
    }
    const double bkap = kappa_ * tau_ + dkap_aff * dtau_aff - sigma_mu;
    const double dtau = (one_minus_sigma * rt_ - bkap / tau_ + c_.dot(dx2) +
                         eq_dot(dy2) + h_.dot(dz2)) /
                        dtau_denom;
    dx2 += dtau * dx1;
    if (lay_.m_eq > 0) dy2 += dtau * dy1;
    dz2 += dtau * dz1;
    Eigen::VectorXd w_dz;
    apply_w(dz2, w_dz);
    Eigen::VectorXd ds_by_w = -(lam_div + w_dz);
    const double dkap = -(bkap + kappa_ * dtau) / tau_;

    double alpha = kStepScale * line_search(ds_by_w, w_dz, dtau, dkap);
#ifdef FAIRBEAM_CONIC_TRACE
    std::fprintf(stderr,
                 "it=%d pres=%.2e dres=%.2e gap=%.2e tau=%.2e kap=%.2e "
                 "sigma=%.2e alpha=%.2e lu=%d\n",
                 iter, pres_, dres_, gap_ / (tau_ * tau_), tau_, kappa_, sigma,
                 alpha, use_lu_ ? 1 : 0);
#endif
    if (!std::isfinite(alpha) || alpha < 1e-8) break;

    Eigen::VectorXd ds;
    apply_w(ds_by_w, ds);
    x_ += alpha * dx2;
    if (lay_.m_eq > 0) y_ += alpha * dy2;
    z_ += alpha * dz2;
    s_ += alpha * ds;
    tau_ += alpha * dtau;
    kappa_ += alpha * dkap;
    if (tau_ <= 0.0 || kappa_ <= 0.0 || !std::isfinite(tau_)) break;
  }

  // The loop ended early or ran out of iterations; the best iterate may
  // still certify against the original data.
  best.iterations = iter;
  if (best.x.size() == lay_.n &&
      std::max({best.primal_residual, best.dual_residual, best.duality_gap}) <=
          set_.tol) {
    best.status = SolveStatus::kOptimal;
  }
  return best;
}

}  // namespace

void ConicProblem::validate() const {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw std::invalid_argument("conic problem dimensions are inconsistent");
  }
  if (!a.allFinite() || !b.allFinite() || !c.allFinite()) {
    throw std::invalid_argument("conic problem data must be finite");
  }
  int total = 0;
  for (const ConeSpec& cone : cones) {
    if (cone.dim <= 0) throw std::invalid_argument("cone with nonpositive dim");
    if (cone.kind == ConeKind::kSoc && cone.dim < 2) {
      throw std::invalid_argument("second-order cone needs dim >= 2");
    }
    total += cone.dim;
  }
  if (total != num_rows()) {
    throw std::invalid_argument("cone dims do not partition the rows");
  }
}

ConicSolution solve_socp(const ConicProblem& problem,
                         const SolverSettings& settings) {
  problem.validate();
  if (!(settings.tol > 0.0 && settings.tol <= 1e-2)) {
    throw std::invalid_argument("solver tolerance must be in (0, 1e-2]");
  }
  HsdSolver solver(problem, settings);
  return solver.solve();
}

ConicSolution solve_socp(const ConicProblem& problem, double tol) {
  SolverSettings settings;
  settings.tol = tol;
  return solve_socp(problem, settings);
}

void dump_problem(const ConicProblem& problem, std::ostream& os) {
  os << "%%conic-problem vars " << problem.num_vars() << " rows "
     << problem.num_rows() << "\n";
  os << "cones";
  for (const ConeSpec& cone : problem.cones) {
    switch (cone.kind) {
      case ConeKind::kZero: os << " zero:" << cone.dim; break;
      case ConeKind::kNonneg: os << " nonneg:" << cone.dim; break;
      case ConeKind::kSoc: os << " soc:" << cone.dim; break;
    }
  }
  os << "\n";
  char buf[64];
  for (int j = 0; j < problem.num_vars(); ++j) {
    std::snprintf(buf, sizeof(buf), "c %d %.17g\n", j, problem.c(j));
    os << buf;
  }
  for (int i = 0; i < problem.num_rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "b %d %.17g\n", i, problem.b(i));
    os << buf;
  }
  for (int i = 0; i < problem.num_rows(); ++i) {
    for (int j = 0; j < problem.num_vars(); ++j) {
      if (problem.a(i, j) != 0.0) {
        std::snprintf(buf, sizeof(buf), "a %d %d %.17g\n", i, j,
                      problem.a(i, j));
        os << buf;
      }
    }
  }
}

}  // namespace fairbeam
