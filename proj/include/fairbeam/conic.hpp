// Copyright (c) 2026 fairbeam contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace fairbeam {

enum class ConeKind { kZero, kNonneg, kSoc };

struct ConeSpec {
  ConeKind kind;
  int dim;
};

/// Standard-form cone program
///
///   minimize    c'x
///   subject to  b - A x in K,
///
/// where K is the ordered product of the listed cones and the cone
/// dimensions partition the rows of A. Second-order cones put the radius
/// entry first: (t, u) in soc  <=>  t >= ||u||.
struct ConicProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<ConeSpec> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  /// Throws std::invalid_argument on non-partitioning cones, dimension
  /// mismatches or non-finite data.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIters };

struct ConicSolution {
  SolveStatus status = SolveStatus::kMaxIters;
  Eigen::VectorXd x;      // primal point (certificate ray when unbounded)
  Eigen::VectorXd y;      // dual multipliers per row, in K* (certificate
                          // ray when infeasible)
  Eigen::VectorXd slack;  // b - A x as certified by the solver
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

struct SolverSettings {
  double tol = 1e-7;
  int max_iters = 100;
  bool equilibrate = true;
};

/// Dense primal-dual interior-point solve of the homogeneous self-dual
/// embedding, Nesterov-Todd scaled with a Mehrotra predictor-corrector.
/// Residuals in the solution are measured against the original
/// (unequilibrated) data; kOptimal guarantees all of them <= tol.
/// Numerical breakdown degrades to kMaxIters with the best iterate found,
/// never an exception.
ConicSolution solve_socp(const ConicProblem& problem,
                         const SolverSettings& settings);
ConicSolution solve_socp(const ConicProblem& problem, double tol);

/// Plain-text dump (matrix-market-style triplets) for external cross-checks.
void dump_problem(const ConicProblem& problem, std::ostream& os);

}  // namespace fairbeam
