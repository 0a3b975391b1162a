#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>

#include "creditband/utility.hpp"

namespace creditband::detail {

using SparseMatrix = Eigen::SparseMatrix<double>;

// maximize  sum_j f_j((A v)_j)   subject to   G v <= h
// with every f_j concave and twice differentiable on the whole real line.
struct SeparableProgram {
  SparseMatrix A;
  SparseMatrix G;
  Eigen::VectorXd h;
  std::function<UtilityEval(Eigen::Index, double)> term;
};

struct IpmOptions {
  int max_iterations = 200;
  double feasibility_tolerance = 1e-9;
  double gap_tolerance = 1e-11;
  // Accepted when the iteration stalls before reaching the tolerances above.
  double acceptable_tolerance = 1e-7;
  int stall_iterations = 5;
  int max_backtracks = 30;
  // Called once per iteration with the relative primal, dual and gap residuals.
  std::function<void(int, double, double, double)> monitor;
};

struct IpmResult {
  Eigen::VectorXd v;
  Eigen::VectorXd s;  // slacks, h - G v at convergence
  Eigen::VectorXd z;  // multipliers of G v <= h
  double objective = 0.0;
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative to the largest objective slope
  double gap = 0.0;              // mean complementarity, relative
  int iterations = 0;
  bool converged = false;
};

double objective_value(const SeparableProgram& program, const Eigen::VectorXd& v);

// Gradient of the objective in v.
Eigen::VectorXd objective_gradient(const SeparableProgram& program, const Eigen::VectorXd& v);

// Primal-dual interior point with Mehrotra predictor-corrector steps. `v0`
// need not be feasible. Returns the best iterate seen when the iteration
// limit is hit (converged == false).
IpmResult solve_interior_point(const SeparableProgram& program, const Eigen::VectorXd& v0,
                               const IpmOptions& options = {});

}  // namespace creditband::detail
