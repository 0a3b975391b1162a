#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <vector>

#include "creditband/utility.hpp"
#include "interior_point.hpp"

namespace creditband::detail {

// Spending program over a horizon of T periods for n budget holders whose
// spends circulate through a column-stochastic matrix R: holder k's budget
// evolves as b_k <- b_k - x_k + sum_l R_kl x_l + e_k, with e an exogenous
// inflow. Decision variables are cumulative spends y_kt stored at t*n + k.
struct CirculationSpec {
  std::size_t n = 0;
  std::size_t horizon = 0;
  Eigen::MatrixXd redistribution;
  std::vector<double> budgets;
  std::vector<double> caps;  // +inf disables the cap rows of a holder
  std::vector<std::vector<double>> exogenous;  // [k][t]; empty means none
  // Utility of holder k spending `credits` in horizon period t.
  std::function<UtilityEval(std::size_t k, std::size_t t, double credits)> utility;
};

enum class RowKind { Budget, Cap, Nonnegative };

struct RowInfo {
  RowKind kind;
  std::size_t holder;
  std::size_t period;
};

struct CirculationProgram {
  SeparableProgram program;
  std::vector<RowInfo> rows;
  std::size_t n = 0;
  std::size_t horizon = 0;
};

// Equal redistribution among n gateways: (J - I) / (n - 1).
Eigen::MatrixXd equal_redistribution(std::size_t n);

CirculationProgram build_circulation(const CirculationSpec& spec);

// Per-period spends [k][t] from cumulative variables, and back.
std::vector<std::vector<double>> spends_from_cumulative(const Eigen::VectorXd& v, std::size_t n,
                                                        std::size_t horizon);
Eigen::VectorXd cumulative_from_spends(const std::vector<std::vector<double>>& spends);

// Uniform small-spend starting point.
Eigen::VectorXd uniform_start(const CirculationSpec& spec);

}  // namespace creditband::detail
