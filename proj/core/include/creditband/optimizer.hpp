#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "creditband/errors.hpp"
#include "creditband/utility.hpp"

namespace creditband {

/// Spending problem over periods [start, start + horizon). Global form: one
/// model and one budget per gateway. Per-gateway form: a single model and
/// budget plus the expected inflow for each horizon period.
struct HorizonProblem {
  std::size_t start = 0;
  std::size_t horizon = 1;
  std::vector<UtilityModel> models;
  std::vector<double> budgets;
  double cap = std::numeric_limits<double>::infinity();
  double rate_per_credit = 1.0;
  std::vector<double> inflow_forecast;
};

/// Spends in credits, spends[i][t] for horizon period t. Rates follow from
/// rate_per_credit.
struct RatePlan {
  std::vector<std::vector<double>> spends;
  double rate_per_credit = 1.0;
  double objective = 0.0;
  int iterations = 0;

  std::size_t gateways() const { return spends.size(); }
  std::size_t horizon() const { return spends.empty() ? 0 : spends.front().size(); }
  double rate(std::size_t i, std::size_t t) const { return spends.at(i).at(t) * rate_per_credit; }
};

struct KktCertificate {
  std::vector<std::vector<double>> lambda;  // spend <= budget
  std::vector<std::vector<double>> kappa;   // next budget <= cap (zero where absent)
  std::vector<std::vector<double>> nu;      // spend >= 0
  double stationarity_residual = 0.0;       // scaled by the largest marginal
  double complementarity_residual = 0.0;    // same scaling
  double primal_residual = 0.0;
};

struct GlobalSolution {
  RatePlan plan;
  KktCertificate certificate;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, RatePlan best)
      : Error(ErrorCode::NoConvergence, message), best_(std::move(best)) {}
  const RatePlan& best() const { return best_; }

 private:
  RatePlan best_;
};

/// Maximizes total utility of all gateways under the cumulative budget and
/// expected-cap constraints.
GlobalSolution solve_global(const HorizonProblem& problem);

/// Maximizes one gateway's utility given its expected inflows. Throws
/// Error(Infeasible) when a single period's forecast inflow exceeds the cap.
RatePlan solve_gateway(const HorizonProblem& problem);

/// Total utility of a plan under the problem's models.
double plan_utility(const HorizonProblem& problem, const RatePlan& plan);
double gateway_utility(const HorizonProblem& problem, const RatePlan& plan, std::size_t gateway);

struct PrioritySplit {
  std::array<double, kAppCount> mu{};
};

/// Splits x_total Mbps among the apps to maximize the unweighted sum of their
/// utilities. Throws Error(ZeroBandwidth) for x_total <= 0.
PrioritySplit solve_priorities(const AppParams& params, double x_total);

struct NashReport {
  std::vector<double> plan_utility;      // per gateway
  std::vector<double> deviation_gain;    // best response minus plan utility
  std::vector<double> relative_gain;
  std::vector<bool> solved;              // best-response solve reached tolerance
  double max_relative_gain = 0.0;

  bool passed(double tolerance = 1e-4) const { return max_relative_gain <= tolerance; }
};

/// Each gateway re-optimizes its own spends with the others' spends fixed,
/// keeping every gateway's budget and cap constraints.
NashReport verify_nash(const RatePlan& plan, const HorizonProblem& problem);

}  // namespace creditband
