#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "creditband/utility.hpp"

namespace creditband {

/// A hypothesis about "everyone else", treated as one aggregated gateway made
/// of n - 1 identical members.
struct Scenario {
  std::string id;
  UtilityModel model;  // per-member gamma and app probabilities
  double prior = 0.0;
};

/// Scenarios plus one posterior per daily slot; period t uses slot
/// t % slots_per_day.
class ScenarioSet {
 public:
  ScenarioSet(std::vector<Scenario> scenarios, std::size_t slots_per_day);

  std::size_t size() const { return scenarios_.size(); }
  std::size_t slots_per_day() const { return slots_per_day_; }
  const Scenario& scenario(std::size_t s) const { return scenarios_.at(s); }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }

  std::span<const double> posterior(std::size_t period) const;
  void set_posterior(std::size_t period, std::vector<double> probs);

 private:
  std::vector<Scenario> scenarios_;
  std::size_t slots_per_day_;
  std::vector<std::vector<double>> posteriors_;
};

struct ForecastContext {
  std::size_t n = 16;
  double total = 160.0;
  double cap = 32.0;
  double rate_per_credit = 0.125;
};

struct InflowForecast {
  std::vector<double> expected;                   // [t]
  std::vector<std::vector<double>> per_scenario;  // [scenario][t]
};

/// For each scenario, solves the two-player welfare problem between the own
/// gateway and the aggregated rest (budget total - own_budget, cap (n-1) *
/// cap) over [start, start + horizon) and records the credits the own gateway
/// receives per period. The expectation uses each period's slot posterior.
InflowForecast predict_inflows(const UtilityModel& own, std::size_t start, double own_budget,
                               const ScenarioSet& scenarios, std::size_t horizon,
                               const ForecastContext& context);

/// P_s = (1 - d_s^2 / sum_l d_l^2) / (|S| - 1), d_s = observed - predicted_s.
/// When every prediction matches exactly the mass is uniform.
std::vector<double> likelihood(double observed, std::span<const double> predicted);

/// Multiplies the slot posterior for `period` by the likelihood and
/// renormalizes; falls back to the likelihood when the product vanishes.
ScenarioSet bayes_update(const ScenarioSet& scenarios, double observed,
                         std::span<const double> predicted, std::size_t period);

/// Four scenarios in which the others use only one app each, with the given
/// gamma profile and a uniform prior.
ScenarioSet single_app_scenarios(std::vector<double> gamma, std::size_t slots_per_day,
                                 const AppParams& params = default_app_params());

}  // namespace creditband
