#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "creditband/experiment_config.hpp"
#include "creditband/forecast.hpp"
#include "creditband/metrics.hpp"
#include "creditband/optimizer.hpp"
#include "creditband/trace.hpp"
#include "creditband/utility.hpp"

namespace creditband {

/// Per-gateway utility models over the whole horizon. gamma_it is the
/// diurnal base for the slot times a per-gateway, per-day lognormal factor
/// with unit mean, scaled by the gateway's device count over four; app
/// probabilities average the device profiles weighted by device counts.
std::vector<UtilityModel> generate_models(const ExperimentConfig& config,
                                          const AppProfiles& profiles);

/// One scenario set per gateway, built from the configured scenario list.
std::vector<ScenarioSet> build_scenario_sets(const ExperimentConfig& config,
                                             const std::vector<UtilityModel>& models,
                                             const AppProfiles& profiles);

/// Second-tier offered rates [period][gateway], uniform on the configured
/// range, drawn from their own seeded stream.
std::vector<std::vector<double>> draw_second_tier(const ExperimentConfig& config);

/// Fills second_tier, scaling the offered rates down when first plus second
/// tier would exceed the link capacity.
void apply_second_tier(AllocationTrace& trace, const std::vector<std::vector<double>>& offered);

struct SolverSummary {
  int iterations = 0;
  double stationarity = 0.0;
  double complementarity = 0.0;
};

struct ExperimentResult {
  AllocationTrace trace;
  AllocationTrace equal_trace;
  std::optional<AllocationTrace> optimal_trace;
  MetricsReport metrics;
  std::optional<SolverSummary> solver;
};

/// Runs the configured mode (global_optimal, online or equal_share) over the
/// full horizon along with the equal-share baseline. Online runs also solve
/// the global problem to measure recovery after the learning days.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace creditband
