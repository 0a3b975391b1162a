#include "creditband/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "creditband/errors.hpp"
#include "creditband/online.hpp"

namespace creditband {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kGammaStream = 1;
constexpr std::uint32_t kSecondTierStream = 2;

int device_total(const DeviceCounts& counts) {
  int total = 0;
  for (int c : counts) total += c;
  return total;
}

}  // namespace

std::vector<UtilityModel> generate_models(const ExperimentConfig& config,
                                          const AppProfiles& profiles) {
  config.validate();
  if (profiles.slots() != config.slots_per_day) {
    throw ConfigError("profiles cover " + std::to_string(profiles.slots()) +
                      " slots but slots_per_day is " + std::to_string(config.slots_per_day));
  }
  auto rng = stream(config.seed, kGammaStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = config.gamma_noise_sigma;
  const std::size_t S = config.slots_per_day;

  std::vector<UtilityModel> models;
  for (std::size_t i = 0; i < config.ledger.n; ++i) {
    const DeviceCounts& counts = config.device_mix[i];
    const int total = device_total(counts);
    std::vector<AppMix> slot_mix(S, AppMix{});
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t d = 0; d < kDeviceTypes; ++d) {
        for (std::size_t k = 0; k < kAppCount; ++k) {
          slot_mix[s][k] += counts[d] * profiles.devices[d][s][k] / total;
        }
      }
    }
    std::vector<double> gamma;
    std::vector<AppMix> probs;
    for (std::size_t day = 0; day < config.days; ++day) {
      const double noise = std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
      for (std::size_t s = 0; s < S; ++s) {
        gamma.push_back(profiles.gamma_base[s] * noise * total / 4.0);
        probs.push_back(slot_mix[s]);
      }
    }
    models.emplace_back(std::move(gamma), std::move(probs));
  }
  return models;
}

std::vector<ScenarioSet> build_scenario_sets(const ExperimentConfig& config,
                                             const std::vector<UtilityModel>& models,
                                             const AppProfiles& profiles) {
  std::vector<double> base;
  for (std::size_t day = 0; day < config.days; ++day) {
    base.insert(base.end(), profiles.gamma_base.begin(), profiles.gamma_base.end());
  }
  std::vector<ScenarioSet> sets;
  for (const auto& own : models) {
    std::vector<Scenario> list;
    const std::vector<double> own_gamma(own.gammas().begin(), own.gammas().end());
    for (const auto& sc : config.scenarios) {
      const std::vector<double>& gamma = sc.gamma == "own" ? own_gamma : base;
      std::vector<AppMix> probs(gamma.size(), sc.app_mix);
      list.push_back({sc.id, UtilityModel(gamma, std::move(probs), own.params()), sc.prior});
    }
    sets.emplace_back(std::move(list), config.slots_per_day);
  }
  return sets;
}

std::vector<std::vector<double>> draw_second_tier(const ExperimentConfig& config) {
  auto rng = stream(config.seed, kSecondTierStream);
  std::uniform_real_distribution<double> uniform(config.second_tier.low_mbps,
                                                 config.second_tier.high_mbps);
  std::vector<std::vector<double>> out(config.horizon(), std::vector<double>(config.ledger.n));
  for (auto& row : out) {
    for (double& v : row) v = config.second_tier.high_mbps > config.second_tier.low_mbps
                                  ? uniform(rng)
                                  : config.second_tier.low_mbps;
  }
  return out;
}

void apply_second_tier(AllocationTrace& trace, const std::vector<std::vector<double>>& offered) {
  const double capacity = trace.ledger.capacity_mbps;
  for (auto& rec : trace.periods) {
    const auto& want = offered.at(rec.period);
    double first = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < rec.first_tier.size(); ++i) {
      first += rec.first_tier[i];
      second += want.at(i);
    }
    const double spare = std::max(0.0, capacity - first);
    const double scale = second > spare ? spare / second : 1.0;
    for (std::size_t i = 0; i < rec.first_tier.size(); ++i) rec.second_tier[i] = want[i] * scale;
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.mode == Mode::RateLimit) {
    throw ConfigError("run_experiment handles allocation modes; ratelimit runs separately");
  }
  const AppProfiles profiles = load_app_profiles(config);
  const std::vector<UtilityModel> models = generate_models(config, profiles);
  const auto second_tier = draw_second_tier(config);
  const std::size_t horizon = config.horizon();

  ExperimentResult result;
  result.equal_trace = equal_share(config.ledger, models, horizon);
  apply_second_tier(result.equal_trace, second_tier);

  auto solve_optimal = [&]() {
    HorizonProblem problem;
    problem.start = 0;
    problem.horizon = horizon;
    problem.models = models;
    problem.budgets = CreditLedger::uniform(config.ledger).budgets;
    problem.cap = config.ledger.cap;
    problem.rate_per_credit = config.ledger.rate_per_credit();
    const GlobalSolution sol = solve_global(problem);
    result.solver = SolverSummary{sol.plan.iterations, sol.certificate.stationarity_residual,
                                  sol.certificate.complementarity_residual};
    AllocationTrace trace = record_spends(config.ledger, models, sol.plan.spends, "global_optimal");
    trace.slots_per_day = config.slots_per_day;
    apply_second_tier(trace, second_tier);
    return trace;
  };

  switch (config.mode) {
    case Mode::EqualShare:
      result.trace = result.equal_trace;
      break;
    case Mode::GlobalOptimal:
      result.trace = solve_optimal();
      break;
    case Mode::Online: {
      OnlineSimulator sim(config.ledger, models, build_scenario_sets(config, models, profiles),
                          OnlineOptions{config.window});
      result.trace = sim.run();
      apply_second_tier(result.trace, second_tier);
      result.optimal_trace = solve_optimal();
      break;
    }
    case Mode::RateLimit:
      break;
  }
  result.trace.slots_per_day = config.slots_per_day;
  result.equal_trace.slots_per_day = config.slots_per_day;

  std::vector<std::size_t> representative;
  for (std::size_t g : config.representative) representative.push_back(g - 1);
  result.metrics = compute_metrics(result.trace, result.equal_trace, representative);
  if (result.optimal_trace) {
    const std::size_t first = config.learning_days * config.slots_per_day;
    result.metrics.optimal_utility = result.optimal_trace->total_utility();
    result.metrics.recovery_first = first;
    result.metrics.recovery_last = horizon;
    const double opt = result.optimal_trace->total_utility(first, horizon);
    if (opt > 0.0) result.metrics.recovery = result.trace.total_utility(first, horizon) / opt;
  }
  return result;
}

}  // namespace creditband
