#include "creditband/online.hpp"

#include <algorithm>
#include <string>

#include "creditband/errors.hpp"
#include "creditband/optimizer.hpp"

namespace creditband {

double AllocationTrace::total_utility() const { return total_utility(0, periods.size()); }

double AllocationTrace::total_utility(std::size_t first_period, std::size_t last_period) const {
  double total = 0.0;
  for (const auto& rec : periods) {
    if (rec.period < first_period || rec.period >= last_period) continue;
    for (double u : rec.utility) total += u;
  }
  return total;
}

namespace {

std::array<double, kAppCount> split_for(const UtilityModel& model, double rate) {
  if (rate <= 0.0) {
    std::array<double, kAppCount> uniform;
    uniform.fill(1.0 / static_cast<double>(kAppCount));
    return uniform;
  }
  return solve_priorities(model.params(), rate).mu;
}

PeriodRecord make_record(const LedgerConfig& config, const std::vector<UtilityModel>& models,
                         const CreditLedger& ledger, const std::vector<double>& spends) {
  const std::size_t n = models.size();
  PeriodRecord rec;
  rec.period = ledger.period;
  rec.budgets = ledger.budgets;
  rec.spends = spends;
  rec.second_tier.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = spends[i] * config.rate_per_credit();
    rec.first_tier.push_back(rate);
    rec.utility.push_back(eval_composite(models[i], ledger.period, rate));
    rec.priorities.push_back(split_for(models[i], rate));
  }
  return rec;
}

[[noreturn]] void rethrow_with(const Error& e, const std::string& where) {
  throw Error(e.code(), where + ": " + e.what());
}

}  // namespace

OnlineSimulator::OnlineSimulator(LedgerConfig config, std::vector<UtilityModel> models,
                                 std::vector<ScenarioSet> scenarios, OnlineOptions options)
    : config_(config),
      models_(std::move(models)),
      scenarios_(std::move(scenarios)),
      options_(options),
      horizon_(0),
      ledger_(CreditLedger::uniform(config)) {
  config_.validate();
  if (models_.size() != config_.n || scenarios_.size() != config_.n) {
    throw Error(ErrorCode::InvalidArgument, "online loop needs one model and scenario set per gateway");
  }
  if (options_.window == 0) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  horizon_ = models_.front().horizon();
  for (const auto& m : models_) horizon_ = std::min(horizon_, m.horizon());
  forecasts_.resize(config_.n);
}

PeriodRecord OnlineSimulator::step() {
  if (done()) throw Error(ErrorCode::PeriodOutOfRange, "online loop already finished");
  const std::size_t n = config_.n;
  const std::size_t s = ledger_.period;
  const std::size_t window = std::min(options_.window, horizon_ - s);
  const ForecastContext ctx{n, config_.total(), config_.cap, config_.rate_per_credit()};

  std::vector<double> spends(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "gateway " + std::to_string(i + 1) + ", period " + std::to_string(s);
    try {
      const double budget = ledger_.budgets[i];
      if (s > 0) {
        // Everything that arrived since the last commit, cap reflow included.
        const double observed = budget - (last_budgets_[i] - last_spends_[i]);
        const auto& prev = forecasts_[i];
        std::vector<double> predicted;
        for (const auto& series : prev.per_scenario) predicted.push_back(series.front());
        if (predicted.size() >= 2) {
          scenarios_[i] = bayes_update(scenarios_[i], observed, predicted, s - 1);
        }
      }
      forecasts_[i] = predict_inflows(models_[i], s, budget, scenarios_[i], window, ctx);

      HorizonProblem problem;
      problem.start = s;
      problem.horizon = window;
      problem.models = {models_[i]};
      problem.budgets = {budget};
      problem.cap = config_.cap;
      problem.rate_per_credit = config_.rate_per_credit();
      problem.inflow_forecast = forecasts_[i].expected;
      for (double& e : problem.inflow_forecast) e = std::min(e, config_.cap);
      const RatePlan plan = solve_gateway(problem);
      spends[i] = std::clamp(plan.spends[0][0], 0.0, budget);
    } catch (const Error& e) {
      rethrow_with(e, where);
    }
  }

  PeriodRecord rec = make_record(config_, models_, ledger_, spends);
  last_budgets_ = ledger_.budgets;
  last_spends_ = spends;
  ledger_ = apply_cap(redistribute(ledger_, spends));
  records_.push_back(rec);
  return rec;
}

AllocationTrace OnlineSimulator::run() {
  while (!done()) step();
  AllocationTrace trace;
  trace.mode = "online";
  trace.ledger = config_;
  trace.slots_per_day = scenarios_.front().slots_per_day();
  trace.periods = records_;
  trace.final_budgets = ledger_.budgets;
  return trace;
}

AllocationTrace record_spends(const LedgerConfig& config, const std::vector<UtilityModel>& models,
                              const std::vector<std::vector<double>>& spends,
                              const std::string& mode) {
  config.validate();
  if (models.size() != config.n || spends.size() != config.n) {
    throw Error(ErrorCode::InvalidArgument, "spends do not match the gateway count");
  }
  const std::size_t horizon = spends.front().size();
  AllocationTrace trace;
  trace.mode = mode;
  trace.ledger = config;
  CreditLedger ledger = CreditLedger::uniform(config);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<double> x(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
      x[i] = std::clamp(spends[i].at(t), 0.0, ledger.budgets[i]);
    }
    trace.periods.push_back(make_record(config, models, ledger, x));
    ledger = apply_cap(redistribute(ledger, x));
  }
  trace.final_budgets = ledger.budgets;
  return trace;
}

AllocationTrace equal_share(const LedgerConfig& config, const std::vector<UtilityModel>& models,
                            std::size_t horizon) {
  if (models.size() != config.n) {
    throw Error(ErrorCode::InvalidArgument, "need one model per gateway");
  }
  const double share = config.total() / static_cast<double>(config.n);
  if (config.n >= 2) {
    std::vector<std::vector<double>> spends(config.n, std::vector<double>(horizon, share));
    return record_spends(config, models, spends, "equal_share");
  }
  // A lone gateway keeps the whole link.
  AllocationTrace trace;
  trace.mode = "equal_share";
  trace.ledger = config;
  CreditLedger ledger{config, {share}, 0};
  for (std::size_t t = 0; t < horizon; ++t) {
    ledger.period = t;
    trace.periods.push_back(make_record(config, models, ledger, {share}));
  }
  trace.final_budgets = {share};
  return trace;
}

}  // namespace creditband
