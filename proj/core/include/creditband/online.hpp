#pragma once

#include <cstddef>
#include <vector>

#include "creditband/forecast.hpp"
#include "creditband/ledger.hpp"
#include "creditband/trace.hpp"
#include "creditband/utility.hpp"

namespace creditband {

struct OnlineOptions {
  std::size_t window = 12;
};

/// Sliding-window control loop run by every gateway. Each period a gateway
/// updates its scenario posterior from the inflow it observed, forecasts
/// inflows, plans its own spending over the window and commits only the
/// first period. The ledger then redistributes and enforces the cap.
class OnlineSimulator {
 public:
  OnlineSimulator(LedgerConfig config, std::vector<UtilityModel> models,
                  std::vector<ScenarioSet> scenarios, OnlineOptions options = {});

  std::size_t period() const { return ledger_.period; }
  std::size_t horizon() const { return horizon_; }
  bool done() const { return ledger_.period >= horizon_; }
  const CreditLedger& ledger() const { return ledger_; }
  const ScenarioSet& scenarios(std::size_t gateway) const { return scenarios_.at(gateway); }
  const InflowForecast& last_forecast(std::size_t gateway) const { return forecasts_.at(gateway); }

  /// Advances one period and returns its record (second tier left at zero).
  PeriodRecord step();

  AllocationTrace run();

 private:
  LedgerConfig config_;
  std::vector<UtilityModel> models_;
  std::vector<ScenarioSet> scenarios_;
  OnlineOptions options_;
  std::size_t horizon_;
  CreditLedger ledger_;
  std::vector<double> last_budgets_;
  std::vector<double> last_spends_;
  std::vector<InflowForecast> forecasts_;
  std::vector<PeriodRecord> records_;
};

/// Pushes fixed spends[i][t] through the ledger (clamped to the budget held)
/// and records the resulting trace with utilities and priority splits.
AllocationTrace record_spends(const LedgerConfig& config, const std::vector<UtilityModel>& models,
                              const std::vector<std::vector<double>>& spends,
                              const std::string& mode);

/// Every gateway spends B/n credits each period.
AllocationTrace equal_share(const LedgerConfig& config, const std::vector<UtilityModel>& models,
                            std::size_t horizon);

}  // namespace creditband
