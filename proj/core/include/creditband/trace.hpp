#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "creditband/ledger.hpp"
#include "creditband/utility.hpp"

namespace creditband {

/// Everything recorded for one period. Budgets are those held at the start
/// of the period, before spending.
struct PeriodRecord {
  std::size_t period = 0;
  std::vector<double> budgets;
  std::vector<double> spends;       // credits
  std::vector<double> first_tier;   // Mbps bought with credits
  std::vector<double> second_tier;  // Mbps, after clipping at capacity
  std::vector<double> utility;      // per gateway
  std::vector<std::array<double, kAppCount>> priorities;
};

struct AllocationTrace {
  std::string mode;
  LedgerConfig ledger;
  std::size_t slots_per_day = 12;
  std::vector<PeriodRecord> periods;
  std::vector<double> final_budgets;

  std::size_t gateways() const { return ledger.n; }
  double total_utility() const;
  double total_utility(std::size_t first_period, std::size_t last_period) const;
};

}  // namespace creditband
