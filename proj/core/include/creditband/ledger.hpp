#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace creditband {

/// Static parameters of a credit ledger. `total()` is B = beta * C credits,
/// and one Mbps of first-tier rate costs `beta` credits per period.
struct LedgerConfig {
  std::size_t n = 16;
  double capacity_mbps = 20.0;
  double beta = 8.0;
  double cap = 32.0;

  double total() const { return beta * capacity_mbps; }
  double rate_per_credit() const { return 1.0 / beta; }

  // Throws Error(InvalidArgument) for n < 2 or non-positive C / beta, and
  // Error(InfeasibleCap) when cap lies outside [B/n, B].
  void validate() const;
};

/// Budgets held by each gateway at the start of period `period`.
struct CreditLedger {
  LedgerConfig config;
  std::vector<double> budgets;
  std::size_t period = 0;

  /// Uniform start: every gateway holds B/n.
  static CreditLedger uniform(const LedgerConfig& config);

  double sum() const;
};

inline constexpr double kSpendSlack = 1e-12;
inline constexpr double kConservationTolerance = 1e-9;

/// One period of credit circulation: each gateway pays its spend and receives
/// an equal 1/(n-1) share of everyone else's. Advances `period`; no cap.
CreditLedger redistribute(const CreditLedger& ledger, std::span<const double> spends);

struct CapResult {
  CreditLedger ledger;
  std::size_t iterations = 0;
};

/// Moves every above-cap excess in equal shares to the gateways strictly below
/// the cap until no budget exceeds it.
CapResult apply_cap_traced(const CreditLedger& ledger);
CreditLedger apply_cap(const CreditLedger& ledger);

/// Upper bound on the budget of a gateway that spends at least `epsilon`
/// every `p` periods, evaluated at period index `t`.
double hoarding_bound(std::size_t n, double total, double epsilon, std::size_t p,
                      std::size_t t);

/// Limit of hoarding_bound as t grows.
double hoarding_bound_limit(std::size_t n, double total, double epsilon, std::size_t p);

/// Upper bound on the credits accumulated by `m` gateways that stay inactive
/// for `s` periods, given their budgets at the start of the inactive stretch.
double inactive_accumulation_bound(std::size_t n, double total, std::size_t s,
                                   std::span<const double> initial_inactive_budgets);

std::string to_json(const CreditLedger& ledger);
CreditLedger ledger_from_json(const std::string& text);

}  // namespace creditband
