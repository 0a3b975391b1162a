#include "creditband/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "creditband/errors.hpp"

namespace creditband {

void LedgerConfig::validate() const {
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "ledger needs at least two gateways");
  }
  if (!(capacity_mbps > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "capacity and beta must be positive");
  }
  const double b = total();
  const double floor = b / static_cast<double>(n);
  if (cap < floor * (1.0 - 1e-12) || cap > b * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InfeasibleCap,
                "budget cap " + std::to_string(cap) + " outside [B/n, B] = [" +
                    std::to_string(floor) + ", " + std::to_string(b) + "]");
  }
}

CreditLedger CreditLedger::uniform(const LedgerConfig& config) {
  CreditLedger ledger;
  ledger.config = config;
  ledger.budgets.assign(config.n, config.total() / static_cast<double>(config.n));
  return ledger;
}

double CreditLedger::sum() const {
  return std::accumulate(budgets.begin(), budgets.end(), 0.0);
}

CreditLedger redistribute(const CreditLedger& ledger, std::span<const double> spends) {
  const std::size_t n = ledger.budgets.size();
  if (spends.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "spend vector length does not match gateway count");
  }
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "ledger needs at least two gateways");
  }
  // Spends within kSpendSlack above the budget are clamped to it.
  std::vector<double> paid(n);
  double spent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (spends[i] < 0.0) {
      throw GatewayError(ErrorCode::NegativeSpend, i,
                         "gateway " + std::to_string(i) + " has negative spend");
    }
    if (spends[i] > ledger.budgets[i] + kSpendSlack) {
      throw GatewayError(ErrorCode::SpendExceedsBudget, i,
                         "gateway " + std::to_string(i) + " spends " +
                             std::to_string(spends[i]) + " with budget " +
                             std::to_string(ledger.budgets[i]));
    }
    paid[i] = std::min(spends[i], ledger.budgets[i]);
    spent += paid[i];
  }

  CreditLedger next = ledger;
  const double share = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    next.budgets[i] = (ledger.budgets[i] - paid[i]) + (spent - paid[i]) * share;
  }
  ++next.period;
  return next;
}

CapResult apply_cap_traced(const CreditLedger& ledger) {
  const std::size_t n = ledger.budgets.size();
  const double cap = ledger.config.cap;
  const double total = ledger.sum();
  const double fair = total / static_cast<double>(n);
  if (cap < fair * (1.0 - 1e-12)) {
    throw Error(ErrorCode::InfeasibleCap, "budget cap below B/n");
  }

  CapResult result{ledger, 0};
  auto& b = result.ledger.budgets;
  for (;;) {
    double excess = 0.0;
    for (double& v : b) {
      if (v > cap) {
        excess += v - cap;
        v = cap;
      }
    }
    if (excess <= 0.0) break;
    ++result.iterations;

    std::size_t below = 0;
    for (double v : b) below += v < cap ? 1 : 0;
    if (below == 0) {
      // Only reachable when cap == B/n.
      b.assign(n, fair);
      break;
    }
    const double share = excess / static_cast<double>(below);
    for (double& v : b) {
      if (v < cap) v += share;
    }
  }
  return result;
}

CreditLedger apply_cap(const CreditLedger& ledger) { return apply_cap_traced(ledger).ledger; }

namespace {

double contraction(std::size_t n) {
  return static_cast<double>(n - 2) / static_cast<double>(n - 1);
}

void check_hoarding_args(std::size_t n, double total, double epsilon, std::size_t p) {
  if (n < 3) {
    throw Error(ErrorCode::DegenerateN, "hoarding bound needs n >= 3");
  }
  if (!(epsilon >= 0.0) || epsilon >= total / static_cast<double>(n)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0, B/n)");
  }
  if (p < 1) {
    throw Error(ErrorCode::InvalidArgument, "spending interval p must be at least 1");
  }
}

}  // namespace

double hoarding_bound(std::size_t n, double total, double epsilon, std::size_t p,
                      std::size_t t) {
  check_hoarding_args(n, total, epsilon, p);
  const double a = contraction(n);
  const double decay = std::pow(a, static_cast<double>(t + 1));
  const double ap = std::pow(a, static_cast<double>(p));
  const double windows = static_cast<double>((t + 1) / p);
  const double spent = ap >= 1.0 ? 0.0
                                 : (ap - std::pow(a, static_cast<double>(p) * (1.0 + windows))) /
                                       (1.0 - ap);
  return total / static_cast<double>(n) * decay + total * (1.0 - decay) - epsilon * spent;
}

double hoarding_bound_limit(std::size_t n, double total, double epsilon, std::size_t p) {
  check_hoarding_args(n, total, epsilon, p);
  const double num = std::pow(static_cast<double>(n - 2), static_cast<double>(p));
  const double den = std::pow(static_cast<double>(n - 1), static_cast<double>(p)) - num;
  return total - epsilon * num / den;
}

double inactive_accumulation_bound(std::size_t n, double total, std::size_t s,
                                   std::span<const double> initial_inactive_budgets) {
  const std::size_t m = initial_inactive_budgets.size();
  if (n < 2 || m < 1 || m >= n) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= m < n inactive gateways");
  }
  const double held =
      std::accumulate(initial_inactive_budgets.begin(), initial_inactive_budgets.end(), 0.0);
  const double a = contraction(n);
  return (1.0 - std::pow(a, static_cast<double>(s))) * (total - held);
}

std::string to_json(const CreditLedger& ledger) {
  nlohmann::json j;
  j["n"] = ledger.config.n;
  j["B"] = ledger.config.total();
  j["cap"] = ledger.config.cap;
  j["capacity"] = ledger.config.capacity_mbps;
  j["beta"] = ledger.config.beta;
  j["budgets"] = ledger.budgets;
  j["period"] = ledger.period;
  return j.dump();
}

CreditLedger ledger_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CreditLedger ledger;
  ledger.config.n = j.at("n").get<std::size_t>();
  ledger.config.cap = j.at("cap").get<double>();
  const double total = j.at("B").get<double>();
  ledger.config.beta = j.value("beta", 1.0);
  ledger.config.capacity_mbps = j.value("capacity", total / ledger.config.beta);
  ledger.budgets = j.at("budgets").get<std::vector<double>>();
  ledger.period = j.at("period").get<std::size_t>();
  if (ledger.budgets.size() != ledger.config.n) {
    throw Error(ErrorCode::InvalidArgument, "ledger JSON budget count does not match n");
  }
  return ledger;
}

}  // namespace creditband
