#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "creditband/ledger.hpp"
#include "creditband/optimizer.hpp"
#include "creditband/utility.hpp"

namespace creditband::oracle {

inline AppMix random_mix(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  AppMix mix{};
  double sum = 0.0;
  for (double& p : mix) sum += (p = g(rng));
  for (double& p : mix) p /= sum;
  return mix;
}

inline UtilityModel random_model(std::mt19937_64& rng, std::size_t horizon, double gamma_lo = 0.2,
                                 double gamma_hi = 2.0) {
  std::uniform_real_distribution<double> u(gamma_lo, gamma_hi);
  std::vector<double> gamma(horizon);
  std::vector<AppMix> probs(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    gamma[t] = u(rng);
    probs[t] = random_mix(rng);
  }
  return UtilityModel(gamma, probs);
}

inline UtilityModel constant_model(std::vector<double> gamma, AppMix mix) {
  std::vector<AppMix> probs(gamma.size(), mix);
  return UtilityModel(std::move(gamma), std::move(probs));
}

/// Random budgets summing to `total`, each at most `cap`.
inline std::vector<double> random_budgets(std::mt19937_64& rng, std::size_t n, double total,
                                          double cap) {
  std::gamma_distribution<double> g(2.0, 1.0);
  for (;;) {
    std::vector<double> b(n);
    double sum = 0.0;
    for (double& v : b) sum += (v = g(rng));
    for (double& v : b) v *= total / sum;
    if (*std::max_element(b.begin(), b.end()) <= cap) return b;
  }
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Brute-force optimum of the global spending problem for n <= 3 gateways
/// and at most two periods. Every gateway spends whatever it holds in the
/// last period (utilities are increasing), so only first-period spends are
/// enumerated, at `step` credits.
inline double grid_global_optimum(const HorizonProblem& p, double step = 0.01) {
  const std::size_t n = p.models.size();
  const double rho = p.rate_per_credit;
  auto u = [&](std::size_t i, std::size_t t, double credits) {
    return eval_composite(p.models[i], p.start + t, rho * std::max(0.0, credits));
  };
  if (p.horizon == 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += u(i, 0, p.budgets[i]);
    return total;
  }
  std::vector<std::vector<double>> grid(n);
  std::vector<std::vector<double>> first(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto steps = static_cast<std::size_t>(std::floor(p.budgets[i] / step + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) grid[i].push_back(static_cast<double>(k) * step);
    if (grid[i].back() < p.budgets[i]) grid[i].push_back(p.budgets[i]);
    for (double x : grid[i]) first[i].push_back(u(i, 0, x));
  }
  const double share = 1.0 / static_cast<double>(n - 1);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    double spent = 0.0;
    for (std::size_t i = 0; i < n; ++i) spent += grid[i][idx[i]];
    double value = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const double x = grid[i][idx[i]];
      const double next = p.budgets[i] - x + (spent - x) * share;
      if (next > p.cap + 1e-12) ok = false;
      value += first[i][idx[i]] + u(i, 1, next);
    }
    if (ok) best = std::max(best, value);
    std::size_t k = 0;
    while (k < n && ++idx[k] == grid[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

/// Brute-force optimum of the single-gateway problem over at most two
/// periods with forecast inflows.
inline double grid_gateway_optimum(const HorizonProblem& p, double step = 0.01) {
  const double rho = p.rate_per_credit;
  const UtilityModel& m = p.models.front();
  const double b = p.budgets.front();
  auto u = [&](std::size_t t, double credits) {
    return eval_composite(m, p.start + t, rho * std::max(0.0, credits));
  };
  if (p.horizon == 1) return u(0, b);
  const double e0 = p.inflow_forecast.at(0);
  // The grid starts at the smallest spend that keeps the next budget under
  // the cap, so a binding cap is hit exactly.
  const double lo = std::clamp(b + e0 - p.cap, 0.0, b);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0;; ++k) {
    const double x = std::min(lo + static_cast<double>(k) * step, b);
    const double next = b - x + e0;
    if (next <= p.cap + 1e-12) best = std::max(best, u(0, x) + u(1, next));
    if (x >= b) break;
  }
  return best;
}

/// Random global problem with unit rate per credit; half the instances
/// carry a cap just above the mean budget.
inline HorizonProblem random_global(std::mt19937_64& rng, std::size_t n, std::size_t horizon) {
  HorizonProblem p;
  p.horizon = horizon;
  p.rate_per_credit = 1.0;
  const double total = 0.5 * static_cast<double>(n) +
                       std::uniform_real_distribution<double>(0, 1)(rng) * static_cast<double>(n);
  p.cap = rng() % 2 ? std::numeric_limits<double>::infinity()
                    : total / static_cast<double>(n) * (1.05 + 0.5 * (rng() % 100) / 100.0);
  p.budgets = random_budgets(rng, n, total, std::min(p.cap, total));
  for (std::size_t i = 0; i < n; ++i) p.models.push_back(random_model(rng, horizon));
  return p;
}

// Plays the plan through the uncapped ledger and returns the worst
// violation of spend <= budget, spend >= 0 and expected budget <= cap.
inline double worst_violation(const HorizonProblem& p, const RatePlan& plan) {
  const std::size_t n = plan.gateways();
  CreditLedger l;
  l.config.n = n;
  l.config.beta = 1;
  l.config.capacity_mbps = 1;
  l.config.cap = p.cap;
  l.budgets = p.budgets;
  double worst = 0.0;
  for (std::size_t t = 0; t < plan.horizon(); ++t) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = plan.spends[i][t];
      worst = std::max({worst, -x[i], x[i] - l.budgets[i]});
      x[i] = std::clamp(x[i], 0.0, l.budgets[i]);
    }
    l = redistribute(l, x);
    if (t + 1 < plan.horizon()) {
      for (double b : l.budgets) worst = std::max(worst, b - p.cap);
    }
  }
  return worst;
}

}  // namespace creditband::oracle
