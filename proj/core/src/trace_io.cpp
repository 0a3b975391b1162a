#include "creditband/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "creditband/errors.hpp"

namespace creditband {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

constexpr double kAuditTolerance = 1e-9;

}  // namespace

const char* library_version() { return CREDITBAND_VERSION; }

std::string trace_to_json(const AllocationTrace& trace) {
  json doc;
  doc["schema"] = kTraceSchema;
  doc["mode"] = trace.mode;
  doc["n"] = trace.ledger.n;
  doc["B"] = trace.ledger.total();
  doc["cap"] = trace.ledger.cap;
  doc["capacity"] = trace.ledger.capacity_mbps;
  doc["beta"] = trace.ledger.beta;
  doc["rate_per_credit"] = trace.ledger.rate_per_credit();
  doc["slots_per_day"] = trace.slots_per_day;
  json periods = json::array();
  for (const auto& rec : trace.periods) {
    json p;
    p["period"] = rec.period;
    p["budgets"] = rec.budgets;
    p["spends"] = rec.spends;
    p["first_tier"] = rec.first_tier;
    p["second_tier"] = rec.second_tier;
    p["utility"] = rec.utility;
    p["priorities"] = rec.priorities;
    periods.push_back(std::move(p));
  }
  doc["periods"] = std::move(periods);
  doc["final_budgets"] = trace.final_budgets;
  return doc.dump() + "\n";
}

AllocationTrace trace_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", std::string()) != kTraceSchema) {
      throw ConfigError(std::string("trace: expected schema \"") + kTraceSchema + "\"");
    }
    AllocationTrace t;
    t.mode = doc.at("mode").get<std::string>();
    t.ledger.n = doc.at("n").get<std::size_t>();
    t.ledger.capacity_mbps = doc.at("capacity").get<double>();
    t.ledger.beta = doc.at("beta").get<double>();
    t.ledger.cap = doc.at("cap").get<double>();
    t.slots_per_day = doc.at("slots_per_day").get<std::size_t>();
    for (const auto& p : doc.at("periods")) {
      PeriodRecord rec;
      rec.period = p.at("period").get<std::size_t>();
      rec.budgets = p.at("budgets").get<std::vector<double>>();
      rec.spends = p.at("spends").get<std::vector<double>>();
      rec.first_tier = p.at("first_tier").get<std::vector<double>>();
      rec.second_tier = p.at("second_tier").get<std::vector<double>>();
      rec.utility = p.at("utility").get<std::vector<double>>();
      rec.priorities = p.at("priorities").get<std::vector<std::array<double, kAppCount>>>();
      const std::size_t n = t.ledger.n;
      if (rec.budgets.size() != n || rec.spends.size() != n || rec.first_tier.size() != n ||
          rec.second_tier.size() != n || rec.utility.size() != n) {
        throw ConfigError("trace: period " + std::to_string(rec.period) +
                          " has the wrong gateway count");
      }
      t.periods.push_back(std::move(rec));
    }
    t.final_budgets = doc.at("final_budgets").get<std::vector<double>>();
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trace: ") + e.what());
  }
}

std::string metrics_csv(const AllocationTrace& trace, const MetricsReport& m) {
  std::ostringstream out;
  out << "period,mode,jain_inst,jain_cum,total_utility";
  for (std::size_t i = 0; i < trace.gateways(); ++i) out << ",budget_" << (i + 1);
  out << "\n";
  for (std::size_t k = 0; k < trace.periods.size(); ++k) {
    const auto& rec = trace.periods[k];
    out << rec.period << "," << trace.mode << "," << num(m.jain_inst[k]) << ","
        << num(m.jain_cum[k]) << "," << num(m.period_utility[k]);
    for (double b : rec.budgets) out << "," << num(b);
    out << "\n";
  }
  return out.str();
}

std::string report_markdown(const ExperimentConfig& config, const ExperimentResult& result) {
  const MetricsReport& m = result.metrics;
  std::ostringstream out;
  out << "# creditband run: " << m.mode << "\n\n";
  out << "- gateways: " << config.ledger.n << ", periods: " << config.horizon() << " ("
      << config.days << " days x " << config.slots_per_day << " slots)\n";
  out << "- total credits: " << num(config.ledger.total()) << ", cap: " << num(config.ledger.cap)
      << ", capacity: " << num(config.ledger.capacity_mbps) << " Mbps\n";
  out << "- seed: " << config.seed << "\n\n";

  out << "## Utility\n\n";
  out << "| quantity | value |\n|---|---|\n";
  out << "| total utility | " << num(m.total_utility) << " |\n";
  out << "| equal-share utility | " << num(m.equal_share_utility) << " |\n";
  out << "| utility ratio vs equal share | " << num(m.utility_ratio()) << " |\n";
  if (m.optimal_utility) {
    out << "| global-optimal utility | " << num(*m.optimal_utility) << " |\n";
  }
  if (m.recovery) {
    out << "| online recovery, periods " << m.recovery_first << "-" << (m.recovery_last - 1)
        << " | " << num(*m.recovery) << " |\n";
  }
  out << "\n## Fairness\n\n";
  out << "| quantity | value |\n|---|---|\n";
  out << "| min instantaneous Jain index | " << num(m.min_jain_inst()) << " |\n";
  out << "| final cumulative Jain index | " << num(m.final_jain_cum()) << " |\n";
  out << "| max cumulative spend gap (credits) | " << num(m.max_spend_gap) << " |\n";
  out << "| spend gap bound B(n-1)/n | "
      << num(config.ledger.total() * (config.ledger.n - 1) / config.ledger.n) << " |\n";

  out << "\n## Utility ratio against equal share\n\n";
  out << "| cells | fraction below 1 | median | max | excluded |\n|---|---|---|---|---|\n";
  auto cdf_row = [&](const std::string& label, const RatioCdf& c) {
    const double median = c.ratios.empty() ? 0.0 : c.ratios[c.ratios.size() / 2];
    out << "| " << label << " | " << num(c.fraction_below(1.0)) << " | " << num(median) << " | "
        << num(c.max()) << " | " << c.excluded << " |\n";
  };
  cdf_row("all", m.ratio_cdf);
  for (std::size_t k = 0; k < m.representative.size(); ++k) {
    cdf_row("gateway " + std::to_string(m.representative[k] + 1), m.representative_cdfs[k]);
  }

  if (!m.budget_trajectories.empty()) {
    out << "\n## Budgets of representative gateways\n\n";
    out << "| gateway | min | max | final |\n|---|---|---|---|\n";
    for (std::size_t k = 0; k < m.representative.size(); ++k) {
      const auto& b = m.budget_trajectories[k];
      const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
      out << "| " << (m.representative[k] + 1) << " | " << num(*lo) << " | " << num(*hi) << " | "
          << num(result.trace.final_budgets.at(m.representative[k])) << " |\n";
    }
  }
  if (result.solver) {
    out << "\n## Solver\n\n";
    out << "- interior-point iterations: " << result.solver->iterations << "\n";
    out << "- scaled stationarity residual: " << num(result.solver->stationarity) << "\n";
    out << "- scaled complementarity residual: " << num(result.solver->complementarity) << "\n";
  }
  return out.str();
}

AuditReport audit_trace(const AllocationTrace& trace) {
  AuditReport report;
  const LedgerConfig& cfg = trace.ledger;
  const std::size_t n = cfg.n;
  const double total = cfg.total();
  const double gap_bound = total * static_cast<double>(n - 1) / static_cast<double>(n) + 1e-6;
  report.periods = trace.periods.size();
  auto flag = [&](const std::string& check, std::size_t period, std::optional<std::size_t> gw,
                  const std::string& detail) {
    report.violations.push_back({check, period, gw ? std::optional(*gw + 1) : std::nullopt, detail});
  };

  std::vector<double> cum(n, 0.0);
  bool first = true;
  for (std::size_t k = 0; k < trace.periods.size(); ++k) {
    const auto& rec = trace.periods[k];
    const std::size_t t = rec.period;
    double sum = 0.0;
    for (double b : rec.budgets) sum += b;
    if (std::abs(sum - total) > kAuditTolerance) {
      flag("conservation", t, std::nullopt, "budgets sum to " + num(sum) + ", expected " + num(total));
    }
    double rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (rec.budgets[i] > cfg.cap + kAuditTolerance) {
        flag("cap", t, i, "budget " + num(rec.budgets[i]) + " above cap " + num(cfg.cap));
      }
      if (rec.spends[i] < 0.0) flag("spend", t, i, "negative spend " + num(rec.spends[i]));
      if (rec.spends[i] > rec.budgets[i] + kSpendSlack) {
        flag("spend", t, i, "spend " + num(rec.spends[i]) + " exceeds budget " + num(rec.budgets[i]));
      }
      if (std::abs(rec.first_tier[i] - rec.spends[i] * cfg.rate_per_credit()) > kAuditTolerance) {
        flag("rate", t, i, "first-tier rate does not match the spend");
      }
      rate += rec.first_tier[i] + rec.second_tier[i];
      cum[i] += rec.spends[i];
    }
    if (rate > cfg.capacity_mbps * (1.0 + 1e-12) + kAuditTolerance) {
      flag("capacity", t, std::nullopt, "total rate " + num(rate) + " exceeds capacity");
    }
    const auto [lo, hi] = std::minmax_element(cum.begin(), cum.end());
    if (*hi - *lo > gap_bound) {
      flag("spending_gap", t, std::nullopt, "cumulative spend gap " + num(*hi - *lo));
    }

    // Each period's budgets must follow from the previous one.
    const std::vector<double>* next =
        k + 1 < trace.periods.size() ? &trace.periods[k + 1].budgets : &trace.final_budgets;
    if (n >= 2 && next->size() == n && sum > 0.0 && std::abs(sum - total) <= kAuditTolerance) {
      try {
        CreditLedger ledger{cfg, rec.budgets, t};
        std::vector<double> spends = rec.spends;
        for (std::size_t i = 0; i < n; ++i) spends[i] = std::clamp(spends[i], 0.0, rec.budgets[i]);
        const CreditLedger expected = apply_cap(redistribute(ledger, spends));
        for (std::size_t i = 0; i < n; ++i) {
          if (std::abs(expected.budgets[i] - (*next)[i]) > kAuditTolerance) {
            flag("transition", t, i,
                 "next budget " + num((*next)[i]) + ", ledger gives " + num(expected.budgets[i]));
          }
        }
      } catch (const Error& e) {
        flag("transition", t, std::nullopt, e.what());
      }
    }

    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) rates[i] = rec.first_tier[i] + rec.second_tier[i];
    const double jain = jain_index(rates);
    report.min_jain_inst = first ? jain : std::min(report.min_jain_inst, jain);
    report.max_jain_inst = first ? jain : std::max(report.max_jain_inst, jain);
    first = false;
  }
  return report;
}

std::string format_audit(const AuditReport& report) {
  std::ostringstream out;
  for (const auto& v : report.violations) {
    out << "FAIL " << v.check << " period " << v.period;
    if (v.gateway) out << " gateway " << *v.gateway;
    out << ": " << v.detail << "\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << ": " << report.periods << " periods, "
      << report.violations.size() << " violations, instantaneous Jain in ["
      << num(report.min_jain_inst) << ", " << num(report.max_jain_inst) << "]\n";
  return out.str();
}

}  // namespace creditband
