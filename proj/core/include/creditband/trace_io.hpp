#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "creditband/experiment_config.hpp"
#include "creditband/metrics.hpp"
#include "creditband/sim.hpp"
#include "creditband/trace.hpp"

namespace creditband {

inline constexpr const char* kTraceSchema = "creditband.trace/1";

const char* library_version();

std::string trace_to_json(const AllocationTrace& trace);
AllocationTrace trace_from_json(const std::string& text);  // throws ConfigError

/// period, mode, jain_inst, jain_cum, total_utility, budget_1..budget_n;
/// numbers printed with 9 significant digits.
std::string metrics_csv(const AllocationTrace& trace, const MetricsReport& metrics);

std::string report_markdown(const ExperimentConfig& config, const ExperimentResult& result);

struct AuditViolation {
  std::string check;
  std::size_t period = 0;
  std::optional<std::size_t> gateway;  // one-based when present
  std::string detail;
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  std::size_t periods = 0;
  double min_jain_inst = 1.0;
  double max_jain_inst = 1.0;

  bool passed() const { return violations.empty(); }
};

/// Replays the ledger invariants over a stored trace: conservation, cap,
/// spend within budget, budget transitions, pairwise cumulative-spend gap
/// and link capacity.
AuditReport audit_trace(const AllocationTrace& trace);

std::string format_audit(const AuditReport& report);

}  // namespace creditband
