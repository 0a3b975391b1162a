#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "creditband/trace.hpp"

namespace creditband {

/// (sum r)^2 / (n sum r^2); all-zero rates count as perfectly equal (1).
double jain_index(std::span<const double> rates);

struct RatioCdf {
  std::vector<double> ratios;  // sorted ascending
  std::vector<double> cdf;     // (k + 1) / size
  std::size_t excluded = 0;    // cells with zero equal-share utility

  double fraction_below(double value) const;
  double max() const { return ratios.empty() ? 0.0 : ratios.back(); }
};

/// Per-cell U_credit / U_equal over every (gateway, period), optionally
/// restricted to a set of zero-based gateway indices.
RatioCdf utility_ratio_cdf(const AllocationTrace& credit, const AllocationTrace& equal,
                           std::span<const std::size_t> gateways = {});

struct MetricsReport {
  std::string mode;
  std::vector<double> jain_inst;   // per period, first + second tier
  std::vector<double> jain_cum;    // cumulative rates up to each period
  std::vector<double> period_utility;
  double total_utility = 0.0;
  double equal_share_utility = 0.0;
  std::optional<double> optimal_utility;
  // Window over which online recovery is measured, [first, last).
  std::size_t recovery_first = 0;
  std::size_t recovery_last = 0;
  std::optional<double> recovery;
  RatioCdf ratio_cdf;
  std::vector<std::size_t> representative;  // zero-based
  std::vector<RatioCdf> representative_cdfs;
  std::vector<std::vector<double>> budget_trajectories;
  double max_spend_gap = 0.0;

  double utility_ratio() const {
    return equal_share_utility > 0.0 ? total_utility / equal_share_utility : 0.0;
  }
  double min_jain_inst() const;
  double final_jain_cum() const;
};

/// Fairness and utility summary of `trace` against the equal-share baseline.
MetricsReport compute_metrics(const AllocationTrace& trace, const AllocationTrace& equal,
                              std::span<const std::size_t> representative);

/// Largest |cumulative spend_i - cumulative spend_j| over all periods.
double max_cumulative_spend_gap(const AllocationTrace& trace);

}  // namespace creditband
