#include "creditband/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "creditband/errors.hpp"

namespace creditband {

double jain_index(std::span<const double> rates) {
  if (rates.empty()) throw Error(ErrorCode::InvalidArgument, "Jain index of no rates");
  double sum = 0.0;
  double sq = 0.0;
  for (double r : rates) {
    if (r < 0.0) throw Error(ErrorCode::NegativeRate, "Jain index of a negative rate");
    sum += r;
    sq += r * r;
  }
  if (sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(rates.size()) * sq);
}

double RatioCdf::fraction_below(double value) const {
  if (ratios.empty()) return 0.0;
  const auto it = std::lower_bound(ratios.begin(), ratios.end(), value);
  return static_cast<double>(it - ratios.begin()) / static_cast<double>(ratios.size());
}

RatioCdf utility_ratio_cdf(const AllocationTrace& credit, const AllocationTrace& equal,
                           std::span<const std::size_t> gateways) {
  if (credit.periods.size() != equal.periods.size() || credit.gateways() != equal.gateways()) {
    throw Error(ErrorCode::InvalidArgument, "traces cover different cells");
  }
  std::vector<std::size_t> chosen(gateways.begin(), gateways.end());
  if (chosen.empty()) {
    for (std::size_t i = 0; i < credit.gateways(); ++i) chosen.push_back(i);
  }
  RatioCdf out;
  for (std::size_t t = 0; t < credit.periods.size(); ++t) {
    for (std::size_t i : chosen) {
      const double base = equal.periods[t].utility.at(i);
      if (base == 0.0) {
        ++out.excluded;
        continue;
      }
      out.ratios.push_back(credit.periods[t].utility.at(i) / base);
    }
  }
  std::sort(out.ratios.begin(), out.ratios.end());
  const auto m = static_cast<double>(out.ratios.size());
  for (std::size_t k = 0; k < out.ratios.size(); ++k) {
    out.cdf.push_back(static_cast<double>(k + 1) / m);
  }
  return out;
}

double MetricsReport::min_jain_inst() const {
  return jain_inst.empty() ? 1.0 : *std::min_element(jain_inst.begin(), jain_inst.end());
}

double MetricsReport::final_jain_cum() const {
  return jain_cum.empty() ? 1.0 : jain_cum.back();
}

double max_cumulative_spend_gap(const AllocationTrace& trace) {
  const std::size_t n = trace.gateways();
  std::vector<double> cum(n, 0.0);
  double gap = 0.0;
  for (const auto& rec : trace.periods) {
    for (std::size_t i = 0; i < n; ++i) cum[i] += rec.spends[i];
    const auto [lo, hi] = std::minmax_element(cum.begin(), cum.end());
    gap = std::max(gap, *hi - *lo);
  }
  return gap;
}

MetricsReport compute_metrics(const AllocationTrace& trace, const AllocationTrace& equal,
                              std::span<const std::size_t> representative) {
  MetricsReport r;
  r.mode = trace.mode;
  const std::size_t n = trace.gateways();
  std::vector<double> cumulative(n, 0.0);
  for (const auto& rec : trace.periods) {
    std::vector<double> total(n);
    double period_utility = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total[i] = rec.first_tier[i] + rec.second_tier[i];
      cumulative[i] += total[i];
      period_utility += rec.utility[i];
    }
    r.jain_inst.push_back(jain_index(total));
    r.jain_cum.push_back(jain_index(cumulative));
    r.period_utility.push_back(period_utility);
  }
  r.total_utility = trace.total_utility();
  r.equal_share_utility = equal.total_utility();
  r.ratio_cdf = utility_ratio_cdf(trace, equal);
  r.representative.assign(representative.begin(), representative.end());
  for (std::size_t g : r.representative) {
    const std::size_t one[] = {g};
    r.representative_cdfs.push_back(utility_ratio_cdf(trace, equal, one));
    std::vector<double> budgets;
    for (const auto& rec : trace.periods) budgets.push_back(rec.budgets.at(g));
    r.budget_trajectories.push_back(std::move(budgets));
  }
  r.max_spend_gap = max_cumulative_spend_gap(trace);
  return r;
}

}  // namespace creditband
