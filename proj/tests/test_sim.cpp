#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "creditband/errors.hpp"
#include "creditband/metrics.hpp"
#include "creditband/sim.hpp"
#include "creditband/trace_io.hpp"

using namespace creditband;

namespace {

ExperimentConfig small_config(Mode mode, std::uint64_t seed = 3) {
  ExperimentConfig c = default_experiment_config();
  c.ledger.n = 4;
  c.ledger.cap = 80.0;
  c.device_mix.resize(4);
  c.days = 2;
  c.learning_days = 1;
  c.representative = {1, 4};
  c.mode = mode;
  c.seed = seed;
  return c;
}

std::vector<double> column_sum(const PeriodRecord& r) {
  std::vector<double> out(r.first_tier.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.first_tier[i] + r.second_tier[i];
  return out;
}

double jain_direct(const std::vector<double>& x) {
  double s = 0, q = 0;
  for (double v : x) {
    s += v;
    q += v * v;
  }
  return q == 0 ? 1.0 : s * s / (x.size() * q);
}

AllocationTrace synthetic(std::size_t n, std::size_t periods) {
  AllocationTrace t;
  t.mode = "synthetic";
  t.ledger.n = n;
  for (std::size_t p = 0; p < periods; ++p) {
    PeriodRecord r;
    r.period = p;
    r.budgets.assign(n, t.ledger.total() / n);
    r.spends.assign(n, 0.0);
    r.first_tier.assign(n, 0.0);
    r.second_tier.assign(n, 0.0);
    r.utility.assign(n, 0.0);
    r.priorities.assign(n, {});
    t.periods.push_back(r);
  }
  return t;
}

}  // namespace

TEST(Jain, Examples) {
  const std::vector<double> equal{3, 3, 3, 3};
  const std::vector<double> one{1, 0, 0, 0};
  const std::vector<double> mixed{1, 2};  // 9 / (2 * 5)
  const std::vector<double> zeros{0, 0, 0};
  EXPECT_DOUBLE_EQ(jain_index(equal), 1.0);
  EXPECT_DOUBLE_EQ(jain_index(one), 0.25);
  EXPECT_NEAR(jain_index(mixed), 0.9, 1e-15);
  EXPECT_DOUBLE_EQ(jain_index(zeros), 1.0);
  const std::vector<double> three{1, 1, 2};  // 16 / (3 * 6)
  EXPECT_NEAR(jain_index(three), 16.0 / 18, 1e-15);
}

TEST(RatioCdf, MatchesSortingOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  auto credit = synthetic(5, 9), equal = synthetic(5, 9);
  std::vector<double> want;
  std::size_t zeros = 0;
  for (std::size_t p = 0; p < 9; ++p) {
    for (std::size_t i = 0; i < 5; ++i) {
      credit.periods[p].utility[i] = u(rng);
      equal.periods[p].utility[i] = (p + i) % 7 == 0 ? 0.0 : u(rng) + 0.1;
      if (equal.periods[p].utility[i] == 0.0) ++zeros;
      else want.push_back(credit.periods[p].utility[i] / equal.periods[p].utility[i]);
    }
  }
  std::sort(want.begin(), want.end());
  const auto cdf = utility_ratio_cdf(credit, equal);
  ASSERT_EQ(cdf.ratios.size(), want.size());
  EXPECT_EQ(cdf.excluded, zeros);
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_DOUBLE_EQ(cdf.ratios[k], want[k]);
    EXPECT_DOUBLE_EQ(cdf.cdf[k], static_cast<double>(k + 1) / want.size());
  }
  const double below = std::count_if(want.begin(), want.end(), [](double r) { return r < 1.0; });
  EXPECT_DOUBLE_EQ(cdf.fraction_below(1.0), below / want.size());
  EXPECT_DOUBLE_EQ(cdf.max(), want.back());

  const std::size_t pick[] = {2};
  const auto one = utility_ratio_cdf(credit, equal, pick);
  std::size_t cells = 0;
  for (std::size_t p = 0; p < 9; ++p) cells += equal.periods[p].utility[2] != 0.0;
  EXPECT_EQ(one.ratios.size(), cells);
}

TEST(SecondTier, ClippedAtCapacity) {
  auto t = synthetic(3, 2);
  t.periods[0].first_tier = {5, 6, 7};  // 2 Mbps spare
  t.periods[1].first_tier = {1, 1, 1};  // plenty spare
  const std::vector<std::vector<double>> offered{{1, 2, 1}, {0.5, 0.25, 0.0}};
  apply_second_tier(t, offered);
  EXPECT_NEAR(t.periods[0].second_tier[0], 0.5, 1e-12);
  EXPECT_NEAR(t.periods[0].second_tier[1], 1.0, 1e-12);
  const auto& s1 = t.periods[1].second_tier;
  EXPECT_EQ(s1, offered[1]);
  t.periods[0].first_tier = {8, 8, 8};  // oversubscribed first tier
  apply_second_tier(t, offered);
  for (double v : t.periods[0].second_tier) EXPECT_EQ(v, 0.0);
}

TEST(Experiment, SameSeedSameTrace) {
  for (Mode m : {Mode::EqualShare, Mode::GlobalOptimal, Mode::Online}) {
    const auto a = run_experiment(small_config(m, 5));
    const auto b = run_experiment(small_config(m, 5));
    EXPECT_EQ(trace_to_json(a.trace), trace_to_json(b.trace)) << to_string(m);
    EXPECT_EQ(metrics_csv(a.trace, a.metrics), metrics_csv(b.trace, b.metrics));
  }
  const auto c = run_experiment(small_config(Mode::GlobalOptimal, 6));
  const auto d = run_experiment(small_config(Mode::GlobalOptimal, 5));
  EXPECT_NE(trace_to_json(c.trace), trace_to_json(d.trace));
}

TEST(Experiment, MetricsAgreeWithTrace) {
  const auto r = run_experiment(small_config(Mode::Online));
  const auto& t = r.trace;
  ASSERT_EQ(t.periods.size(), 24u);
  std::vector<double> cum(4, 0.0);
  double total = 0.0, gap = 0.0;
  std::vector<double> spent(4, 0.0);
  for (std::size_t p = 0; p < t.periods.size(); ++p) {
    const auto rates = column_sum(t.periods[p]);
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      cum[i] += rates[i];
      sum += rates[i];
      spent[i] += t.periods[p].spends[i];
      total += t.periods[p].utility[i];
    }
    EXPECT_LE(sum, t.ledger.capacity_mbps * (1 + 1e-12) + 1e-9);
    EXPECT_NEAR(r.metrics.jain_inst[p], jain_direct(rates), 1e-12);
    EXPECT_NEAR(r.metrics.jain_cum[p], jain_direct(cum), 1e-12);
    const auto [lo, hi] = std::minmax_element(spent.begin(), spent.end());
    gap = std::max(gap, *hi - *lo);
  }
  EXPECT_NEAR(r.metrics.total_utility, total, 1e-9 * total);
  EXPECT_NEAR(r.metrics.max_spend_gap, gap, 1e-9);
  EXPECT_NEAR(r.metrics.equal_share_utility, r.equal_trace.total_utility(), 1e-9);
  ASSERT_TRUE(r.metrics.optimal_utility.has_value());
  EXPECT_LE(r.metrics.total_utility, *r.metrics.optimal_utility * (1 + 1e-6));
  EXPECT_TRUE(audit_trace(t).passed()) << format_audit(audit_trace(t));
  EXPECT_TRUE(audit_trace(r.equal_trace).passed());
}

TEST(Experiment, GlobalAtLeastEqualShare) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto g = run_experiment(small_config(Mode::GlobalOptimal, seed));
    EXPECT_GE(g.metrics.total_utility, g.metrics.equal_share_utility * (1 - 1e-7));
    EXPECT_TRUE(audit_trace(g.trace).passed());
  }
}

TEST(TraceIo, JsonRoundTrip) {
  const auto r = run_experiment(small_config(Mode::GlobalOptimal));
  const std::string text = trace_to_json(r.trace);
  const auto back = trace_from_json(text);
  EXPECT_EQ(trace_to_json(back), text);
  EXPECT_EQ(back.periods.size(), r.trace.periods.size());
  EXPECT_EQ(back.final_budgets, r.trace.final_budgets);
  EXPECT_THROW(trace_from_json("{\"schema\": \"other\"}"), ConfigError);
  EXPECT_THROW(trace_from_json("not json"), ConfigError);
}

TEST(TraceIo, MetricsCsvLayout) {
  const auto r = run_experiment(small_config(Mode::EqualShare));
  std::istringstream in(metrics_csv(r.trace, r.metrics));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "period,mode,jain_inst,jain_cum,total_utility,budget_1,budget_2,budget_3,budget_4");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 9u);
    EXPECT_EQ(cells[1], "equal_share");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", r.metrics.jain_cum[rows]);
    EXPECT_EQ(cells[3], buf);
    std::snprintf(buf, sizeof buf, "%.9g", r.trace.periods[rows].budgets[3]);
    EXPECT_EQ(cells[8], buf);
    ++rows;
  }
  EXPECT_EQ(rows, r.trace.periods.size());
}

TEST(Audit, EditedBudgetIsCaught) {
  const auto r = run_experiment(small_config(Mode::GlobalOptimal));
  ASSERT_TRUE(audit_trace(r.trace).passed());
  auto bad = r.trace;
  bad.periods[7].budgets[1] += 0.5;
  const auto report = audit_trace(bad);
  ASSERT_FALSE(report.passed());
  bool named = false;
  for (const auto& v : report.violations) named |= v.period == 7;
  EXPECT_TRUE(named);
  EXPECT_NE(format_audit(report).find("conservation"), std::string::npos);

  auto overspend = r.trace;
  overspend.periods[2].spends[0] = overspend.periods[2].budgets[0] + 1.0;
  EXPECT_FALSE(audit_trace(overspend).passed());
  auto crowded = r.trace;
  crowded.periods[3].second_tier[0] += crowded.ledger.capacity_mbps;
  EXPECT_FALSE(audit_trace(crowded).passed());
}
