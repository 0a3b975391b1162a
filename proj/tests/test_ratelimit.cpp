#include <gtest/gtest.h>

#include <cmath>
#include <deque>

#include "creditband/errors.hpp"
#include "creditband/ratelimit.hpp"

using namespace creditband;

namespace {

// Fine-step integration of the same buffer model, written out directly:
// queue grows at F - D, the sender fills whatever window is free.
double reference_settling(double R, double rtt, double buf, double dt, double tol) {
  double q = 0.0, t = 0.0, since = -1.0;
  for (; t < 5.0; t += dt) {
    const double f = (buf - q) / rtt;
    const bool in = std::abs(f - R) <= tol * R;
    if (in && since < 0) since = t;
    if (!in) since = -1.0;
    const double d = q > 0 ? R : std::min(R, f);
    q = std::min(buf, std::max(0.0, q + dt * (f - d)));
  }
  return since;
}

// Round-robin reader with explicit packet arrival lists, used as a
// reference at a finer block size.
std::vector<double> reference_rates(const std::vector<ConnectionSpec>& conns, double R,
                                    double duration, double block_scale) {
  const std::size_t m = conns.size();
  std::vector<std::deque<double>> arrivals(m);  // packet times
  for (std::size_t c = 0; c < m; ++c) {
    const auto& s = conns[c];
    if (s.busy || s.offered_mbps <= 0) continue;
    const double gap = s.packet_bytes * 8 / (s.offered_mbps * 1e6);
    double on_clock = 0.0;  // on-time consumed
    for (;;) {
      // Map on-time to wall time.
      double wall = on_clock;
      if (s.off_seconds > 0) {
        const double cycles = std::floor(on_clock / s.on_seconds + 1e-12);
        wall = cycles * (s.on_seconds + s.off_seconds) + (on_clock - cycles * s.on_seconds);
      }
      wall += s.start_time;
      if (wall >= duration) break;
      arrivals[c].push_back(wall);
      on_clock += gap;
    }
  }
  std::vector<double> queued(m, 0.0), bytes(m, 0.0);
  const double Bps = R * 1e6 / 8;
  double now = 0.0;
  std::size_t next = 0;
  while (now < duration) {
    for (std::size_t c = 0; c < m; ++c) {
      while (!arrivals[c].empty() && arrivals[c].front() <= now + 1e-12) {
        queued[c] += conns[c].packet_bytes;
        arrivals[c].pop_front();
      }
    }
    std::size_t pick = m;
    double amount = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t c = (next + k) % m;
      if (now < conns[c].start_time) continue;
      const double block = conns[c].block_bytes * block_scale;
      const double pending = conns[c].busy ? block : queued[c];
      if (pending <= 0) continue;
      pick = c;
      amount = pending >= block ? conns[c].alpha * block : pending;
      break;
    }
    if (pick == m) {
      double wake = duration;
      for (std::size_t c = 0; c < m; ++c) {
        if (now < conns[c].start_time) wake = std::min(wake, conns[c].start_time);
        if (!arrivals[c].empty()) wake = std::min(wake, arrivals[c].front());
      }
      now = wake;
      continue;
    }
    const double end = now + amount / Bps;
    bytes[pick] += end <= duration ? amount : amount * (duration - now) / (end - now);
    if (!conns[pick].busy) queued[pick] -= amount;
    now = end;
    next = (pick + 1) % m;
  }
  std::vector<double> rates(m);
  for (std::size_t c = 0; c < m; ++c) {
    rates[c] = bytes[c] * 8 / 1e6 / (duration - std::min(duration, conns[c].start_time));
  }
  return rates;
}

ConnectionSpec busy(double alpha, double start = 0.0) {
  ConnectionSpec c;
  c.alpha = alpha;
  c.start_time = start;
  return c;
}

ConnectionSpec bursty(double alpha, double mbps, double on, double off) {
  ConnectionSpec c;
  c.alpha = alpha;
  c.busy = false;
  c.offered_mbps = mbps;
  c.on_seconds = on;
  c.off_seconds = off;
  return c;
}

}  // namespace

TEST(Fluid, WindowConstantWhenDrainMatchesFill) {
  auto s = FluidFlowState::start(8.0, 0.1, 2.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    s = fluid_step(s, 1e-3);
    ASSERT_DOUBLE_EQ(s.W, 2.0);
    ASSERT_DOUBLE_EQ(s.F, 3.0);
    ASSERT_DOUBLE_EQ(s.D, 3.0);
  }
}

TEST(Fluid, EquilibriumWindowIsRateTimesRtt) {
  const auto run = fluid_simulate(FluidFlowState::start(8.0, 0.1, 2.0), 1e-3, 5.0);
  EXPECT_NEAR(run.final.W, 0.8, 1e-6);
  EXPECT_NEAR(run.final.F, 8.0, 1e-6);
  EXPECT_NEAR(run.final.W + run.final.Q, 2.0, 1e-12);
}

TEST(Fluid, SettlingTimeAgainstFineStepReference) {
  const double fine = reference_settling(8.0, 0.1, 2.0, 1e-5, 0.01);
  // Continuous solution: |F - R| / R = 1.5 exp(-t / rtt).
  EXPECT_NEAR(fine, 0.1 * std::log(150.0), 1e-3);
  const auto run = fluid_simulate(FluidFlowState::start(8.0, 0.1, 2.0), 1e-3, 5.0);
  EXPECT_NEAR(run.settling_time, fine, 0.01);
  EXPECT_LT(std::abs(run.final.F - 8.0) / 8.0, 0.01);
}

TEST(Fluid, SweepMeetsAccuracy) {
  for (double R : {1.0, 2.0, 4.0, 8.0, 15.0}) {
    for (double rtt : {0.02, 0.06, 0.1}) {
      const auto run = fluid_simulate(FluidFlowState::start(R, rtt, 4.0), 1e-3, 5.0);
      EXPECT_LE(std::abs(run.final.F - R) / R, 0.04) << R << " " << rtt;
      for (std::size_t k = 0; k < run.window.size(); ++k) {
        ASSERT_GE(run.window[k], 0.0);
        ASSERT_LE(run.window[k], 4.0);
      }
    }
  }
}

TEST(Fluid, Errors) {
  const auto s = FluidFlowState::start(1.0, 0.1, 1.0);
  try {
    fluid_step(s, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveDt);
  }
  EXPECT_THROW(FluidFlowState::start(0.0, 0.1, 1.0), Error);
}

TEST(Scheduler, SoleConnectionGetsTheLimit) {
  for (double alpha : {1.0, 0.3}) {
    const std::vector<ConnectionSpec> c{busy(alpha)};
    const auto r = schedule_reads(c, 2.0, 10.0);
    EXPECT_NEAR(r.rates_mbps[0], 2.0, 0.02 * 2.0);
  }
}

TEST(Scheduler, TwoBusyConnectionsSplitByPriority) {
  const std::vector<ConnectionSpec> c{busy(1.0), busy(0.5)};
  const auto r = schedule_reads(c, 2.0, 10.0);
  EXPECT_NEAR(r.rates_mbps[0], 4.0 / 3, 0.02 * 4.0 / 3);
  EXPECT_NEAR(r.rates_mbps[1], 2.0 / 3, 0.02 * 2.0 / 3);
}

TEST(Scheduler, PriorityRatiosAtTwoMbps) {
  for (const auto& [a1, a2] : std::vector<std::pair<double, double>>{
           {1, 1}, {1, 0.5}, {1, 0.25}, {1, 0.125}, {0.5, 1}, {0.25, 1}, {0.125, 1}}) {
    const std::vector<ConnectionSpec> c{busy(a1), busy(a2)};
    const auto r = schedule_reads(c, 2.0, 10.0);
    const double want = a1 / a2;
    EXPECT_LE(std::abs(r.rates_mbps[0] / r.rates_mbps[1] - want) / want, 0.05);
    EXPECT_LE(std::abs(r.rates_mbps[0] + r.rates_mbps[1] - 2.0) / 2.0, 0.02);
  }
}

TEST(Scheduler, MixedConnectionsAgainstReferences) {
  const std::vector<ConnectionSpec> c{busy(1.0), busy(0.5), busy(0.25),
                                      bursty(1.0, 0.2, 0.5, 0.5), busy(1.0, 10.0)};
  const auto r = schedule_reads(c, 2.0, 20.0);
  const auto fine = reference_rates(c, 2.0, 20.0, 0.1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    EXPECT_NEAR(r.rates_mbps[k], fine[k], 0.03 * fine[k]) << k;
  }
  // Weighted max-min: the bursty source is below its share and gets its
  // average offered rate; busy ones split the rest by alpha, with the late
  // connection joining halfway.
  const double rest = 2.0 - 0.1;
  const double early = rest / 1.75, late = rest / 2.75;
  EXPECT_NEAR(r.rates_mbps[0], 0.5 * (early + late), 0.05 * 0.5 * (early + late));
  EXPECT_NEAR(r.rates_mbps[2], 0.25 * 0.5 * (early + late), 0.05 * 0.25 * 0.5 * (early + late));
  EXPECT_NEAR(r.rates_mbps[3], 0.1, 0.005);
  EXPECT_NEAR(r.rates_mbps[4], late, 0.05 * late);
}

TEST(Scheduler, NonBusyReadsAreNotTruncated) {
  // Low priority does not hold back a light connection below its share.
  const std::vector<ConnectionSpec> c{busy(1.0), bursty(0.1, 0.3, 1.0, 0.0)};
  const auto r = schedule_reads(c, 2.0, 10.0);
  EXPECT_NEAR(r.rates_mbps[1], 0.3, 0.01);
  EXPECT_NEAR(r.rates_mbps[0] + r.rates_mbps[1], 2.0, 0.04);
}

TEST(Scheduler, AdmissionReequilibratesWithinOneSecond) {
  const std::vector<ConnectionSpec> c{busy(1.0), busy(0.5), busy(0.5, 5.0)};
  const auto r = schedule_reads(c, 4.0, 10.0, 0.5);
  // Average over [6, 10) once the newcomer has had a second.
  std::vector<double> avg(3, 0.0);
  int count = 0;
  for (std::size_t k = 0; k < r.sample_times.size(); ++k) {
    if (r.sample_times[k] <= 6.0 + 1e-9) continue;
    for (std::size_t i = 0; i < 3; ++i) avg[i] += r.rate_series[k][i];
    ++count;
  }
  for (double& a : avg) a /= count;
  EXPECT_NEAR(avg[0], 2.0, 0.05 * 2.0);
  EXPECT_NEAR(avg[1], 1.0, 0.05);
  EXPECT_NEAR(avg[2], 1.0, 0.05);
  // Before admission the first two split 2:1.
  EXPECT_NEAR(r.rate_series[4][0], 4.0 * 2 / 3, 0.05 * 4.0 * 2 / 3);
}

TEST(Scheduler, Errors) {
  try {
    schedule_reads({}, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConnections);
  }
  const std::vector<ConnectionSpec> c{busy(1.5)};
  EXPECT_THROW(schedule_reads(c, 1.0, 1.0), Error);
}
