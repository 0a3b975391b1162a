#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace creditband {

/// Receive-buffer fluid model. Rates in Mbps, sizes in Mb, times in seconds.
/// The advertised window is whatever the buffer has free.
struct FluidFlowState {
  double F = 0.0;     // sender rate
  double D = 0.0;     // drain rate
  double Q = 0.0;     // queued data
  double W = 0.0;     // advertised window, buf_B - Q
  double buf_B = 4.0;
  double rtt = 0.1;
  double R = 1.0;     // drain target
  double demand = std::numeric_limits<double>::infinity();  // sender's own limit
  double time = 0.0;

  /// Fresh state with an empty buffer and a sender filling the full window.
  static FluidFlowState start(double R, double rtt, double buf_B,
                              double demand = std::numeric_limits<double>::infinity());
};

/// One forward-Euler step of dQ/dt = F - D, with Q kept inside [0, buf_B],
/// followed by the sender's response F = min(demand, W / rtt). The reader
/// drains at R while data is queued and at min(R, F) when the buffer is empty.
FluidFlowState fluid_step(const FluidFlowState& state, double dt);

struct FluidRun {
  std::vector<double> time;
  std::vector<double> rate;    // F
  std::vector<double> window;  // W
  FluidFlowState final;
  double settling_time = -1.0;  // first time |F - R| / R stays below tolerance
};

FluidRun fluid_simulate(FluidFlowState state, double dt, double duration,
                        double settle_tolerance = 0.01, std::size_t record_every = 1);

/// A connection handled by the prioritized reader. Busy connections always
/// have more than a block queued; the others receive packets at
/// offered_mbps while "on".
struct ConnectionSpec {
  double alpha = 1.0;
  bool busy = true;
  double offered_mbps = 0.0;
  double on_seconds = 0.0;
  double off_seconds = 0.0;  // zero: always on
  double packet_bytes = 1500.0;
  double block_bytes = 4096.0;
  double start_time = 0.0;   // admission time
};

struct ScheduleResult {
  std::vector<double> rates_mbps;   // average over each connection's lifetime
  std::vector<double> bytes_read;
  std::vector<double> sample_times;  // end of each sampling interval
  std::vector<std::vector<double>> rate_series;  // [interval][connection] Mbps
  std::size_t reads = 0;
};

/// Serialized reads: connections take turns on one mutex-protected slot; a
/// read of k bytes holds it for 8k / R. A connection with at least a block
/// pending reads alpha * block bytes, otherwise it reads everything pending.
ScheduleResult schedule_reads(std::span<const ConnectionSpec> connections, double rate_mbps,
                              double duration, double sample_interval = 0.1);

}  // namespace creditband
