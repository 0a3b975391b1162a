#include "creditband/ratelimit.hpp"

#include <algorithm>
#include <cmath>

#include "creditband/errors.hpp"

namespace creditband {

FluidFlowState FluidFlowState::start(double R, double rtt, double buf_B, double demand) {
  if (!(R > 0.0) || !(rtt > 0.0) || !(buf_B > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fluid model needs positive R, rtt and buffer");
  }
  FluidFlowState s;
  s.R = R;
  s.rtt = rtt;
  s.buf_B = buf_B;
  s.demand = demand;
  s.Q = 0.0;
  s.W = buf_B;
  s.F = std::min(demand, s.W / rtt);
  s.D = std::min(R, s.F);
  return s;
}

FluidFlowState fluid_step(const FluidFlowState& state, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonpositiveDt, "fluid step needs dt > 0");
  FluidFlowState next = state;
  const double drain = state.Q > 0.0 ? state.R : std::min(state.R, state.F);
  next.D = drain;
  next.Q = std::clamp(state.Q + dt * (state.F - drain), 0.0, state.buf_B);
  next.W = state.buf_B - next.Q;
  next.F = std::min(state.demand, next.W / state.rtt);
  next.time = state.time + dt;
  return next;
}

FluidRun fluid_simulate(FluidFlowState state, double dt, double duration, double settle_tolerance,
                        std::size_t record_every) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonpositiveDt, "fluid step needs dt > 0");
  FluidRun run;
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  record_every = std::max<std::size_t>(record_every, 1);
  double settled_since = -1.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k % record_every == 0) {
      run.time.push_back(state.time);
      run.rate.push_back(state.F);
      run.window.push_back(state.W);
    }
    const bool inside = std::abs(state.F - state.R) <= settle_tolerance * state.R;
    if (inside && settled_since < 0.0) settled_since = state.time;
    if (!inside) settled_since = -1.0;
    if (k < steps) state = fluid_step(state, dt);
  }
  run.final = state;
  run.settling_time = settled_since;
  return run;
}

namespace {

// Packet arrivals of a non-busy connection up to time t, in bytes.
double arrived_bytes(const ConnectionSpec& c, double t) {
  const double live = t - c.start_time;
  if (live <= 0.0 || c.offered_mbps <= 0.0) return 0.0;
  const double interval = c.packet_bytes * 8.0 / (c.offered_mbps * 1e6);
  double on_time = live;
  if (c.off_seconds > 0.0) {
    const double cycle = c.on_seconds + c.off_seconds;
    const double full = std::floor(live / cycle);
    on_time = full * c.on_seconds + std::min(live - full * cycle, c.on_seconds);
  }
  // A packet lands at the start of each interval of on-time.
  return std::ceil(on_time / interval - 1e-12) * c.packet_bytes;
}

// Earliest time after t at which a non-busy connection has new data.
double next_arrival(const ConnectionSpec& c, double t, double horizon) {
  if (c.offered_mbps <= 0.0) return horizon;
  const double base = arrived_bytes(c, t);
  double lo = std::max(t, c.start_time);
  double hi = horizon;
  if (arrived_bytes(c, hi) <= base) return horizon;
  for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (arrived_bytes(c, mid) > base) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

ScheduleResult schedule_reads(std::span<const ConnectionSpec> connections, double rate_mbps,
                              double duration, double sample_interval) {
  if (connections.empty()) throw Error(ErrorCode::NoConnections, "no connections to schedule");
  if (!(rate_mbps > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate limit must be positive");
  if (!(duration > 0.0) || !(sample_interval > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration and sample interval must be positive");
  }
  for (const auto& c : connections) {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "connection priority must lie in (0, 1]");
    }
    if (!(c.block_bytes > 0.0)) throw Error(ErrorCode::InvalidArgument, "block size must be positive");
  }

  const std::size_t m = connections.size();
  const double bytes_per_second = rate_mbps * 1e6 / 8.0;
  const auto intervals = static_cast<std::size_t>(std::ceil(duration / sample_interval - 1e-9));

  ScheduleResult out;
  out.bytes_read.assign(m, 0.0);
  out.rate_series.assign(intervals, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < intervals; ++k) {
    out.sample_times.push_back(std::min(duration, (k + 1) * sample_interval));
  }

  // Credits a read to the sampling intervals its slot overlaps.
  auto account = [&](std::size_t c, double from, double to, double bytes) {
    const double span = to - from;
    auto k = static_cast<std::size_t>(from / sample_interval);
    while (k < intervals && from < to) {
      const double edge = std::min(to, (k + 1) * sample_interval);
      const double share = span > 0.0 ? (edge - from) / span : 1.0;
      out.rate_series[k][c] += bytes * share * 8.0 / 1e6 / sample_interval;
      from = edge;
      ++k;
    }
  };

  std::vector<double> consumed(m, 0.0);
  std::size_t cursor = 0;  // round-robin position
  double now = 0.0;
  while (now < duration) {
    // Next connection in turn with data queued.
    std::size_t chosen = m;
    double bytes = 0.0;
    for (std::size_t step = 0; step < m; ++step) {
      const std::size_t c = (cursor + step) % m;
      const auto& spec = connections[c];
      if (now < spec.start_time) continue;
      const double block = spec.block_bytes;
      const double pending = spec.busy ? block : arrived_bytes(spec, now) - consumed[c];
      if (pending <= 0.0) continue;
      chosen = c;
      bytes = pending >= block ? spec.alpha * block : pending;
      break;
    }
    if (chosen == m) {
      double wake = duration;
      for (const auto& spec : connections) {
        if (now < spec.start_time) wake = std::min(wake, spec.start_time);
        else if (!spec.busy) wake = std::min(wake, next_arrival(spec, now, duration));
      }
      now = wake;
      continue;
    }
    const double end = now + bytes / bytes_per_second;
    const double counted = end <= duration ? bytes : bytes * (duration - now) / (end - now);
    consumed[chosen] += bytes;
    out.bytes_read[chosen] += counted;
    account(chosen, now, std::min(end, duration), counted);
    ++out.reads;
    now = end;
    cursor = (chosen + 1) % m;
  }

  for (std::size_t c = 0; c < m; ++c) {
    const double life = duration - std::min(duration, connections[c].start_time);
    out.rates_mbps.push_back(life > 0.0 ? out.bytes_read[c] * 8.0 / 1e6 / life : 0.0);
  }
  return out;
}

}  // namespace creditband
