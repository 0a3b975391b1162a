#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "creditband/errors.hpp"
#include "creditband/ratelimit.hpp"
#include "creditband/sim.hpp"
#include "creditband/trace_io.hpp"

namespace creditband::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_st("creditband");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CREDITBAND_LOG")) {
      const auto level = spdlog::level::from_str(env);
      // from_str maps unknown names to off; only honour real names.
      if (level != spdlog::level::off || std::string(env) == "off") l->set_level(level);
    }
    return l;
  }();
  return log;
}

struct RatelimitOutputs {
  std::string metrics;
  std::string fluid;
  std::string report;
};

RatelimitOutputs run_ratelimit(const ExperimentConfig& config) {
  const auto& fl = config.ratelimit.fluid;
  const auto& sc = config.ratelimit.scheduler;
  RatelimitOutputs out;

  std::ostringstream fluid;
  std::ostringstream report;
  fluid << "rate_mbps,rtt_s,final_rate_mbps,final_window_mb,relative_error,settling_time_s\n";
  report << "# creditband run: ratelimit\n\n## Receive-window fluid model\n\n";
  report << "buffer " << num(fl.buffer_mb) << " Mb, dt " << num(fl.dt_s) << " s, "
         << num(fl.duration_s) << " s per run\n\n";
  report << "| R (Mbps) | RTT (s) | final rate | window | R x RTT | error |\n";
  report << "|---|---|---|---|---|---|\n";
  double worst = 0.0;
  for (double R : fl.rates_mbps) {
    for (double rtt : fl.rtts_s) {
      const FluidRun run =
          fluid_simulate(FluidFlowState::start(R, rtt, fl.buffer_mb), fl.dt_s, fl.duration_s,
                         0.01, std::numeric_limits<std::size_t>::max());
      const double err = std::abs(run.final.F - R) / R;
      worst = std::max(worst, err);
      fluid << num(R) << "," << num(rtt) << "," << num(run.final.F) << "," << num(run.final.W)
            << "," << num(err) << "," << num(run.settling_time) << "\n";
      report << "| " << num(R) << " | " << num(rtt) << " | " << num(run.final.F) << " | "
             << num(run.final.W) << " | " << num(R * rtt) << " | " << num(err) << " |\n";
    }
  }
  report << "\nworst terminal error: " << num(worst) << "\n";

  const ScheduleResult sched =
      schedule_reads(sc.connections, sc.rate_mbps, sc.duration_s, sc.sample_interval_s);
  std::ostringstream metrics;
  metrics << "time_s";
  for (std::size_t c = 0; c < sc.connections.size(); ++c) metrics << ",rate_" << (c + 1);
  metrics << "\n";
  for (std::size_t k = 0; k < sched.sample_times.size(); ++k) {
    metrics << num(sched.sample_times[k]);
    for (double r : sched.rate_series[k]) metrics << "," << num(r);
    metrics << "\n";
  }
  double total = 0.0;
  for (double b : sched.bytes_read) total += 8.0 * b / 1e6;
  total /= sc.duration_s;
  report << "\n## Prioritized reader\n\n";
  report << "limit " << num(sc.rate_mbps) << " Mbps over " << num(sc.duration_s) << " s, "
         << sched.reads << " reads, achieved total " << num(total) << " Mbps\n\n";
  report << "| connection | alpha | busy | start (s) | rate (Mbps) |\n|---|---|---|---|---|\n";
  for (std::size_t c = 0; c < sc.connections.size(); ++c) {
    const auto& spec = sc.connections[c];
    report << "| " << (c + 1) << " | " << num(spec.alpha) << " | " << (spec.busy ? "yes" : "no")
           << " | " << num(spec.start_time) << " | " << num(sched.rates_mbps[c]) << " |\n";
  }
  out.metrics = metrics.str();
  out.fluid = fluid.str();
  out.report = report.str();
  return out;
}

RunManifest make_manifest(const RunRequest& request, const ExperimentConfig& config,
                          const std::string& metrics, double seconds) {
  RunManifest m;
  m.config_path = request.config_path ? fs::absolute(*request.config_path).string() : "";
  m.mode = to_string(config.mode);
  m.seed = config.seed;
  m.out_dir = fs::absolute(request.out_dir).string();
  m.tool_version = library_version();
  m.wall_seconds = seconds;
  m.metrics_digest = digest(metrics);
  m.config_json = to_json(config);
  return m;
}

// Runs the experiment described by `config` and writes every artifact.
int execute(const RunRequest& request, const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(request.out_dir);
  std::string metrics;
  if (config.mode == Mode::RateLimit) {
    logger()->info("running ratelimit scenarios");
    const RatelimitOutputs r = run_ratelimit(config);
    metrics = r.metrics;
    write_atomically(request.out_dir / "fluid.csv", r.fluid);
    write_atomically(request.out_dir / "metrics.csv", r.metrics);
    write_atomically(request.out_dir / "report.md", r.report);
  } else {
    logger()->info("running {} over {} periods, seed {}", to_string(config.mode),
                   config.horizon(), config.seed);
    const ExperimentResult result = run_experiment(config);
    metrics = metrics_csv(result.trace, result.metrics);
    write_atomically(request.out_dir / "trace.json", trace_to_json(result.trace));
    write_atomically(request.out_dir / "metrics.csv", metrics);
    write_atomically(request.out_dir / "report.md", report_markdown(config, result));
    const AuditReport audit = audit_trace(result.trace);
    if (!audit.passed()) {
      std::cerr << format_audit(audit);
      return kFailure;
    }
    logger()->info("utility ratio {:.6f}, final cumulative Jain {:.6f}",
                   result.metrics.utility_ratio(), result.metrics.final_jain_cum());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomically(request.out_dir / "manifest.json",
                   manifest_to_json(make_manifest(request, config, metrics, seconds)));
  std::cout << "wrote " << request.out_dir.string() << " (" << to_string(config.mode) << ", "
            << num(seconds) << " s)\n";
  return kOk;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

std::string digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string manifest_to_json(const RunManifest& m) {
  json doc;
  doc["schema"] = kManifestSchema;
  doc["config_path"] = m.config_path;
  doc["mode"] = m.mode;
  doc["seed"] = m.seed;
  doc["out_dir"] = m.out_dir;
  doc["tool_version"] = m.tool_version;
  doc["wall_seconds"] = m.wall_seconds;
  doc["metrics_digest"] = m.metrics_digest;
  doc["config"] = json::parse(m.config_json);
  return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", std::string()) != kManifestSchema) {
      throw ConfigError(std::string("manifest: expected schema \"") + kManifestSchema + "\"");
    }
    RunManifest m;
    m.config_path = doc.at("config_path").get<std::string>();
    m.mode = doc.at("mode").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.out_dir = doc.at("out_dir").get<std::string>();
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.wall_seconds = doc.at("wall_seconds").get<double>();
    m.metrics_digest = doc.at("metrics_digest").get<std::string>();
    m.config_json = doc.at("config").dump();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

ExperimentConfig resolve_config(const RunRequest& request) {
  ExperimentConfig config = request.config_path ? load_experiment_config(*request.config_path)
                                                : default_experiment_config();
  if (request.mode) config.mode = *request.mode;
  if (request.seed) config.seed = *request.seed;
  config.validate();
  return config;
}

int cmd_run(const RunRequest& request) {
  return guarded([&] { return execute(request, resolve_config(request)); });
}

int cmd_audit(const fs::path& trace_path) {
  return guarded([&] {
    const AllocationTrace trace = trace_from_json(read_file(trace_path, "trace file"));
    const AuditReport report = audit_trace(trace);
    std::cout << trace_path.string() << " (" << trace.mode << "): " << format_audit(report);
    return report.passed() ? kOk : kFailure;
  });
}

int cmd_replay(const fs::path& manifest_path, const std::optional<fs::path>& out_dir) {
  return guarded([&] {
    const RunManifest m = manifest_from_json(read_file(manifest_path, "manifest"));
    RunRequest request;
    if (!m.config_path.empty()) request.config_path = m.config_path;
    request.out_dir = out_dir ? *out_dir : fs::path(m.out_dir);
    ExperimentConfig config = parse_experiment_config(m.config_json);
    config.validate();
    const int status = execute(request, config);
    if (status != kOk) return status;
    const std::string metrics = read_file(request.out_dir / "metrics.csv", "metrics file");
    if (digest(metrics) != m.metrics_digest) {
      std::cerr << "replay mismatch: metrics.csv digest " << digest(metrics) << ", manifest has "
                << m.metrics_digest << "\n";
      return kFailure;
    }
    std::cout << "replay matches manifest digest " << m.metrics_digest << "\n";
    return kOk;
  });
}

int run_main(int argc, char** argv) {
  CLI::App app{"Credit-based bandwidth sharing experiments"};
  app.set_version_flag("--version", std::string(library_version()));
  std::string config_path;
  std::string mode;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string audit_path;
  std::string replay_path;
  auto* config_opt = app.add_option("--config", config_path, "Experiment config (JSON)");
  auto* mode_opt = app.add_option("--mode", mode, "Allocation mode")
                       ->check(CLI::IsMember({"global_optimal", "online", "equal_share",
                                              "ratelimit"}));
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* audit_opt = app.add_option("--audit", audit_path, "Audit a stored trace.json and exit");
  auto* replay_opt =
      app.add_option("--replay", replay_path, "Re-run the experiment recorded in a manifest");
  audit_opt->excludes(config_opt, mode_opt, seed_opt, replay_opt);
  replay_opt->excludes(config_opt, mode_opt, seed_opt);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  logger();

  if (*audit_opt) return cmd_audit(audit_path);
  if (*replay_opt) {
    return cmd_replay(replay_path, *out_opt ? std::optional<fs::path>(out_dir) : std::nullopt);
  }
  RunRequest request;
  if (*config_opt) request.config_path = config_path;
  if (*mode_opt) request.mode = mode_from_string(mode);
  if (*seed_opt) request.seed = seed;
  request.out_dir = out_dir;
  return cmd_run(request);
}

}  // namespace creditband::cli
