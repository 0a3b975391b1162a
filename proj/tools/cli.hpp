#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "creditband/experiment_config.hpp"

namespace creditband::cli {

inline constexpr const char* kManifestSchema = "creditband.manifest/1";

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;     // module error or audit violation
inline constexpr int kConfigError = 2;

struct RunRequest {
  std::optional<std::filesystem::path> config_path;  // empty: built-in defaults
  std::optional<Mode> mode;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "out";
};

struct RunManifest {
  std::string config_path;
  std::string mode;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string tool_version;
  double wall_seconds = 0.0;
  std::string metrics_digest;  // FNV-1a of metrics.csv, hex
  std::string config_json;     // fully resolved config
};

/// Resolves the config (file or defaults) and applies the mode/seed overrides.
ExperimentConfig resolve_config(const RunRequest& request);

/// Runs one experiment and writes trace.json, metrics.csv, report.md and
/// manifest.json into the output directory. Ratelimit runs write
/// metrics.csv (scheduler rate series), fluid.csv, report.md and the manifest.
int cmd_run(const RunRequest& request);

/// Checks every ledger invariant over a stored trace; prints violations.
int cmd_audit(const std::filesystem::path& trace_path);

/// Re-runs the experiment recorded in a manifest and compares the
/// metrics.csv digest. Writes into `out_dir`, or the recorded directory.
int cmd_replay(const std::filesystem::path& manifest_path,
               const std::optional<std::filesystem::path>& out_dir);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

std::string digest(const std::string& bytes);

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

/// Full command line: --config, --mode, --seed, --out, --audit, --replay.
int run_main(int argc, char** argv);

}  // namespace creditband::cli
