#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "creditband/ledger.hpp"
#include "creditband/ratelimit.hpp"
#include "creditband/utility.hpp"

namespace creditband {

inline constexpr const char* kConfigSchema = "creditband.experiment/1";

enum class Mode { GlobalOptimal, Online, EqualShare, RateLimit };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& text);  // throws ConfigError

/// Device types, in column order: iPhone, Android, Windows laptop, Mac laptop.
inline constexpr std::size_t kDeviceTypes = 4;
using DeviceCounts = std::array<int, kDeviceTypes>;

struct SecondTierLaw {
  double low_mbps = 0.0;
  double high_mbps = 0.5;
};

/// Others' hypothesized behaviour: gamma is "own" (the forecasting gateway's
/// own profile) or "base" (the shared diurnal base).
struct ScenarioConfig {
  std::string id;
  std::string gamma = "own";
  AppMix app_mix{};
  double prior = 0.25;
};

struct FluidSweepConfig {
  std::vector<double> rates_mbps = {1, 2, 4, 8, 15};
  std::vector<double> rtts_s = {0.02, 0.06, 0.1};
  double buffer_mb = 4.0;
  double dt_s = 1e-3;
  double duration_s = 5.0;
};

struct SchedulerConfig {
  double rate_mbps = 2.0;
  double duration_s = 20.0;
  double sample_interval_s = 0.1;
  std::vector<ConnectionSpec> connections;
};

struct RateLimitConfig {
  FluidSweepConfig fluid;
  SchedulerConfig scheduler;
};

struct ExperimentConfig {
  LedgerConfig ledger;
  std::size_t slots_per_day = 12;
  std::size_t days = 7;
  std::vector<DeviceCounts> device_mix;
  double gamma_noise_sigma = 0.25;
  SecondTierLaw second_tier;
  std::size_t window = 12;
  std::size_t learning_days = 4;
  std::uint64_t seed = 1;
  Mode mode = Mode::GlobalOptimal;
  std::string profiles;  // empty: bundled profile table
  std::vector<std::size_t> representative = {1, 6, 11, 16};  // one-based
  std::vector<ScenarioConfig> scenarios;
  RateLimitConfig ratelimit;

  std::size_t horizon() const { return slots_per_day * days; }
  // Throws ConfigError naming the offending field.
  void validate() const;
};

/// Default 16-gateway week: four device-mix rows, the fourth covering
/// gateways 5, 8, 12 and 16, and four single-app scenarios.
ExperimentConfig default_experiment_config();

/// Parses a config document. Missing fields take defaults; unknown fields
/// and a wrong schema tag are rejected. Relative profile paths resolve
/// against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Fully resolved config as a JSON document that parses back to the same
/// values.
std::string to_json(const ExperimentConfig& config);

/// Per-device app probabilities for each daily slot plus the diurnal gamma
/// base.
struct AppProfiles {
  std::vector<double> gamma_base;
  std::array<std::vector<AppMix>, kDeviceTypes> devices;

  std::size_t slots() const { return gamma_base.size(); }
};

AppProfiles parse_app_profiles(const std::string& text);
AppProfiles bundled_app_profiles();
AppProfiles load_app_profiles(const ExperimentConfig& config);

}  // namespace creditband
