#include "creditband/experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "app_profiles_embedded.hpp"
#include "creditband/errors.hpp"

namespace creditband {

using nlohmann::json;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::GlobalOptimal: return "global_optimal";
    case Mode::Online: return "online";
    case Mode::EqualShare: return "equal_share";
    case Mode::RateLimit: return "ratelimit";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& text) {
  for (Mode m : {Mode::GlobalOptimal, Mode::Online, Mode::EqualShare, Mode::RateLimit}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + text +
                    "' (expected global_optimal, online, equal_share or ratelimit)");
}

namespace {

constexpr const char* kAppNames[kAppCount] = {"streaming", "social", "download", "browsing"};
constexpr const char* kDeviceNames[kDeviceTypes] = {"iphone", "android", "windows", "mac"};

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(path + "." + item.key() + ": unknown field");
  }
}

template <typename T>
void read(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

AppMix read_mix(const json& j, const std::string& path) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": expected an array of four numbers");
  }
  if (v.size() != kAppCount) throw ConfigError(path + ": expected four entries");
  AppMix mix{};
  std::copy(v.begin(), v.end(), mix.begin());
  return mix;
}

ConnectionSpec read_connection(const json& j, const std::string& path) {
  check_keys(j, path, {"alpha", "busy", "offered_mbps", "on_seconds", "off_seconds",
                       "packet_bytes", "block_bytes", "start_time"});
  ConnectionSpec c;
  read(j, "alpha", path, c.alpha);
  read(j, "busy", path, c.busy);
  read(j, "offered_mbps", path, c.offered_mbps);
  read(j, "on_seconds", path, c.on_seconds);
  read(j, "off_seconds", path, c.off_seconds);
  read(j, "packet_bytes", path, c.packet_bytes);
  read(j, "block_bytes", path, c.block_bytes);
  read(j, "start_time", path, c.start_time);
  return c;
}

json connection_json(const ConnectionSpec& c) {
  return {{"alpha", c.alpha},
          {"busy", c.busy},
          {"offered_mbps", c.offered_mbps},
          {"on_seconds", c.on_seconds},
          {"off_seconds", c.off_seconds},
          {"packet_bytes", c.packet_bytes},
          {"block_bytes", c.block_bytes},
          {"start_time", c.start_time}};
}

std::vector<ScenarioConfig> default_scenarios() {
  std::vector<ScenarioConfig> out;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    ScenarioConfig s;
    s.id = kAppNames[k];
    s.app_mix[k] = 1.0;
    s.prior = 1.0 / static_cast<double>(kAppCount);
    out.push_back(s);
  }
  return out;
}

std::vector<ConnectionSpec> default_connections() {
  std::vector<ConnectionSpec> c(5);
  c[0].alpha = 1.0;
  c[1].alpha = 0.5;
  c[2].alpha = 0.25;
  c[3].alpha = 1.0;
  c[3].busy = false;
  c[3].offered_mbps = 0.2;
  c[3].on_seconds = 0.5;
  c[3].off_seconds = 0.5;
  c[4].alpha = 1.0;
  c[4].start_time = 10.0;
  return c;
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  const DeviceCounts rows[4] = {{1, 1, 1, 1}, {2, 0, 2, 1}, {1, 1, 1, 2}, {2, 0, 1, 1}};
  // Gateways 1,4,9,13 / 2,6,10,14 / 3,7,11,15 / 5,8,12,16.
  const int row_of[16] = {0, 1, 2, 0, 3, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3};
  for (int r : row_of) c.device_mix.push_back(rows[r]);
  c.scenarios = default_scenarios();
  c.ratelimit.scheduler.connections = default_connections();
  return c;
}

void ExperimentConfig::validate() const {
  try {
    ledger.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("ledger: ") + e.what());
  }
  if (slots_per_day == 0) throw ConfigError("slots_per_day: must be positive");
  if (days == 0) throw ConfigError("days: must be at least 1");
  if (device_mix.size() != ledger.n) {
    throw ConfigError("device_mix: expected " + std::to_string(ledger.n) + " rows");
  }
  for (std::size_t i = 0; i < device_mix.size(); ++i) {
    int total = 0;
    for (int v : device_mix[i]) {
      if (v < 0) throw ConfigError("device_mix[" + std::to_string(i) + "]: negative count");
      total += v;
    }
    if (total == 0) throw ConfigError("device_mix[" + std::to_string(i) + "]: no devices");
  }
  if (!(gamma_noise_sigma >= 0.0)) throw ConfigError("gamma_noise_sigma: must be >= 0");
  if (!(second_tier.low_mbps >= 0.0) || !(second_tier.high_mbps >= second_tier.low_mbps)) {
    throw ConfigError("second_tier: need 0 <= low_mbps <= high_mbps");
  }
  if (window == 0) throw ConfigError("window: must be positive");
  if (learning_days >= days) throw ConfigError("learning_days: must be smaller than days");
  for (std::size_t g : representative) {
    if (g < 1 || g > ledger.n) throw ConfigError("representative_gateways: index out of range");
  }
  if (scenarios.size() < 2) throw ConfigError("scenarios: need at least two");
  double prior = 0.0;
  for (const auto& s : scenarios) {
    if (s.gamma != "own" && s.gamma != "base") {
      throw ConfigError("scenarios." + s.id + ".gamma: expected \"own\" or \"base\"");
    }
    double sum = 0.0;
    for (double p : s.app_mix) {
      if (!(p >= 0.0)) throw ConfigError("scenarios." + s.id + ".app_mix: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("scenarios." + s.id + ".app_mix: must sum to one");
    }
    if (!(s.prior >= 0.0)) throw ConfigError("scenarios." + s.id + ".prior: negative");
    prior += s.prior;
  }
  if (std::abs(prior - 1.0) > 1e-9) throw ConfigError("scenarios: priors must sum to one");
  const auto& f = ratelimit.fluid;
  if (!(f.dt_s > 0.0) || !(f.duration_s > 0.0) || !(f.buffer_mb > 0.0)) {
    throw ConfigError("ratelimit.fluid: dt_s, duration_s and buffer_mb must be positive");
  }
  const auto& s = ratelimit.scheduler;
  if (!(s.rate_mbps > 0.0) || !(s.duration_s > 0.0) || !(s.sample_interval_s > 0.0)) {
    throw ConfigError("ratelimit.scheduler: rate, duration and interval must be positive");
  }
  for (const auto& c : s.connections) {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
      throw ConfigError("ratelimit.scheduler.connections: alpha must lie in (0, 1]");
    }
  }
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"schema", "ledger", "slots_per_day", "days", "device_mix", "gamma_noise_sigma",
              "second_tier", "window", "learning_days", "seed", "mode", "profiles",
              "representative_gateways", "scenarios", "ratelimit"});
  if (!doc.contains("schema") || !doc["schema"].is_string() || doc["schema"] != kConfigSchema) {
    throw ConfigError(std::string("config.schema: expected \"") + kConfigSchema + "\"");
  }

  ExperimentConfig c = default_experiment_config();
  if (doc.contains("ledger")) {
    const json& l = doc["ledger"];
    check_keys(l, "config.ledger", {"n", "capacity_mbps", "beta", "cap"});
    read(l, "n", "config.ledger", c.ledger.n);
    read(l, "capacity_mbps", "config.ledger", c.ledger.capacity_mbps);
    read(l, "beta", "config.ledger", c.ledger.beta);
    read(l, "cap", "config.ledger", c.ledger.cap);
  }
  read(doc, "slots_per_day", "config", c.slots_per_day);
  read(doc, "days", "config", c.days);
  if (doc.contains("device_mix")) {
    const json& rows = doc["device_mix"];
    if (!rows.is_array()) throw ConfigError("config.device_mix: expected an array");
    c.device_mix.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<int> row;
      try {
        row = rows[i].get<std::vector<int>>();
      } catch (const json::exception&) {
        throw ConfigError("config.device_mix[" + std::to_string(i) + "]: expected integers");
      }
      if (row.size() != kDeviceTypes) {
        throw ConfigError("config.device_mix[" + std::to_string(i) + "]: expected four counts");
      }
      DeviceCounts counts{};
      std::copy(row.begin(), row.end(), counts.begin());
      c.device_mix.push_back(counts);
    }
  } else if (c.ledger.n != c.device_mix.size()) {
    // Cycle the default rows over a different gateway count.
    const auto defaults = c.device_mix;
    c.device_mix.clear();
    for (std::size_t i = 0; i < c.ledger.n; ++i) c.device_mix.push_back(defaults[i % defaults.size()]);
  }
  read(doc, "gamma_noise_sigma", "config", c.gamma_noise_sigma);
  if (doc.contains("second_tier")) {
    const json& s = doc["second_tier"];
    check_keys(s, "config.second_tier", {"low_mbps", "high_mbps"});
    read(s, "low_mbps", "config.second_tier", c.second_tier.low_mbps);
    read(s, "high_mbps", "config.second_tier", c.second_tier.high_mbps);
  }
  read(doc, "window", "config", c.window);
  read(doc, "learning_days", "config", c.learning_days);
  read(doc, "seed", "config", c.seed);
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) throw ConfigError("config.mode: expected a string");
    c.mode = mode_from_string(doc["mode"].get<std::string>());
  }
  if (doc.contains("profiles") && !doc["profiles"].is_null()) {
    read(doc, "profiles", "config", c.profiles);
    std::filesystem::path p(c.profiles);
    if (p.is_relative() && !base_dir.empty()) c.profiles = (base_dir / p).lexically_normal().string();
  }
  read(doc, "representative_gateways", "config", c.representative);
  if (doc.contains("scenarios")) {
    const json& list = doc["scenarios"];
    if (!list.is_array()) throw ConfigError("config.scenarios: expected an array");
    c.scenarios.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "config.scenarios[" + std::to_string(i) + "]";
      check_keys(list[i], path, {"id", "gamma", "app_mix", "prior"});
      ScenarioConfig s;
      s.id = "scenario" + std::to_string(i + 1);
      read(list[i], "id", path, s.id);
      read(list[i], "gamma", path, s.gamma);
      if (!list[i].contains("app_mix")) throw ConfigError(path + ".app_mix: required");
      s.app_mix = read_mix(list[i]["app_mix"], path + ".app_mix");
      s.prior = 1.0 / static_cast<double>(list.size());
      read(list[i], "prior", path, s.prior);
      c.scenarios.push_back(s);
    }
  }
  if (doc.contains("ratelimit")) {
    const json& r = doc["ratelimit"];
    check_keys(r, "config.ratelimit", {"fluid", "scheduler"});
    if (r.contains("fluid")) {
      const json& f = r["fluid"];
      const std::string path = "config.ratelimit.fluid";
      check_keys(f, path, {"rates_mbps", "rtts_s", "buffer_mb", "dt_s", "duration_s"});
      read(f, "rates_mbps", path, c.ratelimit.fluid.rates_mbps);
      read(f, "rtts_s", path, c.ratelimit.fluid.rtts_s);
      read(f, "buffer_mb", path, c.ratelimit.fluid.buffer_mb);
      read(f, "dt_s", path, c.ratelimit.fluid.dt_s);
      read(f, "duration_s", path, c.ratelimit.fluid.duration_s);
    }
    if (r.contains("scheduler")) {
      const json& s = r["scheduler"];
      const std::string path = "config.ratelimit.scheduler";
      check_keys(s, path, {"rate_mbps", "duration_s", "sample_interval_s", "connections"});
      read(s, "rate_mbps", path, c.ratelimit.scheduler.rate_mbps);
      read(s, "duration_s", path, c.ratelimit.scheduler.duration_s);
      read(s, "sample_interval_s", path, c.ratelimit.scheduler.sample_interval_s);
      if (s.contains("connections")) {
        if (!s["connections"].is_array()) throw ConfigError(path + ".connections: expected an array");
        c.ratelimit.scheduler.connections.clear();
        for (std::size_t i = 0; i < s["connections"].size(); ++i) {
          c.ratelimit.scheduler.connections.push_back(read_connection(
              s["connections"][i], path + ".connections[" + std::to_string(i) + "]"));
        }
      }
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_experiment_config(text.str(), std::filesystem::absolute(path).parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_json(const ExperimentConfig& c) {
  json doc;
  doc["schema"] = kConfigSchema;
  doc["ledger"] = {{"n", c.ledger.n},
                   {"capacity_mbps", c.ledger.capacity_mbps},
                   {"beta", c.ledger.beta},
                   {"cap", c.ledger.cap}};
  doc["slots_per_day"] = c.slots_per_day;
  doc["days"] = c.days;
  doc["device_mix"] = json::array();
  for (const auto& row : c.device_mix) doc["device_mix"].push_back(row);
  doc["gamma_noise_sigma"] = c.gamma_noise_sigma;
  doc["second_tier"] = {{"low_mbps", c.second_tier.low_mbps},
                        {"high_mbps", c.second_tier.high_mbps}};
  doc["window"] = c.window;
  doc["learning_days"] = c.learning_days;
  doc["seed"] = c.seed;
  doc["mode"] = to_string(c.mode);
  doc["profiles"] = c.profiles.empty() ? json(nullptr) : json(c.profiles);
  doc["representative_gateways"] = c.representative;
  doc["scenarios"] = json::array();
  for (const auto& s : c.scenarios) {
    doc["scenarios"].push_back(
        {{"id", s.id}, {"gamma", s.gamma}, {"app_mix", s.app_mix}, {"prior", s.prior}});
  }
  const auto& f = c.ratelimit.fluid;
  const auto& s = c.ratelimit.scheduler;
  json connections = json::array();
  for (const auto& conn : s.connections) connections.push_back(connection_json(conn));
  doc["ratelimit"] = {
      {"fluid",
       {{"rates_mbps", f.rates_mbps},
        {"rtts_s", f.rtts_s},
        {"buffer_mb", f.buffer_mb},
        {"dt_s", f.dt_s},
        {"duration_s", f.duration_s}}},
      {"scheduler",
       {{"rate_mbps", s.rate_mbps},
        {"duration_s", s.duration_s},
        {"sample_interval_s", s.sample_interval_s},
        {"connections", connections}}}};
  return doc.dump(2) + "\n";
}

AppProfiles parse_app_profiles(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("profiles: invalid JSON: ") + e.what());
  }
  check_keys(doc, "profiles", {"schema", "slots_per_day", "gamma_base", "device_types", "app_probs"});
  AppProfiles p;
  std::size_t slots = 0;
  read(doc, "slots_per_day", "profiles", slots);
  read(doc, "gamma_base", "profiles", p.gamma_base);
  if (slots == 0 || p.gamma_base.size() != slots) {
    throw ConfigError("profiles.gamma_base: expected slots_per_day entries");
  }
  if (!doc.contains("app_probs")) throw ConfigError("profiles.app_probs: required");
  for (std::size_t d = 0; d < kDeviceTypes; ++d) {
    const std::string path = std::string("profiles.app_probs.") + kDeviceNames[d];
    if (!doc["app_probs"].contains(kDeviceNames[d])) throw ConfigError(path + ": missing");
    const json& dev = doc["app_probs"][kDeviceNames[d]];
    check_keys(dev, path, {"streaming", "social", "download", "browsing"});
    p.devices[d].assign(slots, AppMix{});
    for (std::size_t k = 0; k < kAppCount; ++k) {
      std::vector<double> series;
      read(dev, kAppNames[k], path, series);
      if (series.size() != slots) {
        throw ConfigError(path + "." + kAppNames[k] + ": expected slots_per_day entries");
      }
      for (std::size_t s = 0; s < slots; ++s) p.devices[d][s][k] = series[s];
    }
    for (std::size_t s = 0; s < slots; ++s) {
      double sum = 0.0;
      for (double v : p.devices[d][s]) sum += v;
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError(path + ": slot " + std::to_string(s) + " does not sum to one");
      }
    }
  }
  return p;
}

AppProfiles bundled_app_profiles() { return parse_app_profiles(detail::kBundledAppProfiles); }

AppProfiles load_app_profiles(const ExperimentConfig& config) {
  if (config.profiles.empty()) return bundled_app_profiles();
  std::ifstream in(config.profiles);
  if (!in) throw ConfigError("cannot open profiles file '" + config.profiles + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_app_profiles(text.str());
}

}  // namespace creditband
