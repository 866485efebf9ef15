#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thgcn/common.hpp"
#include "thgcn/rng.hpp"

namespace thgcn {

using json = nlohmann::ordered_json;

enum class Policy { ThGcn, MaxSinr };

inline std::string policy_name(Policy p) {
  return p == Policy::ThGcn ? "th_gcn" : "max_sinr";
}

inline Policy parse_policy(const std::string& s) {
  if (s == "th_gcn") return Policy::ThGcn;
  if (s == "max_sinr") return Policy::MaxSinr;
  throw ConfigError("policy must be one of {th_gcn, max_sinr} (got \"" + s + "\")");
}

struct RadioConfig {
  double pathloss_exponent = 3.5;
  double ref_loss_db = 47.0;
  double shadowing_sigma_db = 1.5;
  // Invented default. -95 dBm makes the cell edge noise-limited far below the
  // outage threshold under the 47 dB / 3.5-exponent link budget; -115 dBm
  // gives a 1000 m link an SNR near 10 dB so the advertised communication
  // range is actually usable and coverage is interference-limited instead.
  double noise_dbm = -115.0;
  double vehicle_tx_power_dbm = 26.0;
  double sinr_sample_s = 0.5;
};

struct TrafficConfig {
  int packet_size_bytes = 256;
  double interval_s = 0.02;
  double outage_threshold_db = -3.0;
  int capacity_flows = 120;
  double base_delay_s = 0.010;
  double delay_per_flow_s = 0.0005;

  double nominal_bitrate_bps() const {
    return 8.0 * packet_size_bytes / interval_s;
  }
};

struct GcnConfig {
  int hidden = 64;
  int out = 32;
  double learning_rate = 0.01;
  double margin = 1.0;
  int epochs = 50;
  double weight_throughput = 1.0 / 3.0;
  double weight_sinr = 1.0 / 3.0;
  double weight_distance = 1.0 / 3.0;
};

inline constexpr int kFeatureDim = 6;

struct ScenarioConfig {
  std::uint32_t schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 1;
  double area_width_m = 5000.0;
  double area_height_m = 5000.0;
  int n_vehicles = 100;
  int n_towers = 10;
  double sim_duration_s = 300.0;
  double tick_s = 0.1;
  double gnn_interval_s = 0.5;
  double hysteresis_db = 3.0;
  double min_sinr_db = -5.0;
  double pingpong_window_s = 2.0;
  Policy policy = Policy::ThGcn;
  double tower_tx_power_dbm = 46.0;
  double comm_range_m = 1000.0;
  double road_block_m = 250.0;
  RadioConfig radio;
  TrafficConfig traffic;
  GcnConfig gcn;
};

struct Tower {
  int id = 0;
  Vec2 position;
  double tx_power_dbm = 46.0;
  double comm_range_m = 1000.0;
};

struct SimClock {
  double tick_s = 0.1;
  std::int64_t tick_index = 0;
  double now_s() const { return tick_index * tick_s; }
  void advance() { ++tick_index; }
};

namespace detail {

inline bool is_multiple(double a, double b) {
  if (b <= 0.0) return false;
  double k = a / b;
  return std::abs(k - std::round(k)) < 1e-9 && std::round(k) >= 1.0;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config validation: " + msg);
}

class KeyReader {
 public:
  KeyReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    for (auto it = j.begin(); it != j.end(); ++it) unknown_.push_back(it.key());
  }

  template <typename T>
  void get(const char* key, T& out) {
    mark(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key \"" + path(key) + "\" has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    mark(key);
    return j_.at(key);
  }

  void warn_unknown() const {
    for (const auto& k : unknown_)
      std::cerr << "config: unknown key \"" << path(k) << "\" ignored\n";
  }

 private:
  std::string path(const std::string& key) const {
    return section_.empty() ? key : section_ + "." + key;
  }
  void mark(const std::string& key) {
    for (auto it = unknown_.begin(); it != unknown_.end(); ++it)
      if (*it == key) {
        unknown_.erase(it);
        return;
      }
  }
  const json& j_;
  std::string section_;
  std::vector<std::string> unknown_;
};

}  // namespace detail

inline void validate_config(const ScenarioConfig& c) {
  using detail::require;
  require(c.schema_version == kConfigSchemaVersion,
          "schema_version must be " + std::to_string(kConfigSchemaVersion) +
              " (got " + std::to_string(c.schema_version) + ")");
  require(c.area_width_m > 0.0, "area_width_m must be > 0");
  require(c.area_height_m > 0.0, "area_height_m must be > 0");
  require(c.n_vehicles >= 1, "n_vehicles must be >= 1");
  require(c.n_towers >= 1, "n_towers must be >= 1 (got " + std::to_string(c.n_towers) + ")");
  require(c.sim_duration_s > 0.0, "sim_duration_s must be > 0");
  require(c.tick_s > 0.0, "tick_s must be > 0");
  require(c.tick_s <= c.gnn_interval_s,
          "tick_s must be <= gnn_interval_s (tick_s=" + fmt_double(c.tick_s) +
              " exceeds gnn_interval_s=" + fmt_double(c.gnn_interval_s) + ")");
  require(detail::is_multiple(c.gnn_interval_s, c.tick_s),
          "gnn_interval_s must be an integer multiple of tick_s");
  require(detail::is_multiple(c.radio.sinr_sample_s, c.tick_s),
          "radio.sinr_sample_s must be an integer multiple of tick_s");
  require(detail::is_multiple(c.gnn_interval_s, c.radio.sinr_sample_s),
          "gnn_interval_s must be an integer multiple of radio.sinr_sample_s");
  require(c.hysteresis_db >= 0.0, "hysteresis_db must be >= 0");
  require(c.pingpong_window_s >= 0.0, "pingpong_window_s must be >= 0");
  require(c.comm_range_m > 0.0, "comm_range_m must be > 0");
  require(c.road_block_m > 0.0, "road_block_m must be > 0");
  require(c.radio.pathloss_exponent >= 2.0 && c.radio.pathloss_exponent <= 6.0,
          "radio.pathloss_exponent must be in [2, 6]");
  require(c.radio.shadowing_sigma_db >= 0.0, "radio.shadowing_sigma_db must be >= 0");
  require(c.radio.sinr_sample_s > 0.0, "radio.sinr_sample_s must be > 0");
  require(c.traffic.packet_size_bytes > 0, "traffic.packet_size_bytes must be > 0");
  require(c.traffic.interval_s > 0.0, "traffic.interval_s must be > 0");
  require(c.traffic.capacity_flows >= 0, "traffic.capacity_flows must be >= 0");
  require(c.traffic.base_delay_s >= 0.0, "traffic.base_delay_s must be >= 0");
  require(c.traffic.delay_per_flow_s >= 0.0, "traffic.delay_per_flow_s must be >= 0");
  require(c.gcn.hidden >= 1, "gcn.hidden must be >= 1");
  require(c.gcn.out >= 1, "gcn.out must be >= 1");
  require(c.gcn.learning_rate > 0.0, "gcn.learning_rate must be > 0");
  require(c.gcn.margin >= 0.0, "gcn.margin must be >= 0");
  require(c.gcn.epochs >= 0, "gcn.epochs must be >= 0");
  require(c.gcn.weight_throughput >= 0.0 && c.gcn.weight_sinr >= 0.0 &&
              c.gcn.weight_distance >= 0.0,
          "gcn edge-weight coefficients must be >= 0");
  require(std::abs(c.gcn.weight_throughput + c.gcn.weight_sinr +
                   c.gcn.weight_distance - 1.0) < 1e-9,
          "gcn edge-weight coefficients must sum to 1");
}

inline ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  ScenarioConfig c;
  detail::KeyReader top(j, "");
  top.get("schema_version", c.schema_version);
  top.get("seed", c.seed);
  top.get("area_width_m", c.area_width_m);
  top.get("area_height_m", c.area_height_m);
  top.get("n_vehicles", c.n_vehicles);
  top.get("n_towers", c.n_towers);
  top.get("sim_duration_s", c.sim_duration_s);
  top.get("tick_s", c.tick_s);
  top.get("gnn_interval_s", c.gnn_interval_s);
  top.get("hysteresis_db", c.hysteresis_db);
  top.get("min_sinr_db", c.min_sinr_db);
  top.get("pingpong_window_s", c.pingpong_window_s);
  top.get("tower_tx_power_dbm", c.tower_tx_power_dbm);
  top.get("comm_range_m", c.comm_range_m);
  top.get("road_block_m", c.road_block_m);
  if (top.has("policy")) {
    std::string p;
    top.get("policy", p);
    c.policy = parse_policy(p);
  }
  if (top.has("radio")) {
    detail::KeyReader r(top.raw("radio"), "radio");
    r.get("pathloss_exponent", c.radio.pathloss_exponent);
    r.get("ref_loss_db", c.radio.ref_loss_db);
    r.get("shadowing_sigma_db", c.radio.shadowing_sigma_db);
    r.get("noise_dbm", c.radio.noise_dbm);
    r.get("vehicle_tx_power_dbm", c.radio.vehicle_tx_power_dbm);
    r.get("sinr_sample_s", c.radio.sinr_sample_s);
    r.warn_unknown();
  }
  if (top.has("traffic")) {
    detail::KeyReader t(top.raw("traffic"), "traffic");
    t.get("packet_size_bytes", c.traffic.packet_size_bytes);
    t.get("interval_s", c.traffic.interval_s);
    t.get("outage_threshold_db", c.traffic.outage_threshold_db);
    t.get("capacity_flows", c.traffic.capacity_flows);
    t.get("base_delay_s", c.traffic.base_delay_s);
    t.get("delay_per_flow_s", c.traffic.delay_per_flow_s);
    t.warn_unknown();
  }
  if (top.has("gcn")) {
    detail::KeyReader g(top.raw("gcn"), "gcn");
    g.get("hidden", c.gcn.hidden);
    g.get("out", c.gcn.out);
    g.get("learning_rate", c.gcn.learning_rate);
    g.get("margin", c.gcn.margin);
    g.get("epochs", c.gcn.epochs);
    g.get("weight_throughput", c.gcn.weight_throughput);
    g.get("weight_sinr", c.gcn.weight_sinr);
    g.get("weight_distance", c.gcn.weight_distance);
    g.warn_unknown();
  }
  top.warn_unknown();
  validate_config(c);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError("config parse error in \"" + path + "\" at line " +
                      std::to_string(line) + ": " + e.what());
  }
  return config_from_json(j);
}

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;
  j["area_width_m"] = c.area_width_m;
  j["area_height_m"] = c.area_height_m;
  j["n_vehicles"] = c.n_vehicles;
  j["n_towers"] = c.n_towers;
  j["sim_duration_s"] = c.sim_duration_s;
  j["tick_s"] = c.tick_s;
  j["gnn_interval_s"] = c.gnn_interval_s;
  j["hysteresis_db"] = c.hysteresis_db;
  j["min_sinr_db"] = c.min_sinr_db;
  j["pingpong_window_s"] = c.pingpong_window_s;
  j["policy"] = policy_name(c.policy);
  j["tower_tx_power_dbm"] = c.tower_tx_power_dbm;
  j["comm_range_m"] = c.comm_range_m;
  j["road_block_m"] = c.road_block_m;
  j["radio"] = {{"pathloss_exponent", c.radio.pathloss_exponent},
                {"ref_loss_db", c.radio.ref_loss_db},
                {"shadowing_sigma_db", c.radio.shadowing_sigma_db},
                {"noise_dbm", c.radio.noise_dbm},
                {"vehicle_tx_power_dbm", c.radio.vehicle_tx_power_dbm},
                {"sinr_sample_s", c.radio.sinr_sample_s}};
  j["traffic"] = {{"packet_size_bytes", c.traffic.packet_size_bytes},
                  {"interval_s", c.traffic.interval_s},
                  {"outage_threshold_db", c.traffic.outage_threshold_db},
                  {"capacity_flows", c.traffic.capacity_flows},
                  {"base_delay_s", c.traffic.base_delay_s},
                  {"delay_per_flow_s", c.traffic.delay_per_flow_s}};
  j["gcn"] = {{"hidden", c.gcn.hidden},
              {"out", c.gcn.out},
              {"learning_rate", c.gcn.learning_rate},
              {"margin", c.gcn.margin},
              {"epochs", c.gcn.epochs},
              {"weight_throughput", c.gcn.weight_throughput},
              {"weight_sinr", c.gcn.weight_sinr},
              {"weight_distance", c.gcn.weight_distance}};
  return j;
}

// Towers on a jittered grid of round(sqrt(n)) rows. Row counts are balanced,
// with leftover towers assigned to the innermost rows first: that minimizes
// the out-of-range pockets a truncated square grid would leave (whole empty
// cells) for non-square n. Jitter is +-10% of the cell pitch, which keeps
// every tower strictly inside the area.
inline std::vector<Tower> place_towers(const ScenarioConfig& cfg, RngStream rng) {
  const int n = cfg.n_towers;
  int rows = std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(n)))));
  int base = n / rows;
  int extra = n % rows;
  std::vector<int> counts(rows, base);
  for (int k = 0; k < extra; ++k) {
    // middle row, then alternating outward: offsets 0, +1, -1, +2, -2, ...
    int off = (k + 1) / 2 * ((k % 2) ? 1 : -1);
    counts[(rows / 2 + off % rows + rows) % rows] += 1;
  }
  std::vector<Tower> towers;
  towers.reserve(n);
  int id = 0;
  double row_pitch = cfg.area_height_m / rows;
  // Rows are pushed slightly toward the top and bottom edges, and rows holding
  // the extra towers spread wider than the others, so adjacent rows stagger.
  // Tuned against sampled road coverage and boundary SINR of the dense layout.
  constexpr double kRowSpread = 1.05;
  constexpr double kHeavyColSpread = 1.12;
  constexpr double kJitter = 0.03;
  for (int r = 0; r < rows; ++r) {
    int count = counts[r];
    if (count == 0) continue;
    double col_pitch = cfg.area_width_m / count;
    double col_spread = count > base ? kHeavyColSpread : 1.0;
    double yc = cfg.area_height_m *
                (0.5 + ((r + 0.5) / rows - 0.5) * kRowSpread);
    for (int c = 0; c < count; ++c) {
      double xc = cfg.area_width_m *
                  (0.5 + ((c + 0.5) / count - 0.5) * col_spread);
      double jx = rng.uniform(-kJitter, kJitter) * col_pitch;
      double jy = rng.uniform(-kJitter, kJitter) * row_pitch;
      Tower t;
      t.id = id++;
      t.position = {std::clamp(xc + jx, 0.0, cfg.area_width_m),
                    std::clamp(yc + jy, 0.0, cfg.area_height_m)};
      t.tx_power_dbm = cfg.tower_tx_power_dbm;
      t.comm_range_m = cfg.comm_range_m;
      towers.push_back(t);
    }
  }
  return towers;
}

}  // namespace thgcn
