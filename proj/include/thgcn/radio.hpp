#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "thgcn/common.hpp"
#include "thgcn/mobility.hpp"
#include "thgcn/rng.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Log-distance path loss, clamped below the 1 m reference distance.
inline double path_loss_db(double distance_m, const RadioConfig& cfg) {
  return cfg.ref_loss_db +
         10.0 * cfg.pathloss_exponent * std::log10(std::max(distance_m, 1.0));
}

// Log-normal shadowing, frozen per (vehicle, tower) pair for the duration of
// one GNN interval. Values are a pure function of (seed, interval, pair), so
// evaluation order never matters and both policies see the same field.
class ShadowField {
 public:
  ShadowField() = default;
  ShadowField(RngStream stream, double sigma_db, int n_towers)
      : stream_(stream), sigma_db_(sigma_db), n_towers_(n_towers) {}

  double value_db(std::int64_t interval_index, int vehicle_id, int tower_id) const {
    if (sigma_db_ == 0.0) return 0.0;
    RngStream s = stream_.child("interval", static_cast<std::uint64_t>(interval_index))
                      .child("pair", static_cast<std::uint64_t>(vehicle_id) * n_towers_ +
                                         tower_id);
    return sigma_db_ * s.normal();
  }

 private:
  RngStream stream_;
  double sigma_db_ = 0.0;
  int n_towers_ = 0;
};

struct LinkMeasurement {
  int vehicle_id = 0;
  int tower_id = 0;
  double distance_m = 0.0;
  double rx_power_dbm = 0.0;
  double sinr_db = 0.0;
  bool in_range = false;
};

// Per-sample measurement grid over all vehicle-tower pairs. SINR for a pair
// treats that tower as serving and every other in-range tower as interference
// on the same band, all combined in the linear domain.
class SinrField {
 public:
  SinrField() = default;
  SinrField(int n_vehicles, int n_towers)
      : n_vehicles_(n_vehicles),
        n_towers_(n_towers),
        distance_(static_cast<std::size_t>(n_vehicles) * n_towers, 0.0),
        rx_dbm_(static_cast<std::size_t>(n_vehicles) * n_towers, 0.0),
        sinr_db_(static_cast<std::size_t>(n_vehicles) * n_towers, 0.0),
        in_range_(static_cast<std::size_t>(n_vehicles) * n_towers, 0) {}

  int n_vehicles() const { return n_vehicles_; }
  int n_towers() const { return n_towers_; }

  bool in_range(int v, int t) const { return in_range_[at(v, t)] != 0; }
  double distance_m(int v, int t) const { return distance_[at(v, t)]; }
  double rx_power_dbm(int v, int t) const { return rx_dbm_[at(v, t)]; }

  // SINR of the pair; empty when the tower is out of range (no number).
  std::optional<double> sinr_db(int v, int t) const {
    if (t < 0 || t >= n_towers_ || !in_range(v, t)) return std::nullopt;
    return sinr_db_[at(v, t)];
  }

  std::vector<int> in_range_towers(int v) const {
    std::vector<int> out;
    for (int t = 0; t < n_towers_; ++t)
      if (in_range(v, t)) out.push_back(t);
    return out;
  }

  // One row per in-range pair, vehicles-major, for traces and tests.
  std::vector<LinkMeasurement> rows() const {
    std::vector<LinkMeasurement> out;
    for (int v = 0; v < n_vehicles_; ++v)
      for (int t = 0; t < n_towers_; ++t)
        if (in_range(v, t))
          out.push_back({v, t, distance_[at(v, t)], rx_dbm_[at(v, t)],
                         sinr_db_[at(v, t)], true});
    return out;
  }

  friend SinrField measure_all(const std::vector<VehicleState>& vehicles,
                               const std::vector<Tower>& towers,
                               const RadioConfig& cfg, const ShadowField& shadow,
                               std::int64_t interval_index);

 private:
  std::size_t at(int v, int t) const {
    return static_cast<std::size_t>(v) * n_towers_ + t;
  }

  int n_vehicles_ = 0;
  int n_towers_ = 0;
  std::vector<double> distance_;
  std::vector<double> rx_dbm_;
  std::vector<double> sinr_db_;
  std::vector<std::uint8_t> in_range_;
};

inline SinrField measure_all(const std::vector<VehicleState>& vehicles,
                             const std::vector<Tower>& towers,
                             const RadioConfig& cfg, const ShadowField& shadow,
                             std::int64_t interval_index) {
  SinrField f(static_cast<int>(vehicles.size()), static_cast<int>(towers.size()));
  const double noise_lin = db_to_linear(cfg.noise_dbm);
  std::vector<double> rx_lin(towers.size());
  for (int v = 0; v < f.n_vehicles_; ++v) {
    double total_in_range = 0.0;
    for (int t = 0; t < f.n_towers_; ++t) {
      std::size_t i = f.at(v, t);
      double d = distance(vehicles[v].position, towers[t].position);
      f.distance_[i] = d;
      double rx = towers[t].tx_power_dbm - path_loss_db(d, cfg) +
                  shadow.value_db(interval_index, v, t);
      f.rx_dbm_[i] = rx;
      bool in = d <= towers[t].comm_range_m;
      f.in_range_[i] = in ? 1 : 0;
      rx_lin[t] = db_to_linear(rx);
      if (in) total_in_range += rx_lin[t];
    }
    for (int t = 0; t < f.n_towers_; ++t) {
      std::size_t i = f.at(v, t);
      if (!f.in_range_[i]) continue;
      double interference = total_in_range - rx_lin[t];
      f.sinr_db_[i] = linear_to_db(rx_lin[t] / (noise_lin + interference));
    }
  }
  return f;
}

}  // namespace thgcn
