#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thgcn/common.hpp"
#include "thgcn/matrix.hpp"
#include "thgcn/mobility.hpp"
#include "thgcn/radio.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

// Versioned description of the node feature layout and edge weight formula.
// Persisted parameters carry its hash so they are never applied to
// embeddings built from a different layout.
inline constexpr const char* kFeatureSpec =
    "d_in=6;vehicle=[speed/50,dir_x,dir_y,x/W,y/H,0];"
    "tower=[load/n_vehicles,x/W,y/H,0,0,1];"
    "edge=ct*that+cs*shat+cd*(1-dhat);that=tp/nominal|0.5*shat;"
    "shat=(sinr+10)/50;dhat=d/range;v1";

inline std::uint64_t feature_spec_hash() { return fnv1a64(kFeatureSpec); }

// Scalar edge weight: convex combination of normalized throughput, SINR and
// proximity. Pairs with no traffic history yet take half the SINR score as a
// throughput proxy so fresh candidate towers are not zero-weighted.
inline double edge_weight(std::optional<double> throughput_bps, double sinr_db,
                          double distance_m, double nominal_bps,
                          double comm_range_m, const GcnConfig& cfg) {
  double shat = clamp01((sinr_db + 10.0) / 50.0);
  double that = throughput_bps.has_value() ? clamp01(*throughput_bps / nominal_bps)
                                           : 0.5 * shat;
  double dhat = clamp01(distance_m / comm_range_m);
  return cfg.weight_throughput * that + cfg.weight_sinr * shat +
         cfg.weight_distance * (1.0 - dhat);
}

struct GraphSnapshot {
  double timestamp_s = 0.0;
  int n_vehicles = 0;
  int n_towers = 0;
  Matrix X;                               // (n_vehicles + n_towers) x 6
  std::vector<std::pair<int, int>> edges; // (vehicle_row, tower_row)
  std::vector<double> edge_weights;
  std::vector<int> serving;               // per vehicle; -1 = none
  std::vector<std::vector<int>> in_range; // per vehicle, tower ids ascending

  int n_nodes() const { return n_vehicles + n_towers; }
  int vehicle_row(int vehicle_id) const { return vehicle_id; }
  int tower_row(int tower_id) const { return n_vehicles + tower_id; }
};

// Node order is vehicles by id then towers by id, so embedding rows stay
// comparable across snapshots.
inline GraphSnapshot build_snapshot(
    double t, const std::vector<VehicleState>& vehicles,
    const std::vector<Tower>& towers, const SinrField& field,
    const std::map<std::pair<int, int>, double>& pair_tp,
    const std::vector<int>& serving, const ScenarioConfig& cfg) {
  GraphSnapshot s;
  s.timestamp_s = t;
  s.n_vehicles = static_cast<int>(vehicles.size());
  s.n_towers = static_cast<int>(towers.size());
  s.X = Matrix(s.n_nodes(), kFeatureDim);
  s.serving = serving;
  s.in_range.resize(s.n_vehicles);

  std::vector<int> load(s.n_towers, 0);
  for (int v = 0; v < s.n_vehicles; ++v)
    if (serving[v] >= 0) ++load[serving[v]];

  for (int v = 0; v < s.n_vehicles; ++v) {
    const auto& veh = vehicles[v];
    double* row = s.X.row(s.vehicle_row(v));
    row[0] = clamp01(veh.speed_mps / 50.0);
    row[1] = veh.heading.x;
    row[2] = veh.heading.y;
    row[3] = clamp01(veh.position.x / cfg.area_width_m);
    row[4] = clamp01(veh.position.y / cfg.area_height_m);
    row[5] = 0.0;
  }
  for (int t_id = 0; t_id < s.n_towers; ++t_id) {
    double* row = s.X.row(s.tower_row(t_id));
    row[0] = clamp01(static_cast<double>(load[t_id]) / cfg.n_vehicles);
    row[1] = clamp01(towers[t_id].position.x / cfg.area_width_m);
    row[2] = clamp01(towers[t_id].position.y / cfg.area_height_m);
    row[3] = 0.0;
    row[4] = 0.0;
    row[5] = 1.0;
  }

  double nominal = cfg.traffic.nominal_bitrate_bps();
  for (int v = 0; v < s.n_vehicles; ++v) {
    for (int t_id = 0; t_id < s.n_towers; ++t_id) {
      if (!field.in_range(v, t_id)) continue;
      s.in_range[v].push_back(t_id);
      std::optional<double> tp;
      auto it = pair_tp.find({v, t_id});
      if (it != pair_tp.end()) tp = it->second;
      double w = edge_weight(tp, *field.sinr_db(v, t_id), field.distance_m(v, t_id),
                             nominal, towers[t_id].comm_range_m, cfg.gcn);
      s.edges.emplace_back(s.vehicle_row(v), s.tower_row(t_id));
      s.edge_weights.push_back(w);
    }
  }
  return s;
}

// Canonical text form (edge list plus node features), used by the inspector
// and by byte-determinism checks.
inline std::string dump_snapshot(const GraphSnapshot& s) {
  std::ostringstream out;
  out << "t=" << fmt_double(s.timestamp_s) << " vehicles=" << s.n_vehicles
      << " towers=" << s.n_towers << "\n";
  out << "edges\n";
  for (std::size_t e = 0; e < s.edges.size(); ++e)
    out << s.edges[e].first << "," << (s.edges[e].second - s.n_vehicles) << ","
        << fmt_double(s.edge_weights[e]) << "\n";
  out << "features\n";
  for (int i = 0; i < s.n_nodes(); ++i) {
    for (int f = 0; f < kFeatureDim; ++f)
      out << (f ? "," : "") << fmt_double(s.X(i, f));
    out << "\n";
  }
  return out.str();
}

}  // namespace thgcn
