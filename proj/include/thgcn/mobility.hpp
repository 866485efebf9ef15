#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "thgcn/common.hpp"
#include "thgcn/rng.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

struct RoadNetwork {
  std::vector<Vec2> waypoints;
  std::vector<std::vector<int>> adjacency;
  int nx = 0;
  int ny = 0;

  std::size_t n_edges() const {
    std::size_t deg = 0;
    for (const auto& a : adjacency) deg += a.size();
    return deg / 2;
  }
};

struct VehicleState {
  int id = 0;
  Vec2 position;
  double speed_mps = 0.0;
  Vec2 heading{1.0, 0.0};
  std::vector<int> route;
  std::size_t route_cursor = 0;  // index of the next waypoint to reach
};

// Manhattan grid: waypoints every road_block_m in both axes, 4-neighbor
// connectivity. The rng parameter is part of the operation contract but the
// grid itself is fully determined by the config.
inline RoadNetwork generate_road_network(const ScenarioConfig& cfg, RngStream /*rng*/) {
  RoadNetwork net;
  net.nx = static_cast<int>(std::floor(cfg.area_width_m / cfg.road_block_m + 1e-9)) + 1;
  net.ny = static_cast<int>(std::floor(cfg.area_height_m / cfg.road_block_m + 1e-9)) + 1;
  net.waypoints.reserve(static_cast<std::size_t>(net.nx) * net.ny);
  for (int iy = 0; iy < net.ny; ++iy)
    for (int ix = 0; ix < net.nx; ++ix)
      net.waypoints.push_back({ix * cfg.road_block_m, iy * cfg.road_block_m});
  net.adjacency.resize(net.waypoints.size());
  auto idx = [&](int ix, int iy) { return iy * net.nx + ix; };
  for (int iy = 0; iy < net.ny; ++iy)
    for (int ix = 0; ix < net.nx; ++ix) {
      if (ix + 1 < net.nx) {
        net.adjacency[idx(ix, iy)].push_back(idx(ix + 1, iy));
        net.adjacency[idx(ix + 1, iy)].push_back(idx(ix, iy));
      }
      if (iy + 1 < net.ny) {
        net.adjacency[idx(ix, iy)].push_back(idx(ix, iy + 1));
        net.adjacency[idx(ix, iy + 1)].push_back(idx(ix, iy));
      }
    }
  for (auto& a : net.adjacency) std::sort(a.begin(), a.end());
  return net;
}

// BFS shortest path; all edges have equal length so hop count order equals
// distance order. Neighbor iteration order is fixed, so paths are
// deterministic.
inline std::vector<int> shortest_path(const RoadNetwork& net, int from, int to) {
  if (from == to) return {from};
  std::vector<int> parent(net.waypoints.size(), -1);
  std::queue<int> q;
  q.push(from);
  parent[from] = from;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : net.adjacency[u]) {
      if (parent[v] != -1) continue;
      parent[v] = u;
      if (v == to) {
        std::vector<int> path;
        for (int w = to; w != from; w = parent[w]) path.push_back(w);
        path.push_back(from);
        std::reverse(path.begin(), path.end());
        return path;
      }
      q.push(v);
    }
  }
  return {};  // unreachable; never happens on a grid
}

namespace detail {

inline void assign_route(VehicleState& v, const RoadNetwork& net, int from, RngStream& rng) {
  int n = static_cast<int>(net.waypoints.size());
  int to = from;
  while (to == from) to = static_cast<int>(rng.uniform_int(n));
  v.route = shortest_path(net, from, to);
  v.route_cursor = 1;
  Vec2 d = net.waypoints[v.route[1]] - v.position;
  double len = norm(d);
  if (len > 0.0) v.heading = d * (1.0 / len);
}

}  // namespace detail

inline std::vector<VehicleState> spawn_vehicles(const ScenarioConfig& cfg,
                                                const RoadNetwork& net,
                                                RngStream& rng) {
  std::vector<VehicleState> fleet;
  fleet.reserve(cfg.n_vehicles);
  int n_wp = static_cast<int>(net.waypoints.size());
  for (int i = 0; i < cfg.n_vehicles; ++i) {
    VehicleState v;
    v.id = i;
    int start = static_cast<int>(rng.uniform_int(n_wp));
    v.position = net.waypoints[start];
    v.speed_mps = rng.uniform(5.0, 25.0);
    detail::assign_route(v, net, start, rng);
    fleet.push_back(std::move(v));
  }
  return fleet;
}

// One random-walk speed perturbation step: +-1 m/s, clamped to [0, 50].
inline double clamped_speed_walk(double speed, double draw_pm1) {
  double s = speed + draw_pm1;
  return std::min(50.0, std::max(0.0, s));
}

inline void step_vehicles(std::vector<VehicleState>& fleet, const RoadNetwork& net,
                          double dt, RngStream& rng) {
  for (auto& v : fleet) {
    double remaining = v.speed_mps * dt;
    while (remaining > 0.0) {
      const Vec2& target = net.waypoints[v.route[v.route_cursor]];
      Vec2 d = target - v.position;
      double len = norm(d);
      if (remaining < len) {
        v.position = v.position + v.heading * remaining;
        remaining = 0.0;
      } else {
        v.position = target;
        remaining -= len;
        ++v.route_cursor;
        if (v.route_cursor >= v.route.size())
          detail::assign_route(v, net, v.route.back(), rng);
        Vec2 nd = net.waypoints[v.route[v.route_cursor]] - v.position;
        double nlen = norm(nd);
        if (nlen > 0.0) v.heading = nd * (1.0 / nlen);
      }
    }
    v.speed_mps = clamped_speed_walk(v.speed_mps, rng.uniform(-1.0, 1.0));
  }
}

}  // namespace thgcn
