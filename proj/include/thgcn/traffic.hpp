#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "thgcn/scenario.hpp"

namespace thgcn {

struct VoipFlow {
  int packet_size_bytes = 256;
  double interval_s = 0.02;
};

struct PacketRecord {
  std::int64_t packet_id = 0;
  int vehicle_id = 0;
  int tower_id = -1;  // -1 = no serving tower at send time
  int size_bytes = 0;
  double send_ts_s = 0.0;
  bool delivered = false;
  double recv_ts_s = 0.0;
};

// Packets at every interval boundary k * interval_s inside [t0, t1).
// next_packet_id is the vehicle's running sequence counter, so consecutive
// windows produce gapless strictly increasing ids.
inline std::vector<PacketRecord> generate_packets(int vehicle_id, int serving_tower,
                                                  const VoipFlow& flow, double t0,
                                                  double t1,
                                                  std::int64_t& next_packet_id) {
  std::vector<PacketRecord> out;
  std::int64_t k0 = static_cast<std::int64_t>(std::ceil(t0 / flow.interval_s - 1e-9));
  std::int64_t k1 = static_cast<std::int64_t>(std::ceil(t1 / flow.interval_s - 1e-9));
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k1 - k0)));
  for (std::int64_t k = k0; k < k1; ++k) {
    PacketRecord p;
    p.packet_id = next_packet_id++;
    p.vehicle_id = vehicle_id;
    p.tower_id = serving_tower;
    p.size_bytes = flow.packet_size_bytes;
    p.send_ts_s = k * flow.interval_s;
    out.push_back(p);
  }
  return out;
}

// Delivery rule: the packet needs a serving tower whose SINR clears the
// outage threshold and whose flow load is within the capacity cap. Delivered
// packets experience the deterministic load-linear delay.
inline void deliver(PacketRecord& p, std::optional<double> sinr_db, int tower_load,
                    const TrafficConfig& cfg) {
  bool ok = p.tower_id >= 0 && sinr_db.has_value() &&
            *sinr_db >= cfg.outage_threshold_db && tower_load <= cfg.capacity_flows;
  p.delivered = ok;
  p.recv_ts_s = ok ? p.send_ts_s + cfg.base_delay_s + cfg.delay_per_flow_s * tower_load
                   : 0.0;
}

// Throughput over a window counts packets by their delivery timestamp.
inline double throughput_bps(const std::vector<PacketRecord>& records, double t0,
                             double t1) {
  if (t1 <= t0) return 0.0;
  double bits = 0.0;
  for (const auto& p : records)
    if (p.delivered && p.recv_ts_s >= t0 && p.recv_ts_s < t1)
      bits += 8.0 * p.size_bytes;
  return bits / (t1 - t0);
}

// Per-pair throughput over a window (normally the last GNN interval); pairs
// with no delivered packets are absent.
inline std::map<std::pair<int, int>, double> pair_throughput(
    const std::vector<PacketRecord>& records, double t0, double t1) {
  std::map<std::pair<int, int>, double> bits;
  for (const auto& p : records)
    if (p.delivered && p.recv_ts_s >= t0 && p.recv_ts_s < t1)
      bits[{p.vehicle_id, p.tower_id}] += 8.0 * p.size_bytes;
  std::map<std::pair<int, int>, double> out;
  for (const auto& [k, b] : bits) out[k] = b / (t1 - t0);
  return out;
}

}  // namespace thgcn
