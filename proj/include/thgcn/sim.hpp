#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thgcn/common.hpp"
#include "thgcn/gcn.hpp"
#include "thgcn/graph.hpp"
#include "thgcn/handover.hpp"
#include "thgcn/metrics.hpp"
#include "thgcn/mobility.hpp"
#include "thgcn/radio.hpp"
#include "thgcn/scenario.hpp"
#include "thgcn/traffic.hpp"
#include "thgcn/training.hpp"

namespace thgcn {

// out_root/<policy>/<density>/<seed>/
inline std::string run_dir_for(const std::string& out_root,
                               const ScenarioConfig& cfg) {
  return out_root + "/" + policy_name(cfg.policy) + "/" +
         std::to_string(cfg.n_vehicles) + "/" + std::to_string(cfg.seed);
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write output file: " + path);
  return out;
}

}  // namespace detail

// Runs one simulation and writes its artifacts under run_dir:
//   report.json            metrics plus the full config echo
//   handover_events.csv    every attach / handover / disconnect
//   loss_curve.csv         per-epoch training loss   (th_gcn only)
//   params.bin             trained GCN parameters    (th_gcn only)
// and with write_traces:
//   mobility_trace.csv, sinr_trace.csv, packet_trace.csv
//
// Tick k covers [k*tick, (k+1)*tick). Each tick: advance mobility, refresh
// SINR measurements on the sampling grid, generate and deliver that tick's
// VoIP packets, then apply the policy's decision block (every GNN interval
// for th_gcn, every sampling instant for max_sinr). Serving-link SINR is
// sampled before decisions so both policies are measured the same way.
inline MetricsReport run_simulation(const ScenarioConfig& cfg,
                                    const std::string& run_dir,
                                    bool write_traces = false,
                                    bool progress = false) {
  namespace fs = std::filesystem;
  const bool th = cfg.policy == Policy::ThGcn;

  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + run_dir + ": " + ec.message());

  // Open every output stream before simulating so unwritable targets fail fast.
  std::ofstream events_out = detail::open_output(run_dir + "/handover_events.csv");
  events_out << event_csv_header() << '\n';
  std::ofstream loss_out, mob_out, sinr_out, pkt_out;
  if (th) {
    loss_out = detail::open_output(run_dir + "/loss_curve.csv");
    loss_out << "interval_ts,epoch,mean_loss,n_triplets\n";
  }
  if (write_traces) {
    mob_out = detail::open_output(run_dir + "/mobility_trace.csv");
    mob_out << "t,vehicle_id,x,y,speed,heading_x,heading_y\n";
    sinr_out = detail::open_output(run_dir + "/sinr_trace.csv");
    sinr_out << "t,vehicle_id,tower_id,distance_m,rx_power_dbm,sinr_db\n";
    pkt_out = detail::open_output(run_dir + "/packet_trace.csv");
    pkt_out << "packet_id,vehicle_id,tower_id,size_bytes,send_ts,delivered,recv_ts\n";
  }

  const std::vector<Tower> towers = place_towers(cfg, rng_stream(cfg.seed, "placement"));
  const RoadNetwork net = generate_road_network(cfg, rng_stream(cfg.seed, "roads"));
  RngStream mobility_rng = rng_stream(cfg.seed, "mobility");
  std::vector<VehicleState> fleet = spawn_vehicles(cfg, net, mobility_rng);
  ShadowField shadow(rng_stream(cfg.seed, "shadowing"),
                     cfg.radio.shadowing_sigma_db, cfg.n_towers);
  RngStream training_rng = rng_stream(cfg.seed, "training");

  GcnParams params;
  if (th) params = init_params(cfg.gcn, training_rng);

  const std::int64_t n_ticks = std::llround(cfg.sim_duration_s / cfg.tick_s);
  const std::int64_t sample_ticks = std::llround(cfg.radio.sinr_sample_s / cfg.tick_s);
  const std::int64_t gnn_ticks = std::llround(cfg.gnn_interval_s / cfg.tick_s);

  std::vector<int> serving(cfg.n_vehicles, -1);
  std::vector<ServingState> states(cfg.n_vehicles);
  for (int v = 0; v < cfg.n_vehicles; ++v) states[v].vehicle_id = v;
  std::vector<std::int64_t> next_packet_id(cfg.n_vehicles, 0);
  std::map<std::pair<int, int>, std::int64_t> pair_bytes;
  RunAccumulator acc;
  acc.duration_s = cfg.sim_duration_s;
  VoipFlow flow{cfg.traffic.packet_size_bytes, cfg.traffic.interval_s};

  SinrField field(cfg.n_vehicles, cfg.n_towers);
  std::vector<std::optional<double>> meas(cfg.n_towers);
  std::vector<double> sim_row(cfg.n_towers);

  auto apply_decision = [&](int v, const Decision& d, double t) {
    if (auto ev = record_event(states[v], d, t, cfg.pingpong_window_s)) {
      acc.add_event(*ev);
      events_out << event_csv_row(*ev, cfg.policy) << '\n';
      serving[v] = states[v].current_tower;
    }
  };

  const std::int64_t progress_every = std::max<std::int64_t>(1, n_ticks / 10);

  for (std::int64_t k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) * cfg.tick_s;
    if (k > 0) step_vehicles(fleet, net, cfg.tick_s, mobility_rng);
    if (progress && k % progress_every == 0)
      std::fprintf(stderr, "  t=%.1fs/%.0fs\n", t, cfg.sim_duration_s);

    if (write_traces)
      for (const auto& v : fleet)
        mob_out << fmt_double(t) << ',' << v.id << ',' << fmt_double(v.position.x)
                << ',' << fmt_double(v.position.y) << ',' << fmt_double(v.speed_mps)
                << ',' << fmt_double(v.heading.x) << ',' << fmt_double(v.heading.y)
                << '\n';

    const bool sample_tick = k % sample_ticks == 0;
    const bool gnn_tick = k % gnn_ticks == 0;
    if (sample_tick) {
      field = measure_all(fleet, towers, cfg.radio, shadow, k / gnn_ticks);
      for (int v = 0; v < cfg.n_vehicles; ++v)
        if (serving[v] >= 0)
          if (auto s = field.sinr_db(v, serving[v]))
            acc.add_serving_sinr_sample(*s);
      if (write_traces)
        for (const auto& row : field.rows())
          sinr_out << fmt_double(t) << ',' << row.vehicle_id << ',' << row.tower_id
                   << ',' << fmt_double(row.distance_m) << ','
                   << fmt_double(row.rx_power_dbm) << ',' << fmt_double(row.sinr_db)
                   << '\n';
    }

    std::vector<int> load(cfg.n_towers, 0);
    for (int v = 0; v < cfg.n_vehicles; ++v)
      if (serving[v] >= 0) ++load[serving[v]];
    for (int v = 0; v < cfg.n_vehicles; ++v) {
      auto packets = generate_packets(v, serving[v], flow, t, t + cfg.tick_s,
                                      next_packet_id[v]);
      for (auto& p : packets) {
        std::optional<double> s;
        if (p.tower_id >= 0) s = field.sinr_db(v, p.tower_id);
        deliver(p, s, p.tower_id >= 0 ? load[p.tower_id] : 0, cfg.traffic);
        acc.add_packet(p);
        if (th && p.delivered) pair_bytes[{v, p.tower_id}] += p.size_bytes;
        if (write_traces)
          pkt_out << p.packet_id << ',' << p.vehicle_id << ',' << p.tower_id << ','
                  << p.size_bytes << ',' << fmt_double(p.send_ts_s) << ','
                  << (p.delivered ? 1 : 0) << ','
                  << (p.delivered ? fmt_double(p.recv_ts_s) : std::string()) << '\n';
      }
    }

    if (th && gnn_tick) {
      const std::int64_t interval_idx = k / gnn_ticks;
      std::map<std::pair<int, int>, double> pair_tp;
      for (const auto& [key, bytes] : pair_bytes)
        pair_tp[key] = 8.0 * static_cast<double>(bytes) / cfg.gnn_interval_s;
      pair_bytes.clear();

      GraphSnapshot snap = build_snapshot(t, fleet, towers, field, pair_tp, serving, cfg);
      TrainResult tr = train_interval(params, snap, cfg.gcn,
                                      training_rng.child("interval", interval_idx));
      for (const EpochStats& e : tr.epochs)
        loss_out << fmt_double(t) << ',' << e.epoch << ',' << fmt_double(e.mean_loss)
                 << ',' << e.n_triplets << '\n';
      save_params(params, run_dir + "/params.bin");

      Matrix emb = forward(snap, params);
      Matrix sim = similarity_matrix(emb, snap);
      for (int v = 0; v < cfg.n_vehicles; ++v) {
        for (int tw = 0; tw < cfg.n_towers; ++tw) {
          meas[tw] = field.sinr_db(v, tw);
          sim_row[tw] = sim(v, tw);
        }
        std::vector<int> omega = rank_top3(sim_row, snap.in_range[v], meas);
        apply_decision(v,
                       decide_th_gcn(omega, meas, serving[v], cfg.hysteresis_db,
                                     cfg.min_sinr_db),
                       t);
      }
    } else if (!th && sample_tick) {
      for (int v = 0; v < cfg.n_vehicles; ++v) {
        for (int tw = 0; tw < cfg.n_towers; ++tw) meas[tw] = field.sinr_db(v, tw);
        apply_decision(v,
                       decide_max_sinr(meas, serving[v], cfg.hysteresis_db,
                                       cfg.min_sinr_db),
                       t);
      }
    }
  }

  MetricsReport report = per_run_report(acc, config_to_json(cfg));
  std::ofstream report_out = detail::open_output(run_dir + "/report.json");
  report_out << report_to_json(report).dump(2) << '\n';
  if (!report_out) throw IoError("short write: " + run_dir + "/report.json");
  return report;
}

}  // namespace thgcn
