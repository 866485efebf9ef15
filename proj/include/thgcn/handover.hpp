#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thgcn/common.hpp"
#include "thgcn/graph.hpp"
#include "thgcn/matrix.hpp"
#include "thgcn/scenario.hpp"

namespace thgcn {

// Cosine similarity with the zero-vector convention: if either vector has
// zero norm the similarity is 0.
inline double cosine_similarity(const double* a, const double* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double s = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(s, -1.0, 1.0);
}

// vehicles x towers cosine similarities between embedding rows.
inline Matrix similarity_matrix(const Matrix& e, const GraphSnapshot& s) {
  Matrix sim(s.n_vehicles, s.n_towers);
  for (int v = 0; v < s.n_vehicles; ++v)
    for (int t = 0; t < s.n_towers; ++t)
      sim(v, t) = cosine_similarity(e.row(s.vehicle_row(v)),
                                    e.row(s.tower_row(t)), e.cols());
  return sim;
}

// In-range towers ordered by similarity descending, ties by higher measured
// SINR then lower id, truncated to the top 3.
inline std::vector<int> rank_top3(
    const std::vector<double>& sim_row, std::vector<int> in_range,
    const std::vector<std::optional<double>>& sinr_by_tower) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::sort(in_range.begin(), in_range.end(), [&](int x, int y) {
    if (sim_row[x] != sim_row[y]) return sim_row[x] > sim_row[y];
    double sx = sinr_by_tower[x] ? *sinr_by_tower[x] : neg_inf;
    double sy = sinr_by_tower[y] ? *sinr_by_tower[y] : neg_inf;
    if (sx != sy) return sx > sy;
    return x < y;
  });
  if (in_range.size() > 3) in_range.resize(3);
  return in_range;
}

enum class DecisionKind { Stay, Handover, Disconnect };

struct Decision {
  DecisionKind kind = DecisionKind::Stay;
  int to_tower = -1;  // valid for Handover
};

namespace detail {

// Shared gate for both policies. `candidates` is an ordered preference list
// of towers with valid measurements.
//  - unserved: attach to the first candidate at or above min_sinr_db
//  - served: hand over only to the top candidate, and only past hysteresis
//  - served below min_sinr_db with no candidate clearing the hysteresis bar:
//    disconnect
inline Decision decide_from_candidates(
    const std::vector<int>& candidates,
    const std::vector<std::optional<double>>& sinr_by_tower, int current,
    double hysteresis_db, double min_sinr_db) {
  if (current < 0) {
    for (int c : candidates)
      if (*sinr_by_tower[c] >= min_sinr_db) return {DecisionKind::Handover, c};
    return {DecisionKind::Stay, -1};
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double cur = sinr_by_tower[current] ? *sinr_by_tower[current] : neg_inf;
  if (!candidates.empty()) {
    int best = candidates.front();
    if (best != current && *sinr_by_tower[best] > cur + hysteresis_db)
      return {DecisionKind::Handover, best};
  }
  if (cur < min_sinr_db) {
    for (int c : candidates)
      if (c != current && *sinr_by_tower[c] > cur + hysteresis_db)
        return {DecisionKind::Stay, -1};
    return {DecisionKind::Disconnect, -1};
  }
  return {DecisionKind::Stay, -1};
}

inline std::vector<int> sinr_ranked_candidates(
    const std::vector<std::optional<double>>& sinr_by_tower) {
  std::vector<int> c;
  for (int t = 0; t < static_cast<int>(sinr_by_tower.size()); ++t)
    if (sinr_by_tower[t]) c.push_back(t);
  std::sort(c.begin(), c.end(), [&](int x, int y) {
    if (*sinr_by_tower[x] != *sinr_by_tower[y])
      return *sinr_by_tower[x] > *sinr_by_tower[y];
    return x < y;
  });
  return c;
}

}  // namespace detail

// Embedding-ranked policy. Candidates are the top-3 similarity towers that
// still have a valid measurement; if none do, fall back to SINR order so a
// vehicle is never stranded on stale embeddings.
inline Decision decide_th_gcn(const std::vector<int>& omega,
                              const std::vector<std::optional<double>>& sinr_by_tower,
                              int current, double hysteresis_db,
                              double min_sinr_db) {
  std::vector<int> candidates;
  for (int t : omega)
    if (sinr_by_tower[t]) candidates.push_back(t);
  if (candidates.empty())
    candidates = detail::sinr_ranked_candidates(sinr_by_tower);
  return detail::decide_from_candidates(candidates, sinr_by_tower, current,
                                        hysteresis_db, min_sinr_db);
}

// Baseline policy: the same gate with candidates ranked purely by SINR.
inline Decision decide_max_sinr(const std::vector<std::optional<double>>& sinr_by_tower,
                                int current, double hysteresis_db,
                                double min_sinr_db) {
  return detail::decide_from_candidates(
      detail::sinr_ranked_candidates(sinr_by_tower), sinr_by_tower, current,
      hysteresis_db, min_sinr_db);
}

struct ServingState {
  int vehicle_id = 0;
  int current_tower = -1;   // -1 = none
  int previous_tower = -1;  // -1 = none
  double last_ho_ts_s = -std::numeric_limits<double>::infinity();
};

struct HandoverEvent {
  double t_s = 0.0;
  int vehicle_id = 0;
  int from_tower = -1;  // -1 = none
  int to_tower = -1;    // -1 = none (disconnect)
  bool is_pingpong = false;
};

// A tower-to-tower transition; attaches and disconnects are tracked as
// events but not counted as handovers.
inline bool is_handover(const HandoverEvent& e) {
  return e.from_tower >= 0 && e.to_tower >= 0;
}

// Applies a decision to the serving state. Stay produces no event. A
// handover back to the previous tower within the ping-pong window is flagged.
inline std::optional<HandoverEvent> record_event(ServingState& state,
                                                 const Decision& d, double t,
                                                 double pingpong_window_s) {
  int to = -1;
  if (d.kind == DecisionKind::Stay) return std::nullopt;
  if (d.kind == DecisionKind::Handover) to = d.to_tower;
  HandoverEvent e;
  e.t_s = t;
  e.vehicle_id = state.vehicle_id;
  e.from_tower = state.current_tower;
  e.to_tower = to;
  e.is_pingpong = is_handover(e) && to == state.previous_tower &&
                  t - state.last_ho_ts_s <= pingpong_window_s;
  state.previous_tower = state.current_tower;
  state.current_tower = to;
  state.last_ho_ts_s = t;
  return e;
}

inline std::string event_csv_header() {
  return "t,vehicle_id,from,to,is_pingpong,policy";
}

inline std::string event_csv_row(const HandoverEvent& e, Policy policy) {
  std::ostringstream out;
  out << fmt_double(e.t_s) << ',' << e.vehicle_id << ',';
  if (e.from_tower >= 0)
    out << e.from_tower;
  else
    out << "none";
  out << ',';
  if (e.to_tower >= 0)
    out << e.to_tower;
  else
    out << "none";
  out << ',' << (e.is_pingpong ? 1 : 0) << ',' << policy_name(policy);
  return out.str();
}

}  // namespace thgcn
