#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "thgcn/common.hpp"
#include "thgcn/handover.hpp"
#include "thgcn/scenario.hpp"
#include "thgcn/traffic.hpp"

namespace thgcn {

struct MetricsReport {
  double avg_sinr_db = 0.0;
  double avg_throughput_bps = 0.0;
  double ptr_pps = 0.0;
  double ptr_bps = 0.0;
  double packet_loss_ratio = 0.0;
  double packet_delivery_ratio = 0.0;
  std::int64_t handover_count = 0;
  std::int64_t pingpong_count = 0;
  bool empty_run = false;
  nlohmann::json config_echo;  // full scenario config plus policy and seed
};

// Streaming tallies so a run never has to keep per-packet records in memory.
struct RunAccumulator {
  double duration_s = 0.0;
  std::int64_t packets_sent = 0;
  std::int64_t packets_delivered = 0;
  std::int64_t delivered_bytes = 0;
  std::int64_t delivered_bytes_recv_in_run = 0;
  double sinr_sum_db = 0.0;
  std::int64_t sinr_samples = 0;
  std::int64_t handover_count = 0;
  std::int64_t pingpong_count = 0;

  void add_packet(const PacketRecord& p) {
    ++packets_sent;
    if (!p.delivered) return;
    ++packets_delivered;
    delivered_bytes += p.size_bytes;
    if (p.recv_ts_s < duration_s) delivered_bytes_recv_in_run += p.size_bytes;
  }

  void add_serving_sinr_sample(double sinr_db) {
    sinr_sum_db += sinr_db;
    ++sinr_samples;
  }

  void add_event(const HandoverEvent& e) {
    if (!is_handover(e)) return;
    ++handover_count;
    if (e.is_pingpong) ++pingpong_count;
  }
};

inline MetricsReport per_run_report(const RunAccumulator& acc,
                                    nlohmann::json config_echo) {
  MetricsReport r;
  r.config_echo = std::move(config_echo);
  r.empty_run = acc.packets_sent == 0 && acc.sinr_samples == 0;
  if (acc.sinr_samples > 0)
    r.avg_sinr_db = acc.sinr_sum_db / static_cast<double>(acc.sinr_samples);
  if (acc.duration_s > 0.0) {
    r.avg_throughput_bps =
        8.0 * static_cast<double>(acc.delivered_bytes_recv_in_run) / acc.duration_s;
    r.ptr_pps = static_cast<double>(acc.packets_delivered) / acc.duration_s;
    r.ptr_bps = 8.0 * static_cast<double>(acc.delivered_bytes) / acc.duration_s;
  }
  if (acc.packets_sent > 0) {
    r.packet_loss_ratio =
        static_cast<double>(acc.packets_sent - acc.packets_delivered) /
        static_cast<double>(acc.packets_sent);
    r.packet_delivery_ratio = 1.0 - r.packet_loss_ratio;
  }
  r.handover_count = acc.handover_count;
  r.pingpong_count = acc.pingpong_count;
  return r;
}

// Named accessors shared by runs.csv, summary.csv and the plot files.
struct MetricField {
  const char* name;
  double (*get)(const MetricsReport&);
};

inline const std::vector<MetricField>& metric_fields() {
  static const std::vector<MetricField> fields = {
      {"avg_sinr_db", [](const MetricsReport& r) { return r.avg_sinr_db; }},
      {"avg_throughput_bps",
       [](const MetricsReport& r) { return r.avg_throughput_bps; }},
      {"ptr_pps", [](const MetricsReport& r) { return r.ptr_pps; }},
      {"ptr_bps", [](const MetricsReport& r) { return r.ptr_bps; }},
      {"packet_loss_ratio",
       [](const MetricsReport& r) { return r.packet_loss_ratio; }},
      {"packet_delivery_ratio",
       [](const MetricsReport& r) { return r.packet_delivery_ratio; }},
      {"handover_count",
       [](const MetricsReport& r) { return static_cast<double>(r.handover_count); }},
      {"pingpong_count",
       [](const MetricsReport& r) { return static_cast<double>(r.pingpong_count); }},
  };
  return fields;
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["empty_run"] = r.empty_run;
  nlohmann::ordered_json m;
  m["avg_sinr_db"] = r.avg_sinr_db;
  m["avg_throughput_bps"] = r.avg_throughput_bps;
  m["ptr_pps"] = r.ptr_pps;
  m["ptr_bps"] = r.ptr_bps;
  m["packet_loss_ratio"] = r.packet_loss_ratio;
  m["packet_delivery_ratio"] = r.packet_delivery_ratio;
  m["handover_count"] = r.handover_count;
  m["pingpong_count"] = r.pingpong_count;
  j["metrics"] = m;
  j["config"] = r.config_echo;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  detail::require(j.is_object(), "report: not a JSON object");
  detail::require(j.contains("metrics") && j["metrics"].is_object(),
                  "report: missing metrics object");
  detail::require(j.contains("config"), "report: missing config echo");
  const auto& m = j["metrics"];
  MetricsReport r;
  r.avg_sinr_db = m.at("avg_sinr_db").get<double>();
  r.avg_throughput_bps = m.at("avg_throughput_bps").get<double>();
  r.ptr_pps = m.at("ptr_pps").get<double>();
  r.ptr_bps = m.at("ptr_bps").get<double>();
  r.packet_loss_ratio = m.at("packet_loss_ratio").get<double>();
  r.packet_delivery_ratio = m.at("packet_delivery_ratio").get<double>();
  r.handover_count = m.at("handover_count").get<std::int64_t>();
  r.pingpong_count = m.at("pingpong_count").get<std::int64_t>();
  r.empty_run = j.value("empty_run", false);
  r.config_echo = j["config"];
  return r;
}

// ---- Aggregation across seeds ----------------------------------------------

inline double t_quantile_975(int dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

struct MetricStat {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width
  int n = 0;
};

inline MetricStat mean_ci95(const std::vector<double>& values) {
  MetricStat s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  double sd = std::sqrt(ss / (s.n - 1));
  s.ci95 = t_quantile_975(s.n - 1) * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

namespace detail {

inline void diff_keys(const nlohmann::json& a, const nlohmann::json& b,
                      const std::string& prefix, std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (!b.contains(it.key()))
        out.push_back(path);
      else
        diff_keys(it.value(), b[it.key()], path, out);
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key()))
        out.push_back(prefix.empty() ? it.key() : prefix + "." + it.key());
    return;
  }
  if (a != b) out.push_back(prefix.empty() ? "<root>" : prefix);
}

inline nlohmann::json config_without_seed(nlohmann::json c) {
  c.erase("seed");
  return c;
}

}  // namespace detail

struct AggregateReport {
  std::vector<std::pair<std::string, MetricStat>> metrics;
};

// Refuses to average runs whose configs differ anywhere but the seed; the
// error names every differing key path.
inline AggregateReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.size() < 2)
    throw ConfigError("aggregate: need at least 2 reports, got " +
                      std::to_string(reports.size()));
  nlohmann::json ref = detail::config_without_seed(reports.front().config_echo);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    nlohmann::json other = detail::config_without_seed(reports[i].config_echo);
    std::vector<std::string> diffs;
    detail::diff_keys(ref, other, "", diffs);
    if (!diffs.empty()) {
      std::string msg = "aggregate: mixed configs; differing keys:";
      for (const std::string& d : diffs) msg += " " + d;
      throw ConfigError(msg);
    }
  }
  AggregateReport agg;
  for (const MetricField& f : metric_fields()) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const MetricsReport& r : reports) values.push_back(f.get(r));
    agg.metrics.emplace_back(f.name, mean_ci95(values));
  }
  return agg;
}

// ---- CSV emission -----------------------------------------------------------

inline std::string runs_csv_header() {
  std::string h = "policy,density,seed";
  for (const MetricField& f : metric_fields()) {
    h += ',';
    h += f.name;
  }
  return h;
}

inline std::string runs_csv_row(const MetricsReport& r) {
  std::ostringstream out;
  out << r.config_echo.value("policy", std::string("?")) << ','
      << r.config_echo.value("n_vehicles", 0) << ','
      << r.config_echo.value("seed", 0ULL);
  for (const MetricField& f : metric_fields()) out << ',' << fmt_double(f.get(r));
  return out.str();
}

inline std::string summary_csv_header() {
  return "metric,policy,density,mean,ci95,n";
}

inline std::string summary_csv_rows(const AggregateReport& agg,
                                    const std::string& policy, int density) {
  std::ostringstream out;
  for (const auto& [name, stat] : agg.metrics)
    out << name << ',' << policy << ',' << density << ','
        << fmt_double(stat.mean) << ',' << fmt_double(stat.ci95) << ','
        << stat.n << '\n';
  return out.str();
}

}  // namespace thgcn
