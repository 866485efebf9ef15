#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thgcn/metrics.hpp"
#include "thgcn/scenario.hpp"
#include "thgcn/sim.hpp"

namespace fs = std::filesystem;
using namespace thgcn;

namespace {

struct SweepPlan {
  std::string scenario_path;  // empty = built-in defaults
  std::vector<int> densities{100, 400, 700, 1000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> policies{"th_gcn", "max_sinr"};
  std::string output_dir = "out/sweep";
};

SweepPlan load_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open plan file \"" + path + "\"");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("plan parse error in \"" + path + "\": " + std::string(e.what()));
  }

  SweepPlan p;
  static const std::vector<std::string> known = {"scenario", "densities", "seeds",
                                                 "policies", "output_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      std::fprintf(stderr, "plan: unknown key \"%s\" ignored\n", it.key().c_str());

  try {
    if (j.contains("scenario")) {
      // Paths inside the plan resolve relative to the plan file itself.
      fs::path rel = j.at("scenario").get<std::string>();
      p.scenario_path = rel.is_absolute() ? rel.string()
                                          : (fs::path(path).parent_path() / rel).string();
    }
    if (j.contains("densities")) p.densities = j.at("densities").get<std::vector<int>>();
    if (j.contains("seeds")) p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("policies"))
      p.policies = j.at("policies").get<std::vector<std::string>>();
    if (j.contains("output_dir")) p.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("plan \"" + path + "\": " + std::string(e.what()));
  }

  if (p.densities.empty()) throw ConfigError("plan: densities must be non-empty");
  if (p.seeds.empty()) throw ConfigError("plan: seeds must be non-empty");
  if (p.policies.empty()) throw ConfigError("plan: policies must be non-empty");
  for (int d : p.densities)
    if (d < 1) throw ConfigError("plan: densities must be >= 1, got " + std::to_string(d));
  for (const std::string& s : p.policies) parse_policy(s);  // validates
  return p;
}

// --out flag beats THGCN_OUT_DIR beats the configured default.
std::string resolve_out(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("THGCN_OUT_DIR"); env && *env) return env;
  return fallback;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& policy, const std::string& out_flag, bool trace) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (!policy.empty()) cfg.policy = parse_policy(policy);

  std::string run_dir = run_dir_for(resolve_out(out_flag, "out"), cfg);
  std::fprintf(stderr, "simulate: %s, %d vehicles, seed %llu -> %s\n",
               policy_name(cfg.policy).c_str(), cfg.n_vehicles,
               static_cast<unsigned long long>(cfg.seed), run_dir.c_str());
  MetricsReport r = run_simulation(cfg, run_dir, trace, true);
  std::fprintf(stderr, "simulate: wrote %s/report.json (%lld handovers)\n",
               run_dir.c_str(), static_cast<long long>(r.handover_count));
  return 0;
}

struct RunSpec {
  ScenarioConfig cfg;
  std::string run_dir;
};

int cmd_sweep(const std::string& plan_path, const std::string& out_flag, bool resume,
              int jobs) {
  SweepPlan plan = load_plan(plan_path);
  ScenarioConfig base =
      plan.scenario_path.empty() ? ScenarioConfig{} : load_config(plan.scenario_path);
  std::string out = resolve_out(out_flag, plan.output_dir);

  std::vector<RunSpec> specs;
  for (int density : plan.densities)
    for (const std::string& policy : plan.policies)
      for (std::uint64_t seed : plan.seeds) {
        RunSpec s;
        s.cfg = base;
        s.cfg.n_vehicles = density;
        s.cfg.policy = parse_policy(policy);
        s.cfg.seed = seed;
        s.run_dir = run_dir_for(out, s.cfg);
        specs.push_back(std::move(s));
      }

  const std::size_t n = specs.size();
  std::vector<std::optional<MetricsReport>> reports(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> skipped{0};

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const RunSpec& s = specs[i];
      try {
        if (resume && fs::exists(s.run_dir + "/report.json")) {
          try {
            std::ifstream in(s.run_dir + "/report.json");
            reports[i] = report_from_json(nlohmann::json::parse(in));
            skipped.fetch_add(1);
            done.fetch_add(1);
            continue;
          } catch (const std::exception&) {
            // damaged or stale report: redo the run
          }
        }
        auto t0 = std::chrono::steady_clock::now();
        reports[i] = run_simulation(s.cfg, s.run_dir, false, false);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        std::fprintf(stderr, "[%zu/%zu] %s (%.1f s)\n", done.fetch_add(1) + 1, n,
                     s.run_dir.c_str(), secs);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        std::fprintf(stderr, "[%zu/%zu] %s FAILED: %s\n", done.fetch_add(1) + 1, n,
                     s.run_dir.c_str(), e.what());
      }
    }
  };

  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (skipped.load() > 0)
    std::fprintf(stderr, "sweep: reused %zu completed runs\n", skipped.load());

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());

  std::size_t failures = 0;
  {
    std::ofstream runs(out + "/runs.csv", std::ios::trunc);
    if (!runs) throw IoError("cannot write " + out + "/runs.csv");
    runs << runs_csv_header() << '\n';
    std::ofstream fail_out;
    for (std::size_t i = 0; i < n; ++i) {
      if (reports[i]) {
        runs << runs_csv_row(*reports[i]) << '\n';
        continue;
      }
      ++failures;
      if (!fail_out.is_open()) {
        fail_out.open(out + "/failures.csv", std::ios::trunc);
        fail_out << "run_dir,error\n";
      }
      std::string msg = errors[i];
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      fail_out << specs[i].run_dir << ',' << msg << '\n';
    }
  }

  std::ofstream summary(out + "/summary.csv", std::ios::trunc);
  if (!summary) throw IoError("cannot write " + out + "/summary.csv");
  summary << summary_csv_header() << '\n';
  std::vector<std::pair<std::string, AggregateReport>> cells;  // "policy,density"
  for (int density : plan.densities)
    for (const std::string& policy : plan.policies) {
      std::vector<MetricsReport> cell;
      for (std::size_t i = 0; i < n; ++i)
        if (reports[i] && specs[i].cfg.n_vehicles == density &&
            policy_name(specs[i].cfg.policy) == policy)
          cell.push_back(*reports[i]);
      if (cell.size() < 2) {
        std::fprintf(stderr,
                     "sweep: %s density %d has %zu usable runs, too few to aggregate\n",
                     policy.c_str(), density, cell.size());
        continue;
      }
      AggregateReport agg = aggregate(cell);
      summary << summary_csv_rows(agg, policy, density);
      cells.emplace_back(policy + "," + std::to_string(density), std::move(agg));
    }
  summary.close();

  // One file per metric, long format, ready for plotting tools.
  fs::create_directories(out + "/plots", ec);
  if (ec) throw IoError("cannot create " + out + "/plots: " + ec.message());
  for (const MetricField& f : metric_fields()) {
    std::ofstream pf(out + "/plots/" + f.name + ".csv", std::ios::trunc);
    if (!pf) throw IoError(std::string("cannot write plot file for ") + f.name);
    pf << "policy,density,mean,ci95,n\n";
    for (const auto& [key, agg] : cells)
      for (const auto& [name, stat] : agg.metrics)
        if (name == f.name)
          pf << key << ',' << fmt_double(stat.mean) << ',' << fmt_double(stat.ci95)
             << ',' << stat.n << '\n';
  }

  std::fprintf(stderr, "sweep: %zu runs, %zu failed; wrote %s/{runs,summary}.csv\n", n,
               failures, out.c_str());
  return failures == 0 ? 0 : 1;
}

int cmd_inspect(const std::string& run_dir) {
  std::string path = run_dir + "/report.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  MetricsReport r;
  try {
    r = report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report \"" + path + "\": " + std::string(e.what()));
  }

  std::printf("run:        %s\n", run_dir.c_str());
  std::printf("policy:     %s\n", r.config_echo.value("policy", std::string("?")).c_str());
  std::printf("vehicles:   %d\n", r.config_echo.value("n_vehicles", 0));
  std::printf("seed:       %llu\n",
              static_cast<unsigned long long>(r.config_echo.value("seed", 0ULL)));
  std::printf("duration:   %s s\n",
              fmt_double(r.config_echo.value("sim_duration_s", 0.0)).c_str());
  if (r.empty_run) std::printf("note:       empty run (no packets, no SINR samples)\n");
  std::printf("\n");
  for (const MetricField& f : metric_fields())
    std::printf("%-22s %s\n", f.name, fmt_double(f.get(r)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular handover laboratory: graph-learned vs max-SINR policies"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run one simulation");
  std::string sim_config, sim_policy, sim_out;
  std::optional<std::uint64_t> sim_seed;
  bool sim_trace = false;
  sim->add_option("--config", sim_config, "Scenario config JSON")->required();
  sim->add_option("--seed", sim_seed, "Override the config seed");
  sim->add_option("--policy", sim_policy, "Override the policy (th_gcn|max_sinr)");
  sim->add_option("--out", sim_out, "Output root (default: out, or $THGCN_OUT_DIR)");
  sim->add_flag("--trace", sim_trace, "Also write mobility/SINR/packet trace CSVs");

  auto* sweep = app.add_subcommand("sweep", "Run a density x seed x policy sweep");
  std::string sweep_plan, sweep_out;
  bool sweep_resume = false;
  int sweep_jobs = 1;
  sweep->add_option("--plan", sweep_plan, "Sweep plan JSON")->required();
  sweep->add_option("--out", sweep_out, "Output root (overrides plan output_dir)");
  sweep->add_flag("--resume", sweep_resume, "Reuse runs that already have a report");
  sweep->add_option("--jobs", sweep_jobs, "Parallel runs (per-run output is unaffected)")
      ->check(CLI::PositiveNumber);

  auto* inspect = app.add_subcommand("inspect", "Pretty-print a run's report");
  std::string inspect_run;
  inspect->add_option("--run", inspect_run, "Run directory holding report.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_config, sim_seed, sim_policy, sim_out, sim_trace);
    if (sweep->parsed()) return cmd_sweep(sweep_plan, sweep_out, sweep_resume, sweep_jobs);
    return cmd_inspect(inspect_run);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
