// Command-line front end: validate / run / audit / sweep / plot.
// Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "safenav/scenario.hpp"

namespace fs = std::filesystem;
using namespace safenav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string fmt_gain(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

// Loads and fully validates; prints findings and converts the error class to
// the exit-code contract.
int load_checked(const std::string& path, Scenario* out) {
  try {
    *out = load_scenario(path);
    return kExitOk;
  } catch (const ScenarioValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

int cmd_validate(const std::string& path) {
  Scenario scenario;
  const int rc = load_checked(path, &scenario);
  if (rc != kExitOk) return rc;
  std::cout << "scenario '" << scenario.name << "': " << scenario.plan.segments()
            << " segments, n=" << scenario.n << ", all validators passed\n";
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& out_dir,
            const SimOverrides& overrides) {
  Scenario scenario;
  const int rc = load_checked(path, &scenario);
  if (rc != kExitOk) return rc;
  try {
    SimResult result = run_scenario(scenario, overrides);
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / "trajectory.csv", std::ios::binary);
      write_csv(result.log, os);
    }
    write_file(fs::path(out_dir) / "summary.json",
               write_summary(result, scenario));
    if (scenario.n >= 2) {
      write_file(fs::path(out_dir) / "plot.svg",
                 render_svg(result.log, scenario));
    }
    std::cout << "outcome: " << to_string(result.outcome) << " after "
              << result.final_t << " s (" << result.log.records.size()
              << " records, wall " << result.wall_time_sec << " s)\n";
    return result.outcome == SimOutcome::kReached ? kExitOk : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

int cmd_audit(const std::string& path, int samples, std::uint64_t seed) {
  Scenario scenario;
  const int rc = load_checked(path, &scenario);
  if (rc != kExitOk) return rc;
  auto model = scenario.make_model();
  AuditReport report = audit_feasibility(scenario.controller, scenario.plan,
                                         *model, samples, seed);
  for (const auto& seg : report.segments) {
    std::cout << "segment " << seg.segment << ": " << seg.random_samples
              << " region samples + " << seg.manifold_samples
              << " manifold probes, " << seg.infeasible << " infeasible, "
              << seg.ill_conditioned << " ill-conditioned"
              << ", min parallel angle " << seg.min_parallel_angle
              << ", min manifold gap " << seg.min_manifold_gap << "\n";
    for (const auto& f : seg.worst) {
      std::ostringstream sp, sv;
      sp << f.p.transpose();
      sv << f.v.transpose();
      std::cout << "  worst: margin " << f.margin << (f.exact ? " (exact)" : "")
                << (f.on_manifold ? " [manifold]" : "") << " at p=[" << sp.str()
                << "] v=[" << sv.str() << "]\n";
    }
  }
  std::cout << "total: " << report.total_samples() << " samples, "
            << report.total_infeasible() << " infeasible, "
            << report.total_ill_conditioned() << " ill-conditioned\n";
  return report.total_infeasible() == 0 ? kExitOk : kExitDomain;
}

int cmd_sweep(const std::string& path, const std::string& out_dir,
              const std::vector<double>& k1s, const std::vector<double>& k2s,
              const SimOverrides& overrides) {
  Scenario scenario;
  const int rc = load_checked(path, &scenario);
  if (rc != kExitOk) return rc;

  struct Cell {
    double k1, k2;
    SimResult result;
    std::string label;
  };
  std::vector<Cell> cells;
  for (double k1 : k1s) {
    for (double k2 : k2s) {
      cells.push_back(
          {k1, k2, {}, "k1=" + fmt_gain(k1) + ",k2=" + fmt_gain(k2)});
    }
  }

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SAFE_NAV_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = static_cast<unsigned>(cap);
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      Scenario local = scenario;
      local.controller.barrier = BarrierGains(cells[i].k1, cells[i].k2);
      cells[i].result = run_scenario(local, overrides);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  bool all_reached = true;
  nlohmann::json summary = nlohmann::json::array();
  std::vector<TrajectoryLog> logs;
  std::vector<std::string> labels;
  for (const auto& cell : cells) {
    const std::string stem =
        "run_k1_" + fmt_gain(cell.k1) + "_k2_" + fmt_gain(cell.k2);
    std::ofstream os(fs::path(out_dir) / (stem + ".csv"), std::ios::binary);
    write_csv(cell.result.log, os);
    summary.push_back({{"k1", cell.k1},
                       {"k2", cell.k2},
                       {"outcome", to_string(cell.result.outcome)},
                       {"final_time", cell.result.final_t},
                       {"csv", stem + ".csv"}});
    logs.push_back(cell.result.log);
    labels.push_back(cell.label);
    if (cell.result.outcome != SimOutcome::kReached) {
      all_reached = false;
      std::cerr << cell.label << ": " << to_string(cell.result.outcome) << "\n";
    }
  }
  if (scenario.n >= 2) {
    write_file(fs::path(out_dir) / "sweep.svg",
               render_sweep_svg(logs, labels, scenario));
  }
  write_file(fs::path(out_dir) / "sweep_summary.json", summary.dump(2) + "\n");
  std::cout << cells.size() << " runs, "
            << (all_reached ? "all reached" : "failures present") << "\n";
  return all_reached ? kExitOk : kExitDomain;
}

int cmd_plot(const std::string& scenario_path, const std::string& csv_path,
             const std::string& out_path, std::pair<int, int> axes) {
  Scenario scenario;
  const int rc = load_checked(scenario_path, &scenario);
  if (rc != kExitOk) return rc;
  std::ifstream is(csv_path, std::ios::binary);
  if (!is) {
    std::cerr << "error: cannot open " << csv_path << "\n";
    return kExitUsage;
  }
  try {
    TrajectoryLog log = read_csv(is);
    write_file(out_path, render_svg(log, scenario, axes));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safe ellipsoid-corridor navigation for Lagrangian systems"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string csv_path;
  std::string out_dir = "out";
  std::string out_file = "plot.svg";
  double dt = 0.0;
  double t_max = 0.0;
  std::uint64_t seed = 0;
  int samples = 10000;
  bool zoh = false;
  std::vector<double> k1s;
  std::vector<double> k2s;
  std::vector<int> axes{0, 1};

  auto* validate =
      app.add_subcommand("validate", "run every validator on a scenario file");
  validate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();

  auto* run =
      app.add_subcommand("run", "simulate a scenario and write artifacts");
  run->add_option("scenario", scenario_path)->required();
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("--dt", dt, "integration step override")
      ->check(CLI::PositiveNumber);
  run->add_option("--t-max", t_max, "time horizon override")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "recorded only; runs are deterministic");
  run->add_flag("--zoh", zoh, "hold u constant over each step");

  auto* audit =
      app.add_subcommand("audit", "sample-based QP feasibility audit");
  audit->add_option("scenario", scenario_path)->required();
  audit->add_option("--samples", samples, "states per segment")
      ->check(CLI::PositiveNumber);
  audit->add_option("--seed", seed, "sampling seed");

  auto* sweep = app.add_subcommand("sweep", "grid of runs over k1 x k2");
  sweep->add_option("scenario", scenario_path)->required();
  sweep->add_option("-o,--out", out_dir, "output directory");
  sweep->add_option("--k1", k1s, "k1 grid values")
      ->delimiter(',')
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--k2", k2s, "k2 grid values")
      ->delimiter(',')
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--dt", dt)->check(CLI::PositiveNumber);
  sweep->add_option("--t-max", t_max)->check(CLI::NonNegativeNumber);

  auto* plot = app.add_subcommand("plot", "re-render a trajectory CSV to SVG");
  plot->add_option("scenario", scenario_path)->required();
  plot->add_option("csv", csv_path, "trajectory CSV")->required();
  plot->add_option("-o,--out", out_file, "output SVG file");
  plot->add_option("--axes", axes, "projection axis pair")
      ->delimiter(',')
      ->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  SimOverrides overrides;
  if (dt > 0.0) overrides.dt = dt;
  if (run->count("--t-max") || sweep->count("--t-max")) overrides.t_max = t_max;
  overrides.zero_order_hold = zoh;

  try {
    if (*validate) return cmd_validate(scenario_path);
    if (*run) return cmd_run(scenario_path, out_dir, overrides);
    if (*audit) return cmd_audit(scenario_path, samples, seed);
    if (*sweep) return cmd_sweep(scenario_path, out_dir, k1s, k2s, overrides);
    if (*plot)
      return cmd_plot(scenario_path, csv_path, out_file, {axes[0], axes[1]});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
