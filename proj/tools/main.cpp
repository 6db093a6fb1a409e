// scfo command-line front end.
//
//   scfo run    one campaign, CSV trace to --out (stdout when absent)
//   scfo grid   experiment grid from --preset or --config, traces and summary.csv under --out
//   scfo table  summarize trace CSV files
//   scfo verify invariant suite; exit code 0 iff every check passes
//
// Trace columns: k, u1..un, phi_true, g1_true.., phi_meas, g1_meas.., K, P,
// eps_min, variant, d1.., binding, event, phi_star, gbar1.., phi_lo1..,
// phi_hi1.., then g<j>_lo<i> and g<j>_hi<i> for the gradient boxes.

#include "scfo/benchmark.hpp"
#include "scfo/config.hpp"
#include "scfo/trace_csv.hpp"
#include "scfo/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace {

using namespace scfo;

struct RunArgs {
  std::string problem = "A";
  std::string config;
  std::string algo = "IT";
  std::string impl = "I";
  double sigma = 0.0;
  double sigma_g = 0.0;
  std::uint64_t seed = 1;
  int k_f = -1;
  double slack_l = 0.0;
  std::vector<std::string> known;
  std::vector<std::string> concave;
  bool reuse_history = false;
  std::string policy;
  std::string out;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

ExperimentCell cell_from_args(const RunArgs& a, const CLI::App& app) {
  ExperimentCell cell;
  if (!a.config.empty()) cell = parse_cell(read_text_file(a.config));
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--problem") || a.config.empty()) {
    if (std::filesystem::exists(a.problem)) {
      cell.definition = load_problem_definition(a.problem);
      cell.problem = cell.definition->name;
      cell.config.k_f = cell.definition->k_f;
    } else {
      benchmark_definition(a.problem);
      cell.problem = a.problem;
      cell.definition.reset();
      cell.config.k_f = a.problem == "A" ? 1000 : 100;
    }
  }
  CampaignConfig& cfg = cell.config;
  if (given("--algo") || a.config.empty()) cfg.algorithm.kind = parse_algorithm(a.algo);
  if (given("--impl") || a.config.empty()) cfg.impl = parse_implementation(a.impl);
  if (given("--sigma")) cfg.sigma = a.sigma;
  if (given("--sigma-g")) cfg.sigma_g = a.sigma_g;
  if (given("--seed")) cfg.seed = a.seed;
  if (a.k_f >= 0) cfg.k_f = a.k_f;
  if (given("--slack-l")) cell.slack_l = a.slack_l;
  if (given("--reuse-history")) cfg.supervisor.reuse_history = a.reuse_history;
  if (!a.policy.empty()) cfg.supervisor.policy = parse_policy(a.policy);
  for (const auto& k : a.known) {
    for (const auto& part : split(k, ',')) cell.known.push_back(part);
  }
  for (const auto& c : a.concave) {
    for (const auto& part : split(c, ',')) {
      const auto ji = split(part, ':');
      if (ji.size() != 2) throw std::invalid_argument("--concave expects j:i pairs, got " + part);
      cell.concave.push_back({std::stoi(ji[0]) - 1, std::stoi(ji[1]) - 1});
    }
  }
  if (cell.label.empty() || !given("--config")) {
    cell.label = cell.problem + "-" + to_string(cfg.algorithm.kind) + "-" + to_string(cfg.impl);
  }
  return cell;
}

int cmd_run(const RunArgs& a, const CLI::App& app) {
  const ExperimentCell cell = cell_from_args(a, app);
  const RtoProblem problem = cell_problem(cell);
  const CampaignConfig cfg = cell_config(cell, problem);
  const CampaignTrace trace = run_campaign(problem, cfg);
  if (a.out.empty()) {
    write_trace_csv(std::cout, trace);
  } else {
    write_trace_csv(a.out, trace);
  }
  const int v = count_violations(trace);
  std::fprintf(stderr, "%s: %zu rows, L = %.6g, violating iterates = %d\n", cell.label.c_str(),
               trace.records.size(), trace.has_truth() ? optimality_loss(trace) : 0.0, v);
  return 0;
}

void write_summary(const std::string& path, const std::vector<ExperimentSummary>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "label,replicates,mean_L,median_L,violations,premature,max_violation_integral,seconds\n";
  char buf[64];
  for (const auto& s : rows) {
    double mvi = 0.0;
    for (double v : s.max_violation_integral) mvi = std::max(mvi, v);
    os << s.label << ',' << s.replicates;
    for (double v : {s.mean_loss, s.median_loss}) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      os << buf;
    }
    os << ',' << s.violations << ',' << s.premature;
    std::snprintf(buf, sizeof(buf), ",%.17g,%.3f\n", mvi, s.seconds);
    os << buf;
  }
}

int cmd_grid(const std::string& preset, const std::string& config, int replicates, std::uint64_t seed_base,
             int k_f, const std::string& out, int jobs) {
  GridSpec grid;
  if (!config.empty()) {
    grid = load_grid(config);
  } else if (!preset.empty()) {
    grid.cells = preset_grid(preset);
  } else {
    throw std::invalid_argument("grid needs --preset or --config");
  }
  if (replicates > 0) grid.replicates = replicates;
  if (seed_base > 0) grid.seed_base = seed_base;
  if (k_f >= 0) {
    for (auto& c : grid.cells) c.config.k_f = k_f;
  }
  const std::string trace_dir = out.empty() ? std::string() : (std::filesystem::path(out) / "traces").string();
  std::vector<ExperimentSummary> results(grid.cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.cells.size(); i = next++) {
      results[i] = run_experiment(grid.cells[i], grid.replicates, trace_dir, grid.seed_base, static_cast<int>(i));
      std::lock_guard<std::mutex> lock(io);
      std::fprintf(stderr, "%-28s median L %12.4f  mean L %12.4f  violations %d  premature %d\n",
                   results[i].label.c_str(), results[i].median_loss, results[i].mean_loss, results[i].violations,
                   results[i].premature);
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(grid.cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_summary((std::filesystem::path(out) / "summary.csv").string(), results);
  }
  return 0;
}

int cmd_table(const std::vector<std::string>& files) {
  std::printf("%-40s %6s %14s %12s %10s\n", "file", "rows", "L", "max_g", "violating");
  for (const auto& f : files) {
    const TraceSummary s = summarize_trace(read_csv(f));
    std::printf("%-40s %6d %14.6g %12.4g %10d\n", std::filesystem::path(f).filename().c_str(), s.iterations,
                s.loss, s.max_g, s.violations);
  }
  return 0;
}

int cmd_verify(bool quick, std::uint64_t seed) {
  VerifyOptions opts;
  opts.quick = quick;
  opts.seed = seed;
  bool all = true;
  for (const auto& r : run_invariant_suite(opts)) {
    std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasible-side real-time optimization supervisor"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one campaign");
  run->add_option("--problem", run_args.problem, "Benchmark name (A, B, B-changing) or problem JSON file");
  run->add_option("--config", run_args.config, "Campaign JSON file; flags override its fields");
  run->add_option("--algo", run_args.algo, "IT, GD, MA, TS or RS");
  run->add_option("--impl", run_args.impl, "Implementation I, II, III or IV");
  run->add_option("--sigma", run_args.sigma, "Gradient noise level");
  run->add_option("--sigma-g", run_args.sigma_g, "Constraint measurement noise level");
  run->add_option("--seed", run_args.seed, "Random seed");
  run->add_option("--kf", run_args.k_f, "Final iteration");
  run->add_option("--slack-l", run_args.slack_l, "Soft-constraint slack level l");
  run->add_option("--known", run_args.known, "Known elements: phi,g1,...");
  run->add_option("--concave", run_args.concave, "Concavity declarations j:i (one based)");
  run->add_flag("--reuse-history", run_args.reuse_history, "Relax the step with past measurements");
  run->add_option("--policy", run_args.policy,
                  "declare-convergence, perturb-and-refine or partial-robustness");
  run->add_option("--out", run_args.out, "Trace CSV path");

  std::string preset, grid_config, grid_out;
  int replicates = 0;
  int grid_kf = -1;
  std::uint64_t seed_base = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* grid = app.add_subcommand("grid", "Run an experiment grid");
  grid->add_option("--preset", preset, "table1 .. table8");
  grid->add_option("--config", grid_config, "Grid JSON file");
  grid->add_option("--replicates", replicates, "Replicates per cell");
  grid->add_option("--seed", seed_base, "Seed base");
  grid->add_option("--kf", grid_kf, "Override the final iteration of every cell");
  grid->add_option("--jobs", jobs, "Worker threads");
  grid->add_option("--out", grid_out, "Output directory");

  std::vector<std::string> files;
  auto* table = app.add_subcommand("table", "Summarize trace CSV files");
  table->add_option("files", files, "Trace CSV files")->required();

  bool quick = false;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_flag("--quick", quick, "Shorter horizons");
  verify->add_option("--seed", verify_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_args, *run);
    if (*grid) return cmd_grid(preset, grid_config, replicates, seed_base, grid_kf, grid_out, jobs);
    if (*table) return cmd_table(files);
    if (*verify) return cmd_verify(quick, verify_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
