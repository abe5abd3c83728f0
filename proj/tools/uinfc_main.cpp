// Command-line front end: single closed-loop runs, parameter sweeps, the
// constructive bound calculator and the built-in validation suite.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "uinfc/config.hpp"
#include "uinfc/validate.hpp"

namespace fs = std::filesystem;
using namespace uinfc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitInfeasible = 4;

const char* verdict_name(StabilityKind k) {
  switch (k) {
    case StabilityKind::stable:
      return "stable";
    case StabilityKind::unstable:
      return "unstable";
    default:
      return "inconclusive";
  }
}

struct RunOutcome {
  StabilityVerdict verdict;
  double final_norm = 0.0;
  double min_V = 0.0;
};

RunOutcome run_one(const ShRunConfig& cfg, const std::string& out_csv) {
  const TrajectoryLog log = simulate(cfg);
  if (!out_csv.empty()) write_csv_file(log, out_csv);
  RunOutcome out;
  out.verdict = check_practical_stability(log, cfg.r);
  out.final_norm = norm(log.rows.back().x);
  double mv = std::numeric_limits<double>::infinity();
  for (const auto& row : log.rows) mv = std::min(mv, row.V);
  out.min_V = mv;
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  const Experiment e = build_experiment(Config::parse_file(config_path));
  const RunOutcome out = run_one(e.run, out_path);
  std::printf("verdict: %s", verdict_name(out.verdict.kind));
  if (out.verdict.kind == StabilityKind::stable) std::printf(" t_entry=%.6g", out.verdict.t_entry);
  std::printf(" final_norm=%.6g min_V=%.6g\n", out.final_norm, out.min_V);
  switch (out.verdict.kind) {
    case StabilityKind::stable:
      return kExitOk;
    case StabilityKind::unstable:
      return kExitUnstable;
    default:
      return kExitInconclusive;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& param_name,
              const std::string& values_csv, const std::string& out_dir, int workers) {
  const SweepParam param = parse_sweep_param(param_name);
  std::vector<double> values;
  {
    std::istringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      values.push_back(std::stod(tok));
    }
  }
  if (values.empty()) throw config_error("sweep: empty values list");

  const Experiment base = build_experiment(Config::parse_file(config_path));
  fs::create_directories(out_dir);

  struct SweepRow {
    double value = 0.0;
    RunOutcome out;
  };
  std::vector<SweepRow> rows(values.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      ShRunConfig cfg = base.run;
      apply_sweep_value(cfg, param, values[i]);
      char name[64];
      std::snprintf(name, sizeof name, "run_%g.csv", values[i]);
      rows[i].value = values[i];
      rows[i].out = run_one(cfg, (fs::path(out_dir) / name).string());
    }
  };
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream summary(fs::path(out_dir) / "summary.csv", std::ios::binary);
  if (!summary) throw config_error("sweep: cannot write summary.csv");
  summary << "value,verdict,T_entry,final_norm,min_V\n";
  char buf[256];
  for (const auto& row : rows) {
    const auto& v = row.out.verdict;
    std::snprintf(buf, sizeof buf, "%g,%s,%.17g,%.17g,%.17g\n", row.value,
                  verdict_name(v.kind),
                  v.kind == StabilityKind::stable ? v.t_entry
                                                  : std::numeric_limits<double>::quiet_NaN(),
                  row.out.final_norm, row.out.min_V);
    summary << buf;
  }
  return kExitOk;
}

int cmd_bounds(const std::string& config_path, const std::string& out_path) {
  const Config c = Config::parse_file(config_path);
  const Experiment e = build_experiment(c);
  BoundsReport rep;
  try {
    rep = compute_bounds(e.clf, e.dyn, e.run.R, e.run.r, e.run.meas_noise.bound,
                         e.run.dist_noise.bound, e.run.params.alpha, e.run.params.input_set,
                         e.est);
  } catch (const infeasibility_error& ex) {
    std::fprintf(stderr, "infeasible: %s\n", ex.what());
    return kExitInfeasible;
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw config_error("bounds: cannot open " + out_path);
    f << to_text(rep);
  } else {
    std::cout << to_text(rep);
  }
  if (!rep.all_satisfied()) {
    const BoundCheck* c0 = rep.first_failed();
    std::fprintf(stderr, "infeasible: binding constraint %s (%.6g %s %.6g)\n", c0->name.c_str(),
                 c0->lhs, c0->strict ? "<" : "<=", c0->rhs);
    return kExitInfeasible;
  }
  std::printf("bounds: all %zu checks satisfied; delta_bar=%.6g eps_bar=%.6g\n",
              rep.checks.size(), rep.delta_bar, rep.eps_bar);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inf-convolution sample-and-hold stabilization under computational uncertainty"};
  app.require_subcommand(1);

  std::string config_path, out_path, out_dir, param_name, values_csv;
  int workers = 0;
  bool list_only = false, corrupt_zeta = false;

  auto* sim = app.add_subcommand("simulate", "run one closed-loop simulation");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_path, "trajectory CSV output path")->required();

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--param", param_name,
                    "one of eps|eta|eps_and_eta|e_bar|q_bar|e_and_q")->required();
  sweep->add_option("--values", values_csv, "comma-separated sweep values")->required();
  sweep->add_option("--out-dir", out_dir, "output directory")->required();
  sweep->add_option("--workers", workers, "parallel jobs (default: CPU count)");

  auto* bounds = app.add_subcommand("bounds", "compute the feasibility bounds report");
  bounds->add_option("--config", config_path, "config file")->required();
  bounds->add_option("--out", out_path, "report output path");

  auto* validate = app.add_subcommand("validate", "run the built-in property suite");
  validate->add_flag("--list", list_only, "list check names without running");
  validate->add_flag("--corrupt-zeta", corrupt_zeta,
                     "corrupt the subgradient to exercise the failure path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_path);
    if (sweep->parsed()) return cmd_sweep(config_path, param_name, values_csv, out_dir, workers);
    if (bounds->parsed()) return cmd_bounds(config_path, out_path);
    if (validate->parsed()) return run_validation(corrupt_zeta, list_only, std::cout);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitError;
  }
  return kExitError;
}
