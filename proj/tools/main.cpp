#include "wdn/bnb.hpp"
#include "wdn/hydraulics.hpp"
#include "wdn/network.hpp"
#include "wdn/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct SolveFlags {
  std::string algorithm = "new";
  double time_limit = 0.0;  // 0 = unlimited
  double gap_tol = 1e-4;
  bool absolute_gap = false;
  std::uint64_t seed = 0;
  double beta_oa = 5.0;
  int node_mod_j = 500;
  double k_oa = 1e-3;
  int repair_iters = 50;
  double eps_cut = 1e-6;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& flags) {
  cmd->add_option("--algorithm", flags.algorithm, "Cut scheme: new | previous")
      ->check(CLI::IsMember({"new", "previous"}))
      ->capture_default_str();
  cmd->add_option("--time-limit", flags.time_limit,
                  "Wall-time limit in seconds (0 = unlimited)");
  cmd->add_option("--gap-tol", flags.gap_tol, "Termination gap tolerance")
      ->capture_default_str();
  cmd->add_flag("--absolute-gap", flags.absolute_gap,
                "Interpret --gap-tol as an absolute cost gap");
  cmd->add_option("--seed", flags.seed, "Random seed for the cut gate");
  cmd->add_option("--beta-oa", flags.beta_oa, "Node-cut random-gate weight")
      ->capture_default_str();
  cmd->add_option("--node-mod-j", flags.node_mod_j,
                  "Forced cut/heuristic period in nodes")
      ->capture_default_str();
  cmd->add_option("--k-oa", flags.k_oa,
                  "Objective-change threshold for node cuts")
      ->capture_default_str();
  cmd->add_option("--repair-iters", flags.repair_iters,
                  "Max upgrade steps per repair call")
      ->capture_default_str();
  cmd->add_option("--eps-cut", flags.eps_cut,
                  "Nonlinear deviation needed to add a cut")
      ->capture_default_str();
}

wdn::SolverConfig to_config(const SolveFlags& flags) {
  wdn::SolverConfig cfg;
  cfg.algorithm = flags.algorithm == "previous" ? wdn::Algorithm::Previous
                                                : wdn::Algorithm::New;
  if (flags.time_limit > 0.0) cfg.time_limit = flags.time_limit;
  cfg.gap_tol = flags.gap_tol;
  cfg.gap_is_absolute = flags.absolute_gap;
  cfg.seed = flags.seed;
  cfg.beta_oa = flags.beta_oa;
  cfg.node_mod_j = flags.node_mod_j;
  cfg.k_oa = flags.k_oa;
  cfg.repair_iters = flags.repair_iters;
  cfg.eps_cut = flags.eps_cut;
  return cfg;
}

wdn::Network load_instance(const std::string& path) {
  return wdn::derive_bounds(wdn::parse_network(path));
}

void print_solve_summary(const nlohmann::json& report, std::ostream& out) {
  out << "instance:  " << report["instance"].get<std::string>() << "\n"
      << "status:    " << report["status"].get<std::string>() << "\n";
  if (!report["best_cost"].is_null())
    out << "best cost: " << report["best_cost"].get<double>() << "\n";
  if (!report["lower_bound"].is_null())
    out << "lower bnd: " << report["lower_bound"].get<double>() << "\n";
  if (!report["gap"].is_null())
    out << "gap:       " << report["gap"].get<double>() << "\n";
  out << "nodes:     " << report["nodes_explored"].get<long>() << "\n"
      << "cuts:      " << report["cuts_added"].get<long>() << "\n"
      << "time [s]:  " << report["wall_time"].get<double>() << "\n";
}

int run_solve(const std::string& instance, const SolveFlags& flags,
              const std::string& log_path, const std::string& report_path,
              bool json_out) {
  wdn::Network net = load_instance(instance);
  wdn::SolverConfig cfg = to_config(flags);
  wdn::SolveResult result = wdn::solve_global(net, cfg);
  std::string id = std::filesystem::path(instance).stem().string();
  nlohmann::json report = wdn::make_run_report(net, id, cfg, result);

  if (!log_path.empty()) {
    std::ofstream log(log_path);
    log << result.log.to_csv();
  }
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  if (json_out)
    std::cout << report.dump(2) << "\n";
  else
    print_solve_summary(report, std::cout);
  return 0;
}

int run_check(const std::string& instance, const std::string& design_path,
              bool json_out) {
  wdn::Network net = load_instance(instance);
  wdn::DesignVector design = wdn::parse_design(design_path, net);
  wdn::FeasibilityResult feas = wdn::check_design_feasibility(net, design);
  wdn::DualityReport duality = wdn::evaluate_objectives(net, design, feas.state);
  nlohmann::json report = wdn::make_check_report(net, design, feas, duality);
  if (json_out) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  std::cout << "cost:     " << report["cost"].get<double>() << "\n"
            << "feasible: " << (feas.feasible ? "yes" : "no") << "\n";
  for (const auto& v : report["violations"])
    std::cout << "  violation: " << v["kind"].get<std::string>() << " at "
              << v["entity"].get<std::string>() << " by "
              << v["amount"].get<double>() << "\n";
  std::cout << "f_primal: " << duality.f_primal << "\n"
            << "f_dual:   " << duality.f_dual << "\n"
            << "gap:      " << duality.gap << "\n"
            << "friction/generation/realized/demand power: " << duality.f1
            << " / " << duality.f2 << " / " << duality.f3 << " / "
            << duality.f4 << "\n";
  return 0;
}

int run_enumerate(const std::string& instance, long limit, bool json_out) {
  wdn::Network net = load_instance(instance);
  wdn::EnumerationResult result = wdn::enumerate_designs(net, limit);
  nlohmann::json report = {{"designs_evaluated", result.designs_evaluated},
                           {"feasible", result.feasible}};
  if (result.feasible) {
    report["cost"] = result.cost;
    report["design"] = wdn::design_to_json(net, result.best);
  }
  if (json_out) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  std::cout << "designs evaluated: " << result.designs_evaluated << "\n";
  if (result.feasible)
    std::cout << "optimal cost: " << result.cost << "\n"
              << "design: " << wdn::design_to_json(net, result.best).dump()
              << "\n";
  else
    std::cout << "no feasible design\n";
  return 0;
}

int run_sweep(const std::string& instance, const std::vector<double>& factors,
              const SolveFlags& flags, bool parallel, bool json_out) {
  wdn::Network base = load_instance(instance);
  wdn::SolverConfig cfg = to_config(flags);

  auto solve_factor = [&](double factor) {
    wdn::Network net = wdn::scale_demands(base, factor);
    return wdn::solve_global(net, cfg);
  };

  std::vector<wdn::SolveResult> results(factors.size());
  if (parallel) {
    std::vector<std::future<wdn::SolveResult>> futures;
    for (double f : factors)
      futures.push_back(std::async(std::launch::async, solve_factor, f));
    for (std::size_t i = 0; i < futures.size(); ++i)
      results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < factors.size(); ++i)
      results[i] = solve_factor(factors[i]);
  }

  if (json_out) {
    nlohmann::json out = nlohmann::json::array();
    std::string id = std::filesystem::path(instance).stem().string();
    for (std::size_t i = 0; i < factors.size(); ++i) {
      wdn::Network net = wdn::scale_demands(base, factors[i]);
      nlohmann::json report = wdn::make_run_report(net, id, cfg, results[i]);
      report["demand_factor"] = factors[i];
      out.push_back(std::move(report));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "factor,time,cost,status\n";
  std::ostringstream line;
  line.precision(15);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    line.str("");
    line << factors[i] << "," << results[i].wall_time << ",";
    if (results[i].has_incumbent)
      line << results[i].best_cost;
    line << "," << wdn::status_name(results[i].status);
    std::cout << line.str() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gravity-fed water distribution network design optimizer"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read default flag values from a TOML/INI file");

  SolveFlags flags;
  bool json_out = false;
  std::string instance, design_path, log_path, report_path;
  long limit = 1000000;
  std::vector<double> factors;
  bool parallel = false;

  CLI::App* solve = app.add_subcommand("solve", "Globally optimize a design");
  solve->add_option("instance", instance, "Instance JSON file")->required();
  add_solve_flags(solve, flags);
  solve->add_option("--log", log_path, "Write the convergence log CSV here");
  solve->add_option("--report", report_path, "Write the JSON run report here");
  solve->add_flag("--json", json_out, "Machine-readable JSON on stdout");

  CLI::App* check = app.add_subcommand("check", "Check a fixed design");
  check->add_option("instance", instance, "Instance JSON file")->required();
  check->add_option("design", design_path, "Design JSON file")->required();
  check->add_flag("--json", json_out, "Machine-readable JSON on stdout");

  CLI::App* enumerate = app.add_subcommand("enumerate", "Brute-force optimum");
  enumerate->add_option("instance", instance, "Instance JSON file")->required();
  enumerate->add_option("--limit", limit, "Max design count")
      ->capture_default_str();
  enumerate->add_flag("--json", json_out, "Machine-readable JSON on stdout");

  CLI::App* sweep = app.add_subcommand("sweep", "Demand-scaling sweep");
  sweep->add_option("instance", instance, "Instance JSON file")->required();
  sweep->add_option("--factors", factors, "Demand scale factors")
      ->required()
      ->check(CLI::PositiveNumber);
  add_solve_flags(sweep, flags);
  sweep->add_flag("--parallel", parallel, "Solve factors concurrently");
  sweep->add_flag("--json", json_out, "Machine-readable JSON on stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return run_solve(instance, flags, log_path, report_path, json_out);
    if (check->parsed()) return run_check(instance, design_path, json_out);
    if (enumerate->parsed()) return run_enumerate(instance, limit, json_out);
    if (sweep->parsed())
      return run_sweep(instance, factors, flags, parallel, json_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
