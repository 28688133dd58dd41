#include "wdn/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace wdn {

namespace {

// JSON has no infinity; non-finite values are reported as null.
nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json design_json(const Network& net, const DesignVector& design) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t a = 0; a < net.pipes.size(); ++a) {
    const auto& opt = net.pipes[a].options[design.choice[a]];
    nlohmann::json entry = {{"option", design.choice[a]},
                            {"resistance", opt.resistance},
                            {"cost_per_length", opt.cost}};
    if (opt.diameter) entry["diameter"] = *opt.diameter;
    out[net.pipes[a].id] = std::move(entry);
  }
  return out;
}

nlohmann::json state_json(const Network& net, const HydraulicState& state) {
  nlohmann::json flows = nlohmann::json::object();
  for (std::size_t a = 0; a < net.pipes.size(); ++a)
    flows[net.pipes[a].id] = state.flows[a];
  nlohmann::json heads = nlohmann::json::object();
  for (int j : net.junctions()) heads[net.nodes[j].id] = state.heads[j];
  return {{"flows", std::move(flows)}, {"junction_heads", std::move(heads)}};
}

nlohmann::json config_json(const SolverConfig& cfg) {
  return {{"algorithm", cfg.algorithm == Algorithm::New ? "new" : "previous"},
          {"beta_oa", cfg.beta_oa},
          {"node_mod_j", cfg.node_mod_j},
          {"k_oa", cfg.k_oa},
          {"repair_iters", cfg.repair_iters},
          {"eps_cut", cfg.eps_cut},
          {"time_limit", number_or_null(cfg.time_limit)},
          {"gap_tol", cfg.gap_tol},
          {"gap_is_absolute", cfg.gap_is_absolute},
          {"seed", cfg.seed}};
}

}  // namespace

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

nlohmann::json make_run_report(const Network& net, const std::string& instance_id,
                               const SolverConfig& cfg, const SolveResult& result) {
  nlohmann::json report = {{"instance", instance_id},
                           {"config", config_json(cfg)},
                           {"status", status_name(result.status)},
                           {"lower_bound", number_or_null(result.lower_bound)},
                           {"gap", number_or_null(result.gap)},
                           {"nodes_explored", result.nodes_explored},
                           {"cuts_added", result.cuts_added},
                           {"wall_time", result.wall_time}};
  if (result.has_incumbent) {
    report["best_cost"] = result.best_cost;
    report["best_design"] = design_json(net, result.best_design);
    try {
      HydraulicState state = solve_fixed_design(net, result.best_design);
      report["best_state"] = state_json(net, state);
    } catch (const SolverError&) {
      report["best_state"] = nullptr;
    }
  } else {
    report["best_cost"] = nullptr;
  }
  return report;
}

nlohmann::json make_check_report(const Network& net, const DesignVector& design,
                                 const FeasibilityResult& feas,
                                 const DualityReport& duality) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : feas.violations) {
    const char* kind = nullptr;
    switch (v.kind) {
      case BoundViolation::Kind::FlowAboveMax: kind = "flow_above_max"; break;
      case BoundViolation::Kind::FlowBelowMin: kind = "flow_below_min"; break;
      case BoundViolation::Kind::HeadBelowMin: kind = "head_below_min"; break;
      case BoundViolation::Kind::HeadAboveMax: kind = "head_above_max"; break;
    }
    violations.push_back({{"kind", kind}, {"entity", v.entity}, {"amount", v.amount}});
  }
  return {{"design", design_json(net, design)},
          {"cost", design_cost(net, design)},
          {"feasible", feas.feasible},
          {"violations", std::move(violations)},
          {"state", state_json(net, feas.state)},
          {"duality",
           {{"f_primal", duality.f_primal},
            {"f_dual", duality.f_dual},
            {"gap", duality.gap},
            {"friction_loss", duality.f1},
            {"generation", duality.f2},
            {"realized_loss", duality.f3},
            {"demand_power", duality.f4}}}};
}

}  // namespace wdn
