#pragma once

#include "wdn/bnb.hpp"
#include "wdn/hydraulics.hpp"
#include "wdn/network.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace wdn {

const char* status_name(SolveStatus status);

/// JSON run report: instance id, config echo, status, best cost/design,
/// final gap, node count, wall time, and the best design's hydraulic state.
nlohmann::json make_run_report(const Network& net, const std::string& instance_id,
                               const SolverConfig& cfg, const SolveResult& result);

/// JSON feasibility verdict with the primal/dual objective values and the
/// power-balance components of a fixed design.
nlohmann::json make_check_report(const Network& net, const DesignVector& design,
                                 const FeasibilityResult& feas,
                                 const DualityReport& duality);

}  // namespace wdn
