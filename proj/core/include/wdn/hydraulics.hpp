#pragma once

#include <span>
#include <string>
#include <vector>

#include "wdn/network.hpp"

namespace wdn {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signed flows per arc and heads per node (reservoir entries hold the fixed
/// head) solving conservation plus the head loss equations.
struct HydraulicState {
  std::vector<double> flows;   // indexed like Network::pipes [m^3/s]
  std::vector<double> heads;   // indexed like Network::nodes [m]
  double residual_norm = 0.0;  // max constraint violation at return
  int iterations = 0;
};

/// Primal/dual objective values of the flow-potential pair and the
/// power-balance decomposition of their gap.
struct DualityReport {
  double f_primal = 0.0;
  double f_dual = 0.0;
  double gap = 0.0;  // f_primal - f_dual
  double f1 = 0.0;   // frictional power loss
  double f2 = 0.0;   // power generated at reservoirs
  double f3 = 0.0;   // realized head-differential power loss
  double f4 = 0.0;   // power demanded at junctions
};

struct BoundViolation {
  enum class Kind { FlowAboveMax, FlowBelowMin, HeadBelowMin, HeadAboveMax };
  Kind kind;
  std::string entity;   // pipe or node id
  double amount = 0.0;  // positive violation magnitude
};

struct FeasibilityResult {
  bool feasible = false;
  std::vector<BoundViolation> violations;
  HydraulicState state;
};

struct HydraulicOptions {
  double tol_feas = 1e-8;
  int max_iterations = 100;
  double min_step = 1e-4;
  double q_eps = 1e-7;  // Jacobian regularization near q = 0
};

/// L * r * q * |q|^(alpha-1); odd and strictly increasing in q.
double head_loss(double q, double length, double resistance, double alpha);

HydraulicState solve_fixed_design(const Network& net, const DesignVector& design,
                                  const HydraulicOptions& opts = {});

DualityReport evaluate_objectives(const Network& net, const DesignVector& design,
                                  const HydraulicState& state);

FeasibilityResult check_design_feasibility(const Network& net, const DesignVector& design,
                                           const HydraulicOptions& opts = {});

/// Primal objective evaluated at arbitrary nonnegative directed flows.
double primal_objective(const Network& net, const DesignVector& design,
                        std::span<const double> q_pos, std::span<const double> q_neg);

/// Dual objective evaluated at arbitrary junction heads (heads indexed like
/// Network::nodes; reservoir entries are ignored in favor of fixed heads).
double dual_objective(const Network& net, const DesignVector& design,
                      std::span<const double> heads);

/// The Lagrangian of the fixed-design convex flow problem with conservation
/// multipliers h, evaluated at directed flows q_pos/q_neg.
double lagrangian_value(const Network& net, const DesignVector& design,
                        std::span<const double> q_pos, std::span<const double> q_neg,
                        std::span<const double> heads);

}  // namespace wdn
