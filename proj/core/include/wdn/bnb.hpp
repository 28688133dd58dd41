#pragma once

#include "wdn/formulation.hpp"
#include "wdn/network.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace wdn {

/// "New" appends head-loss, flow-nonlinearity and head-difference-
/// nonlinearity cuts on the exact master; "Previous" runs the older scheme
/// with head-loss cuts only on the relaxed master.
enum class Algorithm { New, Previous };

struct SolverConfig {
  Algorithm algorithm = Algorithm::New;
  double beta_oa = 5.0;   // random-gate weight for node cuts
  int node_mod_j = 500;   // forced node-cut / heuristic period
  double k_oa = 1e-3;     // relative objective-change threshold
  int repair_iters = 50;  // max upgrade steps per repair call
  double eps_cut = 1e-6;  // nonlinear-vs-linear deviation needed to cut
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  double gap_tol = 1e-4;
  bool gap_is_absolute = false;
  std::uint64_t seed = 0;
  long max_nodes = std::numeric_limits<long>::max();
};

enum class SolveStatus { Optimal, TimeLimit, NodeLimit, Infeasible };

struct ConvergenceLog {
  struct Row {
    double time_elapsed = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    long nodes_explored = 0;
  };
  std::vector<Row> rows;

  std::string to_csv() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  bool has_incumbent = false;
  DesignVector best_design;
  double best_cost = std::numeric_limits<double>::infinity();
  double lower_bound = 0.0;
  double gap = std::numeric_limits<double>::infinity();  // per cfg convention
  long nodes_explored = 0;
  long cuts_added = 0;
  double wall_time = 0.0;  // seconds, excluding the initial heuristic
  ConvergenceLog log;
};

/// Global best-bound LP branch-and-bound over the linear master, with exact
/// hydraulic verification at integer nodes and lazily generated cuts.
SolveResult solve_global(const Network& net, const SolverConfig& cfg);

/// Gate deciding whether a fractional node generates cuts: passes when a
/// uniform draw is at most beta_oa * 2^-m and the relative objective change
/// between consecutive nodes is at least k_oa, or unconditionally when
/// forced. m counts unity-valued selection components at the node.
bool node_cut_gate(double eta_prev, double eta_cur, int m, bool force,
                   const SolverConfig& cfg, std::mt19937_64& rng);

/// Runs the node-cut pass on a fractional relaxation point; returns the
/// number of cuts appended to the master.
int node_cuts(MasterProblem& master, const std::vector<double>& point,
              double eta_prev, double eta_cur, int m, bool force,
              const SolverConfig& cfg, std::mt19937_64& rng);

/// Tries to turn an infeasible design feasible by locally upgrading pipes;
/// succeeds only below the incumbent cost.
std::pair<bool, DesignVector> repair_heuristic(const Network& net,
                                               DesignVector design,
                                               int max_iters,
                                               double incumbent_cost);

/// Feasible starting design: every pipe at its largest capacity, then
/// greedy single-step downgrades while feasibility holds. Throws
/// SolverError when even the maximal design is infeasible.
DesignVector initial_solution(const Network& net);

struct EnumerationResult {
  bool feasible = false;
  DesignVector best;
  double cost = std::numeric_limits<double>::infinity();
  long designs_evaluated = 0;
};

/// Brute-force ground truth: simulates every design. Errors when the design
/// count exceeds the limit. Ties broken lexicographically.
EnumerationResult enumerate_designs(const Network& net, long limit);

/// Seeds outer-approximation cuts at half and full range per arc, option
/// and direction (head-loss family always; nonlinearity families on the
/// exact master). Returns the number of cuts added.
int seed_root_cuts(MasterProblem& master);

}  // namespace wdn
