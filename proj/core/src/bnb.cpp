#include "wdn/bnb.hpp"

#include "wdn/hydraulics.hpp"
#include "wdn/lp.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace wdn {

namespace {

double powp(double base, double exp) {
  return base <= 0.0 ? 0.0 : std::pow(base, exp);
}

double format_gap(double lb, double ub, const SolverConfig& cfg) {
  if (!std::isfinite(ub)) return std::numeric_limits<double>::infinity();
  double g = ub - lb;
  if (cfg.gap_is_absolute) return std::max(g, 0.0);
  return std::max(g, 0.0) / std::max(std::abs(ub), 1e-12);
}

}  // namespace

std::string ConvergenceLog::to_csv() const {
  std::ostringstream out;
  out.precision(15);
  out << "time_elapsed,lower_bound,upper_bound,nodes_explored\n";
  for (const auto& row : rows)
    out << row.time_elapsed << "," << row.lower_bound << "," << row.upper_bound
        << "," << row.nodes_explored << "\n";
  return out.str();
}

bool node_cut_gate(double eta_prev, double eta_cur, int m, bool force,
                   const SolverConfig& cfg, std::mt19937_64& rng) {
  if (force) return true;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (uniform(rng) > cfg.beta_oa * std::exp2(-m)) return false;
  double change = eta_prev == 0.0
                      ? std::numeric_limits<double>::infinity()
                      : std::abs((eta_cur - eta_prev) / eta_prev);
  return change >= cfg.k_oa;
}

int node_cuts(MasterProblem& master, const std::vector<double>& point,
              double eta_prev, double eta_cur, int m, bool force,
              const SolverConfig& cfg, std::mt19937_64& rng) {
  if (!node_cut_gate(eta_prev, eta_cur, m, force, cfg, rng)) return 0;
  const Network& net = *master.net;
  const double alpha = net.alpha;
  const bool exact = master.variant == MasterVariant::Exact;
  int added = 0;

  for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a) {
    const Pipe& pipe = net.pipes[a];
    const int num_opts = static_cast<int>(pipe.options.size());
    Direction dir = point[master.y(a)] >= 0.5 ? Direction::Positive
                                              : Direction::Negative;
    auto q_at = [&](int p) {
      return dir == Direction::Positive ? point[master.q_pos(a, p)]
                                        : point[master.q_neg(a, p)];
    };
    auto dh_at = [&](int p) {
      return dir == Direction::Positive ? point[master.dh_pos(a, p)]
                                        : point[master.dh_neg(a, p)];
    };
    auto q_cap = [&](int p) {
      return dir == Direction::Positive ? pipe.options[p].qmax_pos
                                        : pipe.options[p].qmax_neg;
    };

    // Head-loss cut: reference option with the largest relaxed loss term.
    {
      int best = 0;
      double best_term = -1.0;
      for (int p = 0; p < num_opts; ++p) {
        double term = pipe.options[p].resistance * powp(q_at(p), alpha);
        if (term > best_term) { best_term = term; best = p; }
      }
      double nonlinear = pipe.length * pipe.options[best].resistance *
                         powp(q_at(best), alpha);
      if (std::abs(nonlinear - dh_at(best)) > cfg.eps_cut) {
        double ref = std::min(q_at(best), q_cap(best));
        if (master.add_cut(oa_headloss_cut(master, a, best, ref, dir))) ++added;
      }
    }

    if (!exact) continue;

    // Flow-nonlinearity cut.
    {
      int best = 0;
      double best_term = -1.0;
      for (int p = 0; p < num_opts; ++p) {
        double term = pipe.options[p].resistance * powp(q_at(p), 1.0 + alpha);
        if (term > best_term) { best_term = term; best = p; }
      }
      double nonlinear = best_term / (1.0 + alpha);
      if (std::abs(nonlinear - point[master.q_nl(a)]) > cfg.eps_cut) {
        double ref = std::min(q_at(best), q_cap(best));
        if (master.add_cut(qnl_cut(master, a, best, ref, dir))) ++added;
      }
    }

    // Head-difference-nonlinearity cut.
    {
      int best = 0;
      double best_term = -1.0;
      for (int p = 0; p < num_opts; ++p) {
        double term = powp(dh_at(p), 1.0 + 1.0 / alpha) /
                      std::pow(pipe.options[p].resistance, 1.0 / alpha);
        if (term > best_term) { best_term = term; best = p; }
      }
      double nonlinear = best_term / (1.0 + 1.0 / alpha);
      if (std::abs(nonlinear - point[master.dh_nl(a)]) > cfg.eps_cut) {
        const auto& opt = pipe.options[best];
        double cap = dir == Direction::Positive ? opt.dhmax_pos : opt.dhmax_neg;
        double ref = std::min(dh_at(best), cap);
        if (master.add_cut(dhnl_cut(master, a, best, ref, dir))) ++added;
      }
    }
  }
  return added;
}

std::pair<bool, DesignVector> repair_heuristic(const Network& net,
                                               DesignVector design,
                                               int max_iters,
                                               double incumbent_cost) {
  const DesignVector original = design;
  for (int iter = 0; iter < max_iters; ++iter) {
    if (design_cost(net, design) >= incumbent_cost) return {false, original};
    FeasibilityResult fr;
    try {
      fr = check_design_feasibility(net, design);
    } catch (const SolverError&) {
      return {false, original};
    }
    if (fr.feasible) return {true, design};

    auto upgradable = [&](int a) {
      return design.choice[a] + 1 <
             static_cast<int>(net.pipes[a].options.size());
    };

    // Head deficits dominate: trace the delivering path back toward a
    // source and widen its lossiest upgradable pipe.
    int deficit_node = -1;
    double worst = 0.0;
    for (const auto& v : fr.violations)
      if (v.kind == BoundViolation::Kind::HeadBelowMin && v.amount > worst) {
        worst = v.amount;
        deficit_node = net.node_index(v.entity);
      }
    int upgrade_arc = -1;
    if (deficit_node >= 0) {
      const auto& heads = fr.state.heads;
      const auto& flows = fr.state.flows;
      int cur = deficit_node;
      double best_loss = -1.0;
      std::vector<char> visited(net.nodes.size(), 0);
      while (cur >= 0 && !net.nodes[cur].is_reservoir() && !visited[cur]) {
        visited[cur] = 1;
        int next = -1, via = -1;
        double step_loss = -1.0;
        for (int a : net.in_arcs(cur))
          if (flows[a] > 0.0) {
            double loss = heads[net.pipes[a].tail] - heads[cur];
            if (loss > step_loss) { step_loss = loss; via = a; next = net.pipes[a].tail; }
          }
        for (int a : net.out_arcs(cur))
          if (flows[a] < 0.0) {
            double loss = heads[net.pipes[a].head] - heads[cur];
            if (loss > step_loss) { step_loss = loss; via = a; next = net.pipes[a].head; }
          }
        if (via < 0) break;
        if (upgradable(via) && step_loss > best_loss) {
          best_loss = step_loss;
          upgrade_arc = via;
        }
        cur = next;
      }
    } else {
      // Only flow violations remain: widen the most overloaded pipe.
      double worst_flow = 0.0;
      for (const auto& v : fr.violations) {
        if (v.kind != BoundViolation::Kind::FlowAboveMax &&
            v.kind != BoundViolation::Kind::FlowBelowMin)
          continue;
        if (v.amount <= worst_flow) continue;
        for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a)
          if (net.pipes[a].id == v.entity && upgradable(a)) {
            worst_flow = v.amount;
            upgrade_arc = a;
            break;
          }
      }
    }
    if (upgrade_arc < 0) return {false, original};
    ++design.choice[upgrade_arc];
  }
  return {false, original};
}

DesignVector initial_solution(const Network& net) {
  DesignVector design;
  for (const Pipe& pipe : net.pipes)
    design.choice.push_back(static_cast<int>(pipe.options.size()) - 1);

  auto feasible = [&](const DesignVector& d) {
    try {
      return check_design_feasibility(net, d).feasible;
    } catch (const SolverError&) {
      return false;
    }
  };
  if (!feasible(design))
    throw SolverError("instance infeasible at maximum capacity");

  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a) {
      if (design.choice[a] == 0) continue;
      --design.choice[a];
      if (feasible(design))
        changed = true;
      else
        ++design.choice[a];
    }
  }
  return design;
}

EnumerationResult enumerate_designs(const Network& net, long limit) {
  long count = 1;
  for (const Pipe& pipe : net.pipes) {
    count *= static_cast<long>(pipe.options.size());
    if (count > limit || count <= 0)
      throw std::invalid_argument("enumerate_designs: design count exceeds limit");
  }

  EnumerationResult result;
  DesignVector design;
  design.choice.assign(net.pipes.size(), 0);
  while (true) {
    ++result.designs_evaluated;
    bool ok = false;
    try {
      ok = check_design_feasibility(net, design).feasible;
    } catch (const SolverError&) {
      ok = false;
    }
    if (ok) {
      double c = design_cost(net, design);
      // Strict improvement keeps the lexicographically first minimum, since
      // the odometer enumerates designs in lexicographic order.
      if (c < result.cost) {
        result.cost = c;
        result.best = design;
        result.feasible = true;
      }
    }
    int pos = static_cast<int>(design.choice.size()) - 1;
    while (pos >= 0) {
      if (++design.choice[pos] <
          static_cast<int>(net.pipes[pos].options.size()))
        break;
      design.choice[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return result;
}

int seed_root_cuts(MasterProblem& master) {
  const Network& net = *master.net;
  const bool exact = master.variant == MasterVariant::Exact;
  int added = 0;
  for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a) {
    const Pipe& pipe = net.pipes[a];
    for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
      const auto& opt = pipe.options[p];
      for (Direction dir : {Direction::Positive, Direction::Negative}) {
        double qcap = dir == Direction::Positive ? opt.qmax_pos : opt.qmax_neg;
        double dhcap = dir == Direction::Positive ? opt.dhmax_pos : opt.dhmax_neg;
        for (double frac : {0.5, 1.0}) {
          if (qcap > 0.0) {
            if (master.add_cut(oa_headloss_cut(master, a, p, frac * qcap, dir)))
              ++added;
            if (exact &&
                master.add_cut(qnl_cut(master, a, p, frac * qcap, dir)))
              ++added;
          }
          if (exact && dhcap > 0.0 &&
              master.add_cut(dhnl_cut(master, a, p, frac * dhcap, dir)))
            ++added;
        }
      }
    }
  }
  return added;
}

namespace {

struct Node {
  std::vector<std::pair<int, bool>> fixings;  // variable -> fixed value
  SimplexBasis basis;
  double bound = 0.0;
  long id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id < b.id;  // ties: most recent first, reaching depth sooner
  }
};

class Search {
 public:
  Search(const Network& net, const SolverConfig& cfg)
      : net_(net), cfg_(cfg), rng_(cfg.seed) {
    // Node LPs re-solve in few pivots from a parent basis; a warm run that
    // needs thousands signals a stale or numerically bad basis, and a cold
    // solve settles those faster, so keep the warm budget short. The cold
    // budget is larger but still capped: the caller has a sound fallback
    // (keep the parent bound, branch) when even that stalls.
    SimplexSolver::Options warm_opts;
    warm_opts.max_iterations = 5000;
    // Cut rows outnumber structural variables many times over, so the
    // reduced basis factorization is cheap; a short refactor cadence keeps
    // the product-form update file small and the solves fast.
    warm_opts.refactor_every = 24;
    warm_solver_ = SimplexSolver(warm_opts);
    SimplexSolver::Options cold_opts;
    cold_opts.max_iterations = 8000;
    cold_opts.refactor_every = 24;
    solver_ = SimplexSolver(cold_opts);
  }

  SolveResult run();

 private:
  const Network& net_;
  const SolverConfig& cfg_;
  std::mt19937_64 rng_;

  MasterProblem master_;
  LinearProgram lp_;
  SimplexSolver solver_;
  SimplexSolver warm_solver_;
  SolveResult result_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
  double lb_ = -std::numeric_limits<double>::infinity();
  double ub_ = std::numeric_limits<double>::infinity();
  double eta_prev_ = 0.0;
  long next_id_ = 0;
  std::vector<int> slack_streak_;   // consecutive solves with the row slack
  std::size_t purge_watermark_ = 0;  // row count that triggers the next purge
  std::chrono::steady_clock::time_point start_;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }
  void log_bounds() {
    result_.log.rows.push_back(
        {elapsed(), lb_, ub_, result_.nodes_explored});
  }
  void sync_rows() {
    for (std::size_t i = lp_.rows.size(); i < master_.rows.size(); ++i)
      lp_.rows.push_back({master_.rows[i].coeffs, master_.rows[i].sense,
                          master_.rows[i].rhs});
    slack_streak_.resize(lp_.rows.size(), 0);
  }
  // Rows whose logical is basic carried no information in this solve;
  // long runs of that mark a cut as purgeable.
  void note_row_activity(const SimplexBasis& basis) {
    const int n = master_.num_vars();
    std::vector<char> slack(lp_.rows.size(), 0);
    for (int v : basis.basic)
      if (v >= n && v - n < static_cast<int>(slack.size())) slack[v - n] = 1;
    for (std::size_t i = 0; i < slack.size(); ++i)
      slack_streak_[i] = slack[i] ? slack_streak_[i] + 1 : 0;
  }
  void purge_slack_cuts();
  void update_incumbent(const DesignVector& design, double cost) {
    if (cost >= ub_) return;
    ub_ = cost;
    result_.best_design = design;
    result_.best_cost = cost;
    result_.has_incumbent = true;
    log_bounds();
  }
  // Nodes are discarded once they cannot improve the incumbent by more
  // than the optimality tolerance; the final bound is reported against the
  // same threshold, so the proven gap still meets the tolerance.
  double prune_threshold() const {
    if (!std::isfinite(ub_)) return ub_;
    double slack = cfg_.gap_is_absolute
                       ? cfg_.gap_tol
                       : cfg_.gap_tol * std::abs(ub_);
    slack = std::max(slack, 1e-9 * std::max(1.0, std::abs(ub_)));
    return ub_ - 0.9 * slack;
  }
  void raise_lower_bound(double candidate) {
    double clamped = std::min(candidate, ub_);
    if (clamped > lb_ + 1e-12 * std::max(1.0, std::abs(clamped))) {
      lb_ = clamped;
      log_bounds();
    }
  }
  // Tangents at the exact physical state of a feasible design.
  void refresh_cuts(const DesignVector& design, const HydraulicState& state) {
    const bool exact = master_.variant == MasterVariant::Exact;
    for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a) {
      const Pipe& pipe = net_.pipes[a];
      int chosen = design.choice[a];
      const auto& opt = pipe.options[chosen];
      double q = state.flows[a];
      double dh = state.heads[pipe.tail] - state.heads[pipe.head];
      if (q == 0.0) continue;
      Direction dir = q > 0.0 ? Direction::Positive : Direction::Negative;
      double qa = std::min(std::abs(q),
                           dir == Direction::Positive ? opt.qmax_pos : opt.qmax_neg);
      double dha = std::min(std::abs(dh), dir == Direction::Positive
                                              ? opt.dhmax_pos
                                              : opt.dhmax_neg);
      if (master_.add_cut(oa_headloss_cut(master_, a, chosen, qa, dir)))
        ++result_.cuts_added;
      if (exact) {
        if (master_.add_cut(qnl_cut(master_, a, chosen, qa, dir)))
          ++result_.cuts_added;
        if (master_.add_cut(dhnl_cut(master_, a, chosen, dha, dir)))
          ++result_.cuts_added;
      }
    }
    sync_rows();
  }

  // Warm solve with a cold-start fallback when the warm path stalls.
  LpSolution solve_node_lp(const SimplexBasis* warm) {
    LpSolution sol = warm_solver_.solve(lp_, warm);
    if (sol.status == LpStatus::IterationLimit) {
      sol = solver_.solve(lp_);
    }
    if (sol.status == LpStatus::Optimal) note_row_activity(sol.basis);
    return sol;
  }

  void try_design(DesignVector guess) {
    auto [repaired, fixed] =
        repair_heuristic(net_, std::move(guess), cfg_.repair_iters, ub_);
    if (repaired) {
      update_incumbent(fixed, design_cost(net_, fixed));
      try {
        refresh_cuts(fixed, check_design_feasibility(net_, fixed).state);
      } catch (const SolverError&) {
      }
    }
  }

  // Rounds a fractional relaxation point to designs and tries to repair
  // them into an improved incumbent: one deterministic rounding plus a few
  // draws with the relaxation mass as selection probabilities.
  void try_rounding_heuristic(const std::vector<double>& x) {
    const int num_arcs = static_cast<int>(net_.pipes.size());
    DesignVector guess;
    guess.choice.assign(num_arcs, 0);
    for (int a = 0; a < num_arcs; ++a) {
      const int num_opts = static_cast<int>(net_.pipes[a].options.size());
      double threshold = 1.0 / num_opts;
      // Cheapest option with significant relaxation mass; fall back to
      // the option with the most mass.
      int pick = -1;
      int heaviest = 0;
      for (int p = 0; p < num_opts; ++p) {
        double v = x[master_.x(a, p)];
        if (pick < 0 && v >= threshold) pick = p;
        if (v > x[master_.x(a, heaviest)]) heaviest = p;
      }
      guess.choice[a] = pick < 0 ? heaviest : pick;
    }
    try_design(guess);

    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int sample = 0; sample < 3; ++sample) {
      for (int a = 0; a < num_arcs; ++a) {
        const int num_opts = static_cast<int>(net_.pipes[a].options.size());
        double u = uniform(rng_);
        double mass = 0.0;
        guess.choice[a] = num_opts - 1;
        for (int p = 0; p < num_opts; ++p) {
          mass += std::max(x[master_.x(a, p)], 0.0);
          if (u <= mass) { guess.choice[a] = p; break; }
        }
      }
      try_design(guess);
    }
  }

  bool x_integral(const std::vector<double>& x, DesignVector& design) const;
  int most_fractional(const std::vector<double>& x) const;
  int unity_count(const std::vector<double>& x) const;
  void process_node(Node node);
  void handle_stalled_node(const Node& node);
};

// Drops cut rows that have been slack for many consecutive node solves.
// Removing rows from a relaxation can only weaken it, so every node bound
// stays valid; a purged cut that matters again is simply re-separated (the
// duplicate filter forgets purged rows along with the row list). Stored
// bases are remapped; a basis that kept a purged row tight is discarded and
// that node restarts cold.
void Search::purge_slack_cuts() {
  const int n = master_.num_vars();
  const int old_m = static_cast<int>(lp_.rows.size());
  constexpr int kPurgeStreak = 25;
  std::vector<int> newidx(old_m, -1);
  int nm = 0;
  for (int i = 0; i < old_m; ++i) {
    const auto& row = master_.rows[i];
    bool keep = i < static_cast<int>(master_.static_rows) ||
                row.kind == CutKind::NoGood ||
                row.label == "root_objective_bound" ||
                slack_streak_[i] < kPurgeStreak;
    if (keep) newidx[i] = nm++;
  }
  if (nm == old_m) return;

  auto compact = [&](auto& vec) {
    auto copy = std::move(vec);
    vec.clear();
    for (int i = 0; i < old_m; ++i)
      if (newidx[i] >= 0) vec.push_back(std::move(copy[i]));
  };
  compact(master_.rows);
  compact(lp_.rows);
  compact(slack_streak_);
  result_.cuts_added -= old_m - nm;

  auto remap = [&](SimplexBasis& b) {
    if (b.empty()) return;
    const int mb = static_cast<int>(b.basic.size());
    if (mb > old_m) { b = SimplexBasis{}; return; }
    int target = 0;
    for (int i = 0; i < mb; ++i)
      if (newidx[i] >= 0) ++target;
    std::vector<int> nb;
    nb.reserve(target);
    for (int v : b.basic) {
      if (v < n)
        nb.push_back(v);
      else if (int r = v - n; r < old_m && newidx[r] >= 0)
        nb.push_back(n + newidx[r]);
    }
    if (static_cast<int>(nb.size()) != target) { b = SimplexBasis{}; return; }
    std::vector<std::uint8_t> up(n + nm, 0);
    for (int j = 0; j < n && j < static_cast<int>(b.at_upper.size()); ++j)
      up[j] = b.at_upper[j];
    for (int r = 0; r < old_m; ++r)
      if (newidx[r] >= 0 && n + r < static_cast<int>(b.at_upper.size()))
        up[n + newidx[r]] = b.at_upper[n + r];
    b.basic = std::move(nb);
    b.at_upper = std::move(up);
  };
  std::vector<Node> pending;
  pending.reserve(open_.size());
  while (!open_.empty()) {
    pending.push_back(open_.top());
    open_.pop();
  }
  for (Node& node : pending) {
    remap(node.basis);
    open_.push(std::move(node));
  }
}

bool Search::x_integral(const std::vector<double>& x,
                        DesignVector& design) const {
  design.choice.assign(net_.pipes.size(), 0);
  for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a) {
    double best = -1.0;
    for (int p = 0; p < static_cast<int>(net_.pipes[a].options.size()); ++p) {
      double v = x[master_.x(a, p)];
      if (v < -1e-6 || (v > 1e-6 && v < 1.0 - 1e-6)) return false;
      if (v > best) { best = v; design.choice[a] = p; }
    }
  }
  return true;
}

int Search::most_fractional(const std::vector<double>& x) const {
  int best = -1;
  double best_frac = 1e-6;
  for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a)
    for (int p = 0; p < static_cast<int>(net_.pipes[a].options.size()); ++p) {
      int j = master_.x(a, p);
      double frac = std::min(x[j], 1.0 - x[j]);
      if (frac > best_frac) { best_frac = frac; best = j; }
    }
  if (best >= 0) return best;
  for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a) {
    int j = master_.y(a);
    double frac = std::min(x[j], 1.0 - x[j]);
    if (frac > best_frac) { best_frac = frac; best = j; }
  }
  return best;
}

int Search::unity_count(const std::vector<double>& x) const {
  int count = 0;
  for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a)
    for (int p = 0; p < static_cast<int>(net_.pipes[a].options.size()); ++p)
      if (x[master_.x(a, p)] >= 1.0 - 1e-6) ++count;
  return count;
}

// Fallback when a node relaxation exhausts its simplex budget (numerically
// hard LP). The parent bound is still valid, and the objective depends only
// on the selection binaries: a node with a fully fixed selection is
// evaluated exactly by hydraulic simulation, any other node branches on the
// first unfixed selection binary. Correctness is preserved either way; only
// the bound quality at this node suffers.
void Search::handle_stalled_node(const Node& node) {
  if (node.bound >= prune_threshold()) return;

  std::vector<std::uint8_t> fixing(master_.num_vars(), 0);  // 0 free, 1->0, 2->1
  for (auto [var, one] : node.fixings) fixing[var] = one ? 2 : 1;

  const int num_arcs = static_cast<int>(net_.pipes.size());
  std::vector<int> chosen(num_arcs, -1);
  int branch_var = -1;
  for (int a = 0; a < num_arcs; ++a) {
    const int num_opts = static_cast<int>(net_.pipes[a].options.size());
    int zeros = 0, free_opt = -1;
    for (int p = 0; p < num_opts; ++p) {
      switch (fixing[master_.x(a, p)]) {
        case 2: chosen[a] = p; break;
        case 1: ++zeros; break;
        default: if (free_opt < 0) free_opt = p; break;
      }
    }
    if (chosen[a] < 0 && zeros == num_opts - 1) chosen[a] = free_opt;
    if (chosen[a] < 0 && branch_var < 0)
      branch_var = master_.x(a, free_opt);
  }

  if (branch_var >= 0) {
    for (bool one : {false, true}) {
      Node child;
      child.fixings = node.fixings;
      child.fixings.push_back({branch_var, one});
      child.basis = node.basis;
      child.bound = node.bound;
      child.id = next_id_++;
      open_.push(std::move(child));
    }
    return;
  }

  DesignVector design;
  design.choice = chosen;
  double cost = design_cost(net_, design);
  if (cost >= ub_) return;
  try {
    FeasibilityResult fr = check_design_feasibility(net_, design);
    if (fr.feasible) {
      update_incumbent(design, cost);
      refresh_cuts(design, fr.state);
    }
  } catch (const SolverError&) {
  }
}

void Search::process_node(Node node) {
  // After branching the search plunges into one child immediately: its warm
  // basis is the solution just computed, so the re-solve takes few pivots,
  // and dives reach integral designs quickly. Siblings go to the queue.
  for (int plunge = 0;; ++plunge) {
  // Restore the node's variable bounds from the master plus its fixings.
  lp_.lower = master_.lower;
  lp_.upper = master_.upper;
  for (auto [var, one] : node.fixings) {
    lp_.lower[var] = one ? 1.0 : 0.0;
    lp_.upper[var] = one ? 1.0 : 0.0;
  }
  sync_rows();

  LpSolution sol = solve_node_lp(&node.basis);
  ++result_.nodes_explored;
  const long node_index = result_.nodes_explored;

  while (true) {
    if (elapsed() > cfg_.time_limit) return;  // outer loop reports TimeLimit
    if (sol.status == LpStatus::Infeasible) return;
    if (sol.status == LpStatus::IterationLimit) {
      handle_stalled_node(node);
      return;
    }
    double obj = sol.objective;
    if (obj >= prune_threshold()) {
      eta_prev_ = obj;
      return;
    }

    DesignVector design;
    if (x_integral(sol.x, design)) {
      eta_prev_ = obj;
      FeasibilityResult fr;
      bool solved = true;
      try {
        fr = check_design_feasibility(net_, design);
      } catch (const SolverError&) {
        solved = false;
      }
      if (solved && fr.feasible) {
        update_incumbent(design, design_cost(net_, design));
        refresh_cuts(design, fr.state);
        return;
      }
      // Infeasible design: exclude it, then try to repair it into a new
      // incumbent before re-solving this node against the tightened rows.
      master_.add_cut(nogood_cut(master_, design));
      ++result_.cuts_added;
      auto [repaired, fixed] =
          repair_heuristic(net_, design, cfg_.repair_iters, ub_);
      if (repaired) {
        update_incumbent(fixed, design_cost(net_, fixed));
        try {
          refresh_cuts(fixed, check_design_feasibility(net_, fixed).state);
        } catch (const SolverError&) {
        }
      }
      sync_rows();
      sol = solve_node_lp(&sol.basis);
      continue;
    }

    // Fractional node: conditional cut generation and rounding heuristic.
    int m = unity_count(sol.x);
    bool force = cfg_.node_mod_j > 0 && node_index % 4 == 0;
    result_.cuts_added +=
        node_cuts(master_, sol.x, eta_prev_, obj, m, force, cfg_, rng_);
    sync_rows();
    try_rounding_heuristic(sol.x);
    eta_prev_ = obj;

    // Branch on the least-settled arc by splitting its option menu at the
    // relaxation-mass median: each child forbids one half. A dichotomy
    // moves the child relaxations far more than forbidding a single option
    // out of a large menu would.
    int arc = -1;
    double best_frac = 1e-6;
    for (int a = 0; a < static_cast<int>(net_.pipes.size()); ++a) {
      double mx = 0.0;
      for (int p = 0; p < static_cast<int>(net_.pipes[a].options.size()); ++p)
        mx = std::max(mx, sol.x[master_.x(a, p)]);
      if (1.0 - mx > best_frac) { best_frac = 1.0 - mx; arc = a; }
    }
    if (arc >= 0) {
      const int num_opts = static_cast<int>(net_.pipes[arc].options.size());
      std::vector<double> mass(num_opts);
      double total = 0.0;
      int lo_opt = -1, hi_opt = -1;
      for (int p = 0; p < num_opts; ++p) {
        mass[p] = std::max(sol.x[master_.x(arc, p)], 0.0);
        total += mass[p];
        if (mass[p] > 1e-6) {
          if (lo_opt < 0) lo_opt = p;
          hi_opt = p;
        }
      }
      int k = 1;
      double cum = mass[0];
      while (k < num_opts - 1 && cum < 0.5 * total) cum += mass[k++];
      // Both halves must carry relaxation mass, or one child would repeat
      // the parent LP verbatim and the dive would never terminate.
      k = std::clamp(k, lo_opt + 1, hi_opt);
      int heaviest = 0;
      for (int p = 1; p < num_opts; ++p)
        if (mass[p] > mass[heaviest]) heaviest = p;
      int dive_side = heaviest < k ? 1 : 0;  // forbid the lighter half
      std::array<Node, 2> children;
      for (int side = 0; side < 2; ++side) {
        Node& child = children[side];
        child.fixings = node.fixings;
        int lo = side == 0 ? 0 : k;
        int hi = side == 0 ? k : num_opts;
        for (int p = lo; p < hi; ++p)
          child.fixings.push_back({master_.x(arc, p), false});
        child.basis = sol.basis;
        child.bound = obj;
        child.id = next_id_++;
      }
      open_.push(std::move(children[1 - dive_side]));
      if (plunge < 40) {
        node = std::move(children[dive_side]);
        break;
      }
      open_.push(std::move(children[dive_side]));
      return;
    }
    int branch_var = most_fractional(sol.x);
    if (branch_var < 0) {
      // All selections integral with x already handled above: the remaining
      // fractional values were y's within tolerance. Treat as fathomed.
      return;
    }
    const int dive_idx = sol.x[branch_var] > 0.5 ? 1 : 0;
    std::array<Node, 2> children;
    for (int one = 0; one < 2; ++one) {
      Node& child = children[one];
      child.fixings = node.fixings;
      child.fixings.push_back({branch_var, one == 1});
      child.basis = sol.basis;
      child.bound = obj;
      child.id = next_id_++;
    }
    open_.push(std::move(children[1 - dive_idx]));
    if (plunge < 40) {
      node = std::move(children[dive_idx]);
      break;
    }
    open_.push(std::move(children[dive_idx]));
    return;
  }
  }
}

SolveResult Search::run() {
  if (!net_.bounds_derived)
    throw std::invalid_argument("solve_global: derive_bounds must run first");

  // Initial heuristic; its runtime is excluded from the reported wall time.
  try {
    DesignVector d0 = initial_solution(net_);
    result_.best_design = d0;
    result_.best_cost = design_cost(net_, d0);
    result_.has_incumbent = true;
    ub_ = result_.best_cost;
  } catch (const SolverError&) {
  }

  start_ = std::chrono::steady_clock::now();
  master_ = build_master(net_, cfg_.algorithm == Algorithm::New
                                   ? MasterVariant::Exact
                                   : MasterVariant::RelaxedPrevious);
  result_.cuts_added += seed_root_cuts(master_);
  lp_ = to_lp(master_);

  LpSolution root = solver_.solve(lp_);
  if (root.status == LpStatus::IterationLimit)
    throw SolverError("root relaxation hit the simplex iteration limit");

  // Root cutting-plane loop: tighten the relaxation in place while the
  // bound still moves, so branching starts from a strong root. Purely a
  // relaxation of the same feasible set, so the bound stays valid.
  for (int round = 0; root.status == LpStatus::Optimal && round < 60;
       ++round) {
    if (elapsed() > 0.2 * cfg_.time_limit) break;
    int added = node_cuts(master_, root.x, root.objective, root.objective,
                          0, true, cfg_, rng_);
    if (added == 0) break;
    result_.cuts_added += added;
    sync_rows();
    LpSolution next = solve_node_lp(&root.basis);
    if (next.status != LpStatus::Optimal) break;
    double gain = next.objective - root.objective;
    root = std::move(next);
    if (gain < 1e-7 * std::max(1.0, std::abs(root.objective))) break;
  }
  if (root.status == LpStatus::Infeasible) {
    if (result_.has_incumbent) {
      // Should not happen (the incumbent lifts into the master); stay safe.
      lb_ = ub_;
      result_.status = SolveStatus::Optimal;
    } else {
      result_.status = SolveStatus::Infeasible;
      lb_ = std::numeric_limits<double>::infinity();
    }
    log_bounds();
    result_.lower_bound = lb_;
    result_.gap = format_gap(lb_, ub_, cfg_);
    result_.wall_time = elapsed();
    return result_;
  }

  // Root objective bound, imposed as an explicit row on the cost terms.
  {
    LinearCut row;
    row.sense = 'G';
    row.rhs = root.objective;
    for (int j = 0; j < master_.num_vars(); ++j)
      if (master_.objective[j] != 0.0)
        row.coeffs.push_back({j, master_.objective[j]});
    row.label = "root_objective_bound";
    master_.rows.push_back(std::move(row));
    sync_rows();
  }

  lb_ = std::min(root.objective, ub_);
  eta_prev_ = root.objective;
  log_bounds();

  Node root_node;
  root_node.basis = root.basis;
  root_node.bound = root.objective;
  root_node.id = next_id_++;
  open_.push(std::move(root_node));

  purge_watermark_ = std::max<std::size_t>(lp_.rows.size() * 5 / 4,
                                           lp_.rows.size() + 400);
  result_.status = SolveStatus::Optimal;
  while (!open_.empty()) {
    double gap = format_gap(lb_, ub_, cfg_);
    if (result_.has_incumbent && gap <= cfg_.gap_tol) break;
    if (elapsed() > cfg_.time_limit) {
      result_.status = SolveStatus::TimeLimit;
      break;
    }
    if (result_.nodes_explored >= cfg_.max_nodes) {
      result_.status = SolveStatus::NodeLimit;
      break;
    }
    if (lp_.rows.size() > purge_watermark_) {
      purge_slack_cuts();
      purge_watermark_ = std::max<std::size_t>(lp_.rows.size() * 5 / 4,
                                               lp_.rows.size() + 400);
    }
    Node node = open_.top();
    open_.pop();
    raise_lower_bound(node.bound);
    if (node.bound >= prune_threshold()) continue;
    process_node(std::move(node));
  }
  if (open_.empty() && result_.status == SolveStatus::Optimal) {
    if (result_.has_incumbent)
      raise_lower_bound(prune_threshold());
    else {
      result_.status = SolveStatus::Infeasible;
      lb_ = std::numeric_limits<double>::infinity();
    }
  }

  result_.lower_bound = lb_;
  result_.gap = format_gap(lb_, ub_, cfg_);
  result_.wall_time = elapsed();
  if (result_.status == SolveStatus::Optimal && !result_.has_incumbent)
    result_.status = SolveStatus::Infeasible;
  return result_;
}

}  // namespace

SolveResult solve_global(const Network& net, const SolverConfig& cfg) {
  Search search(net, cfg);
  return search.run();
}

}  // namespace wdn
