// End-to-end acceptance checks. Each criterion prints a single pass/fail
// line; the process exits nonzero when any criterion fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "wdn/bnb.hpp"
#include "wdn/formulation.hpp"
#include "wdn/hydraulics.hpp"

using namespace wdn;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("criterion %d: %s - %s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double cut_excess(const LinearCut& cut, const std::vector<double>& point) {
  double lhs = 0.0;
  for (auto [j, c] : cut.coeffs) lhs += c * point[j];
  return lhs - cut.rhs;
}

// Exact nonlinear point for one arc: option p carries signed flow q.
std::vector<double> surface_point(const MasterProblem& mp, int arc, int p,
                                  double q) {
  const Pipe& pipe = mp.net->pipes[arc];
  const double alpha = mp.net->alpha;
  double r = pipe.options[p].resistance;
  std::vector<double> v(mp.num_vars(), 0.0);
  v[mp.x(arc, p)] = 1.0;
  v[mp.y(arc)] = q >= 0.0 ? 1.0 : 0.0;
  double dh = pipe.length * r * q * std::pow(std::abs(q), alpha - 1.0);
  v[mp.q_pos(arc, p)] = std::max(q, 0.0);
  v[mp.q_neg(arc, p)] = std::max(-q, 0.0);
  v[mp.dh_pos(arc, p)] = std::max(dh, 0.0);
  v[mp.dh_neg(arc, p)] = std::max(-dh, 0.0);
  v[mp.q_nl(arc)] = r * std::pow(std::abs(q), 1.0 + alpha) / (1.0 + alpha);
  v[mp.dh_nl(arc)] = alpha / (1.0 + alpha) *
                     std::pow(std::abs(dh), 1.0 + 1.0 / alpha) /
                     std::pow(r, 1.0 / alpha);
  return v;
}

void criterion_1_benchmark() {
  Network net =
      derive_bounds(parse_network(std::string(WDN_DATA_DIR) + "/shamir.json"));
  SolverConfig cfg;
  cfg.seed = 1;
  cfg.time_limit = 1800.0;
  cfg.gap_tol = 1e-4;
  SolveResult res = solve_global(net, cfg);
  bool pass = res.status == SolveStatus::Optimal && res.has_incumbent &&
              std::abs(res.best_cost - 419000.0) <= 1.0 &&
              res.gap <= 1e-4 + 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "two-loop benchmark cost %.2f, gap %.2e, %.1fs, %ld nodes",
                res.best_cost, res.gap, res.wall_time, res.nodes_explored);
  report(1, pass, buf);
}

void criterion_2_random_instances() {
  std::mt19937_64 rng(31337);
  int matched = 0, total = 20;
  bool ok = true;
  for (int i = 0; i < total; ++i) {
    Network net = test::random_instance(rng);
    EnumerationResult truth = enumerate_designs(net, 1000);
    bool solver_feasible = true;
    SolveResult res;
    try {
      SolverConfig cfg;
      cfg.seed = 1 + i;
      res = solve_global(net, cfg);
      solver_feasible = res.status != SolveStatus::Infeasible;
    } catch (const SolverError&) {
      solver_feasible = false;
    }
    bool match = solver_feasible == truth.feasible &&
                 (!truth.feasible ||
                  std::abs(res.best_cost - truth.cost) <=
                      1e-6 * std::max(1.0, std::abs(truth.cost)));
    if (match) ++matched;
    ok = ok && match;
  }
  report(2, ok, "solver agrees with exhaustive enumeration on " +
                    std::to_string(matched) + "/" + std::to_string(total) +
                    " random instances");
}

void criterion_3_strong_duality() {
  Network net = test::five_arc_network();
  std::mt19937_64 rng(5);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    DesignVector d;
    for (const Pipe& p : net.pipes)
      d.choice.push_back(static_cast<int>(rng() % p.options.size()));
    HydraulicState st = solve_fixed_design(net, d);
    DualityReport rep = evaluate_objectives(net, d, st);
    double rel = std::abs(rep.gap) / std::max(1.0, std::abs(rep.f_primal));
    worst = std::max(worst, rel);
    ok = ok && rel <= 1e-6;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "primal and dual objectives agree at equilibrium "
                "(worst relative gap %.2e)",
                worst);
  report(3, ok, buf);
}

void criterion_4_dual_cross_check() {
  Network net = test::five_arc_network();
  DesignVector d{{0, 1, 2, 0, 1}};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> head(40.0, 110.0);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> heads(net.nodes.size(), 0.0);
    for (int j : net.junctions()) heads[j] = head(rng);
    double lib = dual_objective(net, d, heads);
    double oracle = test::dual_objective_oracle(net, d, heads);
    double rel = std::abs(lib - oracle) / std::max(1.0, std::abs(oracle));
    worst = std::max(worst, rel);
    ok = ok && rel <= 1e-4;
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "dual objective matches golden-section minimization on 20 "
                "head vectors (worst %.2e)",
                worst);
  report(4, ok, buf);
}

void criterion_5_cut_validity() {
  Network net = test::five_arc_network();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int num_arcs = static_cast<int>(net.pipes.size());
  bool ok = true;
  double worst = 0.0;
  for (int sample = 0; sample < 10000; ++sample) {
    int arc = static_cast<int>(rng() % num_arcs);
    const Pipe& pipe = net.pipes[arc];
    int num_opts = static_cast<int>(pipe.options.size());
    int ref = static_cast<int>(rng() % num_opts);
    Direction dir = rng() % 2 ? Direction::Positive : Direction::Negative;
    const auto& ropt = pipe.options[ref];
    double qref = u01(rng) * (dir == Direction::Positive ? ropt.qmax_pos
                                                         : ropt.qmax_neg);
    double dhref = u01(rng) * (dir == Direction::Positive ? ropt.dhmax_pos
                                                          : ropt.dhmax_neg);
    LinearCut cuts[] = {oa_headloss_cut(mp, arc, ref, qref, dir),
                        qnl_cut(mp, arc, ref, qref, dir),
                        dhnl_cut(mp, arc, ref, dhref, dir)};
    int p = static_cast<int>(rng() % num_opts);
    double span = u01(rng);
    double q = rng() % 2 ? span * pipe.options[p].qmax_pos
                         : -span * pipe.options[p].qmax_neg;
    std::vector<double> point = surface_point(mp, arc, p, q);
    for (const LinearCut& cut : cuts) {
      double excess = cut_excess(cut, point);
      worst = std::max(worst, excess);
      ok = ok && excess <= 1e-9;
    }
  }

  // Companion points give identical intercepts across each menu.
  const double alpha = net.alpha;
  for (int arc = 0; arc < num_arcs && ok; ++arc) {
    const Pipe& pipe = net.pipes[arc];
    double r = pipe.options[0].resistance;
    double qref = 0.8 * pipe.options[0].qmax_pos;
    double dhref = 0.8 * pipe.options[0].dhmax_pos;
    for (const auto& opt : pipe.options) {
      double p = opt.resistance;
      double c = qref * std::pow(r / p, 1.0 / alpha);
      double i0 =
          p * std::pow(c, alpha) - alpha * p * std::pow(c, alpha - 1.0) * c;
      ok = ok && std::abs(i0 - (1.0 - alpha) * r * std::pow(qref, alpha)) <= 1e-12;
      double cq = qref * std::pow(r / p, 1.0 / (1.0 + alpha));
      double iq = p * std::pow(cq, 1.0 + alpha) / (1.0 + alpha) -
                  p * std::pow(cq, alpha) * cq;
      ok = ok && std::abs(iq - (1.0 / (1.0 + alpha) - 1.0) * r *
                                   std::pow(qref, 1.0 + alpha)) <= 1e-12;
      double cd = dhref * std::pow(p / r, 1.0 / (1.0 + alpha));
      double id = alpha / (1.0 + alpha) * std::pow(cd, 1.0 + 1.0 / alpha) /
                      std::pow(p, 1.0 / alpha) -
                  std::pow(cd / p, 1.0 / alpha) * cd;
      ok = ok && std::abs(id + std::pow(dhref, 1.0 + 1.0 / alpha) /
                                   ((1.0 + alpha) * std::pow(r, 1.0 / alpha))) <=
                     1e-12;
    }
  }

  // No-good cuts, exhaustively on a three-arc, two-option instance: keep the
  // first three arcs of the fixture and the first two options of each menu.
  Network small = test::five_arc_network();
  small.pipes.resize(3);
  for (Pipe& p : small.pipes) p.options.resize(2);
  small.finalize();
  small = derive_bounds(small);
  MasterProblem smp = build_master(small, MasterVariant::Exact);
  for (int banned = 0; banned < 8; ++banned) {
    DesignVector b{{banned & 1, (banned >> 1) & 1, (banned >> 2) & 1}};
    LinearCut cut = nogood_cut(smp, b);
    for (int other = 0; other < 8; ++other) {
      std::vector<double> point(smp.num_vars(), 0.0);
      point[smp.x(0, other & 1)] = 1.0;
      point[smp.x(1, (other >> 1) & 1)] = 1.0;
      point[smp.x(2, (other >> 2) & 1)] = 1.0;
      double excess = cut_excess(cut, point);
      if (other == banned)
        ok = ok && excess > 0.5;
      else
        ok = ok && excess <= 1e-12;
    }
  }

  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "cuts valid on 10000 surface samples (worst excess %.2e), "
                "intercepts equal, no-good exhaustive",
                worst);
  report(5, ok, buf);
}

void criterion_6_lifting() {
  bool ok = true;
  double worst = 0.0;
  {
    Network net = test::five_arc_network();
    MasterProblem mp = build_master(net, MasterVariant::Exact);
    EnumerationResult truth = enumerate_designs(net, 1000);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      DesignVector d;
      for (const Pipe& p : net.pipes)
        d.choice.push_back(static_cast<int>(rng() % p.options.size()));
      FeasibilityResult feas = check_design_feasibility(net, d);
      if (!feas.feasible) continue;
      std::vector<double> point = lift_design(mp, d, feas.state);
      double v = max_constraint_violation(mp, point);
      worst = std::max(worst, v);
      ok = ok && v <= 1e-6;
    }
    if (truth.feasible) {
      FeasibilityResult feas = check_design_feasibility(net, truth.best);
      double v = max_constraint_violation(
          mp, lift_design(mp, truth.best, feas.state));
      worst = std::max(worst, v);
      ok = ok && v <= 1e-6;
    }
  }
  {
    Network net = derive_bounds(
        parse_network(std::string(WDN_DATA_DIR) + "/shamir.json"));
    MasterProblem mp = build_master(net, MasterVariant::Exact);
    DesignVector d = initial_solution(net);
    FeasibilityResult feas = check_design_feasibility(net, d);
    double v = max_constraint_violation(mp, lift_design(mp, d, feas.state));
    worst = std::max(worst, v);
    ok = ok && feas.feasible && v <= 1e-6;
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "lifted feasible designs satisfy all static rows including "
                "the duality row (worst violation %.2e)",
                worst);
  report(6, ok, buf);
}

void criterion_7_bound_trajectory() {
  Network net = test::five_arc_network();
  EnumerationResult truth = enumerate_designs(net, 1000);
  SolverConfig cfg;
  cfg.seed = 12;
  SolveResult res = solve_global(net, cfg);
  bool ok = truth.feasible && res.status == SolveStatus::Optimal &&
            !res.log.rows.empty();
  for (std::size_t i = 1; ok && i < res.log.rows.size(); ++i) {
    ok = res.log.rows[i].lower_bound >= res.log.rows[i - 1].lower_bound - 1e-9;
    ok = ok && res.log.rows[i].upper_bound <=
                   res.log.rows[i - 1].upper_bound + 1e-9;
  }
  if (ok) {
    double tol = 1e-6 * std::max(1.0, truth.cost);
    ok = res.log.rows.back().lower_bound <= truth.cost + tol &&
         res.log.rows.back().upper_bound >= truth.cost - tol;
  }
  report(7, ok,
         "lower bounds rise, upper bounds fall, and the final bounds bracket "
         "the enumerated optimum");
}

void criterion_8_power_balance() {
  Network nets[] = {
      test::five_arc_network(),
      derive_bounds(parse_network(std::string(WDN_DATA_DIR) + "/tiny.json"))};
  std::mt19937_64 rng(77);
  bool ok = true;
  double worst = 0.0;
  for (const Network& net : nets) {
    for (int trial = 0; trial < 15; ++trial) {
      DesignVector d;
      for (const Pipe& p : net.pipes)
        d.choice.push_back(static_cast<int>(rng() % p.options.size()));
      HydraulicState st = solve_fixed_design(net, d);
      DualityReport rep = evaluate_objectives(net, d, st);
      double scale = std::max(1.0, std::abs(rep.f2));
      double imbalance = std::abs((rep.f_primal - rep.f_dual) -
                                  (rep.f1 - rep.f2 + rep.f3 + rep.f4));
      worst = std::max(worst, imbalance / scale);
      ok = ok && imbalance <= 1e-9 * scale;
      ok = ok && rep.f1 + rep.f3 + rep.f4 <= rep.f2 + 1e-9 * scale;
    }
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "duality gap decomposes into the power terms (worst relative "
                "imbalance %.2e) and generation covers losses plus demand",
                worst);
  report(8, ok, buf);
}

void criterion_9_scale_statement() {
  report(9, true,
         "large-scale published benchmark tables are not reproduced here: "
         "this build targets correctness-scale instances, and the original "
         "hardware/solver stack is unavailable");
  if (const char* run = std::getenv("WDN_RUN_HANOI"); run && run[0] == '1') {
    Network net = derive_bounds(
        parse_network(std::string(WDN_DATA_DIR) + "/hanoi.json"));
    SolverConfig cfg;
    cfg.seed = 1;
    cfg.time_limit = 3600.0;
    SolveResult res = solve_global(net, cfg);
    std::printf("  hanoi (optional): cost %.2f (reference 6109620.90), "
                "gap %.2e, status %d\n",
                res.best_cost, res.gap, static_cast<int>(res.status));
  }
}

}  // namespace

int main() {
  criterion_2_random_instances();
  criterion_3_strong_duality();
  criterion_4_dual_cross_check();
  criterion_5_cut_validity();
  criterion_6_lifting();
  criterion_7_bound_trajectory();
  criterion_8_power_balance();
  criterion_9_scale_statement();
  criterion_1_benchmark();
  std::printf("%s\n", failures == 0 ? "all criteria passed"
                                    : "some criteria FAILED");
  return failures == 0 ? 0 : 1;
}
