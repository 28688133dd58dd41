#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "wdn/formulation.hpp"

using namespace wdn;

namespace {

Network tiny() {
  return derive_bounds(parse_network(std::string(WDN_DATA_DIR) + "/tiny.json"));
}

// Value of a cut's left-hand side minus its right-hand side at a sparse point.
double cut_excess(const LinearCut& cut, const std::vector<double>& point) {
  double lhs = 0.0;
  for (auto [j, c] : cut.coeffs) lhs += c * point[j];
  return lhs - cut.rhs;
}

// Point on the exact nonlinear surface for one arc: option `p` carries signed
// flow q with its exact head loss and nonlinear-term values; everything else
// on the arc is zero.
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
  if (mp.variant == MasterVariant::Exact) {
    v[mp.q_nl(arc)] = r * std::pow(std::abs(q), 1.0 + alpha) / (1.0 + alpha);
    v[mp.dh_nl(arc)] = alpha / (1.0 + alpha) *
                       std::pow(std::abs(dh), 1.0 + 1.0 / alpha) /
                       std::pow(r, 1.0 / alpha);
  }
  return v;
}

}  // namespace

TEST_CASE("master layout and counts") {
  Network net = tiny();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  // 2 pipes x 3 options: x(6) y(2) q+(6) q-(6) dh+(6) dh-(6) heads(3)
  // q_nl(2) dh_nl(2).
  CHECK(mp.num_vars() == 6 + 2 + 6 + 6 + 6 + 6 + 3 + 2 + 2);
  CHECK(mp.num_binaries() == 8);
  CHECK(mp.static_rows == mp.rows.size());
  std::set<int> seen;
  for (int a = 0; a < 2; ++a) {
    seen.insert(mp.y(a));
    seen.insert(mp.q_nl(a));
    seen.insert(mp.dh_nl(a));
    for (int p = 0; p < 3; ++p) {
      seen.insert(mp.x(a, p));
      seen.insert(mp.q_pos(a, p));
      seen.insert(mp.q_neg(a, p));
      seen.insert(mp.dh_pos(a, p));
      seen.insert(mp.dh_neg(a, p));
    }
  }
  for (int i = 0; i < 3; ++i) seen.insert(mp.head(i));
  CHECK(static_cast<int>(seen.size()) == mp.num_vars());

  MasterProblem relaxed = build_master(net, MasterVariant::RelaxedPrevious);
  // Relaxed master aggregates head differences per arc and drops the
  // nonlinear-term variables.
  CHECK(relaxed.num_vars() == 6 + 2 + 6 + 6 + 1 + 1 + 1 + 1 + 3);
  CHECK(relaxed.dh_pos(0, 0) == relaxed.dh_pos(0, 2));
}

TEST_CASE("lifted feasible design satisfies every static row") {
  Network net = tiny();
  DesignVector d{{2, 0}};
  HydraulicState st = solve_fixed_design(net, d);
  for (MasterVariant variant :
       {MasterVariant::Exact, MasterVariant::RelaxedPrevious}) {
    MasterProblem mp = build_master(net, variant);
    std::vector<double> point = lift_design(mp, d, st);
    CHECK(max_constraint_violation(mp, point) <= 1e-6);
  }
}

TEST_CASE("cut families are valid on the nonlinear surface") {
  Network net = test::five_arc_network();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int num_arcs = static_cast<int>(net.pipes.size());
  for (int sample = 0; sample < 2000; ++sample) {
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
    LinearCut oa = oa_headloss_cut(mp, arc, ref, qref, dir);
    LinearCut qnl = qnl_cut(mp, arc, ref, qref, dir);
    LinearCut dhnl = dhnl_cut(mp, arc, ref, dhref, dir);

    // Evaluate at a random exact point of the same arc, either direction.
    int p = static_cast<int>(rng() % num_opts);
    double span = u01(rng);
    double q = rng() % 2 ? span * pipe.options[p].qmax_pos
                         : -span * pipe.options[p].qmax_neg;
    std::vector<double> point = surface_point(mp, arc, p, q);
    CHECK(cut_excess(oa, point) <= 1e-9);
    CHECK(cut_excess(qnl, point) <= 1e-9);
    CHECK(cut_excess(dhnl, point) <= 1e-9);
  }
}

TEST_CASE("companion points equalize intercepts") {
  Network net = test::five_arc_network();
  const double alpha = net.alpha;
  const Pipe& pipe = net.pipes[0];
  const double r = pipe.options[0].resistance;
  double qref = 0.7 * pipe.options[0].qmax_pos;
  double dhref = 0.6 * pipe.options[0].dhmax_pos;
  for (const auto& opt : pipe.options) {
    double p = opt.resistance;
    // Head-loss tangents: value - slope * point at each companion.
    double c = qref * std::pow(r / p, 1.0 / alpha);
    double i0 = p * std::pow(c, alpha) - alpha * p * std::pow(c, alpha - 1.0) * c;
    CHECK(std::abs(i0 - (1.0 - alpha) * r * std::pow(qref, alpha)) <= 1e-12);
    // Flow-nonlinearity tangents.
    double cq = qref * std::pow(r / p, 1.0 / (1.0 + alpha));
    double iq = p * std::pow(cq, 1.0 + alpha) / (1.0 + alpha) -
                p * std::pow(cq, alpha) * cq;
    CHECK(std::abs(iq - (1.0 / (1.0 + alpha) - 1.0) * r *
                            std::pow(qref, 1.0 + alpha)) <= 1e-12);
    // Head-difference-nonlinearity tangents.
    double cd = dhref * std::pow(p / r, 1.0 / (1.0 + alpha));
    double id = alpha / (1.0 + alpha) * std::pow(cd, 1.0 + 1.0 / alpha) /
                    std::pow(p, 1.0 / alpha) -
                std::pow(cd / p, 1.0 / alpha) * cd;
    CHECK(std::abs(id + std::pow(dhref, 1.0 + 1.0 / alpha) /
                            ((1.0 + alpha) * std::pow(r, 1.0 / alpha))) <= 1e-12);
  }
}

TEST_CASE("no-good cut excludes exactly one design") {
  Network net = tiny();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  for (int c0 = 0; c0 < 3; ++c0)
    for (int c1 = 0; c1 < 3; ++c1) {
      LinearCut cut = nogood_cut(mp, {{c0, c1}});
      for (int o0 = 0; o0 < 3; ++o0)
        for (int o1 = 0; o1 < 3; ++o1) {
          std::vector<double> point(mp.num_vars(), 0.0);
          point[mp.x(0, o0)] = 1.0;
          point[mp.x(1, o1)] = 1.0;
          double excess = cut_excess(cut, point);
          if (o0 == c0 && o1 == c1)
            CHECK(excess > 0.5);
          else
            CHECK(excess <= 1e-12);
        }
    }
}

TEST_CASE("duplicate cuts are suppressed") {
  Network net = tiny();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  double qref = 0.5 * net.pipes[0].options[0].qmax_pos;
  CHECK(mp.add_cut(oa_headloss_cut(mp, 0, 0, qref, Direction::Positive)));
  CHECK_FALSE(mp.add_cut(
      oa_headloss_cut(mp, 0, 0, qref * (1.0 + 1e-8), Direction::Positive)));
  CHECK(mp.add_cut(oa_headloss_cut(mp, 0, 0, qref, Direction::Negative)));
  CHECK(mp.add_cut(oa_headloss_cut(mp, 0, 1, qref, Direction::Positive)));
  CHECK(mp.add_cut(oa_headloss_cut(mp, 0, 0, 2.0 * qref, Direction::Positive)));
}

TEST_CASE("reference point outside the cap is rejected") {
  Network net = tiny();
  MasterProblem mp = build_master(net, MasterVariant::Exact);
  double cap = net.pipes[0].options[0].qmax_pos;
  CHECK_THROWS_AS(oa_headloss_cut(mp, 0, 0, 2.0 * cap, Direction::Positive),
                  std::invalid_argument);
}
