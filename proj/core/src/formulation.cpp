#include "wdn/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wdn {

namespace {

// pow with the convention 0^e = 0 for e > 0 even under roundoff noise.
double powp(double base, double exp) {
  return base <= 0.0 ? 0.0 : std::pow(base, exp);
}

const char* kind_name(CutKind k) {
  switch (k) {
    case CutKind::Static: return "static";
    case CutKind::OaHeadloss: return "oa_headloss";
    case CutKind::Qnl: return "qnl";
    case CutKind::Dhnl: return "dhnl";
    case CutKind::NoGood: return "nogood";
  }
  return "?";
}

}  // namespace

bool MasterProblem::add_cut(LinearCut cut) {
  if (cut.kind == CutKind::OaHeadloss || cut.kind == CutKind::Qnl ||
      cut.kind == CutKind::Dhnl) {
    for (const auto& row : rows) {
      if (row.kind != cut.kind || row.arc != cut.arc ||
          row.ref_option != cut.ref_option || row.direction != cut.direction)
        continue;
      double scale = std::max({1.0, std::abs(row.ref_point), std::abs(cut.ref_point)});
      if (std::abs(row.ref_point - cut.ref_point) <= 1e-6 * scale) return false;
    }
  }
  rows.push_back(std::move(cut));
  return true;
}

MasterProblem build_master(const Network& net, MasterVariant variant) {
  if (!net.bounds_derived)
    throw std::invalid_argument("build_master: derive_bounds must run first");
  MasterProblem mp;
  mp.net = &net;
  mp.variant = variant;
  const bool exact = variant == MasterVariant::Exact;
  const double alpha = net.alpha;
  const int num_arcs = static_cast<int>(net.pipes.size());

  auto add_var = [&](double lb, double ub, double obj = 0.0) {
    mp.lower.push_back(lb);
    mp.upper.push_back(ub);
    mp.objective.push_back(obj);
    return static_cast<int>(mp.lower.size()) - 1;
  };

  // Variable layout: x blocks, y, q+ blocks, q- blocks, dh+ blocks,
  // dh- blocks, heads, then (exact) q_NL and dh_NL.
  for (int a = 0; a < num_arcs; ++a) {
    const Pipe& pipe = net.pipes[a];
    mp.x_base_.push_back(mp.num_vars());
    for (const auto& opt : pipe.options)
      add_var(0.0, 1.0, pipe.length * opt.cost);
    mp.num_x_ += static_cast<int>(pipe.options.size());
  }
  mp.y_base_ = mp.num_vars();
  for (int a = 0; a < num_arcs; ++a) add_var(0.0, 1.0);
  mp.num_y_ = num_arcs;
  for (int a = 0; a < num_arcs; ++a) {
    mp.qpos_base_.push_back(mp.num_vars());
    for (const auto& opt : net.pipes[a].options) add_var(0.0, opt.qmax_pos);
  }
  for (int a = 0; a < num_arcs; ++a) {
    mp.qneg_base_.push_back(mp.num_vars());
    for (const auto& opt : net.pipes[a].options) add_var(0.0, opt.qmax_neg);
  }
  for (int a = 0; a < num_arcs; ++a) {
    mp.dhpos_base_.push_back(mp.num_vars());
    if (exact) {
      for (const auto& opt : net.pipes[a].options) add_var(0.0, opt.dhmax_pos);
    } else {
      add_var(0.0, net.pipes[a].options.front().dhmax_pos);
    }
  }
  for (int a = 0; a < num_arcs; ++a) {
    mp.dhneg_base_.push_back(mp.num_vars());
    if (exact) {
      for (const auto& opt : net.pipes[a].options) add_var(0.0, opt.dhmax_neg);
    } else {
      add_var(0.0, net.pipes[a].options.front().dhmax_neg);
    }
  }
  mp.head_base_ = mp.num_vars();
  for (const Node& node : net.nodes) {
    if (node.is_reservoir())
      add_var(node.fixed_head, node.fixed_head);
    else
      add_var(node.head_lb, node.head_ub);
  }
  if (exact) {
    mp.qnl_base_ = mp.num_vars();
    for (int a = 0; a < num_arcs; ++a) {
      double ub = 0.0;
      for (const auto& opt : net.pipes[a].options)
        ub += opt.resistance * (powp(opt.qmax_pos, 1.0 + alpha) +
                                powp(opt.qmax_neg, 1.0 + alpha));
      add_var(0.0, ub / (1.0 + alpha));
    }
    mp.dhnl_base_ = mp.num_vars();
    for (int a = 0; a < num_arcs; ++a) {
      double ub = 0.0;
      for (const auto& opt : net.pipes[a].options)
        ub += (powp(opt.dhmax_pos, 1.0 + 1.0 / alpha) +
               powp(opt.dhmax_neg, 1.0 + 1.0 / alpha)) /
              std::pow(opt.resistance, 1.0 / alpha);
      add_var(0.0, ub * alpha / (1.0 + alpha));
    }
  }

  auto add_row = [&](LinearCut row, const std::string& label) {
    row.kind = CutKind::Static;
    row.label = label;
    mp.rows.push_back(std::move(row));
  };

  // Resistance selection: exactly one option per pipe.
  for (int a = 0; a < num_arcs; ++a) {
    LinearCut row;
    row.sense = 'E';
    row.rhs = 1.0;
    for (int p = 0; p < static_cast<int>(net.pipes[a].options.size()); ++p)
      row.coeffs.push_back({mp.x(a, p), 1.0});
    add_row(std::move(row), "select[" + net.pipes[a].id + "]");
  }

  // Flow conservation at junctions: inflow - outflow = demand.
  for (int j : net.junctions()) {
    LinearCut row;
    row.sense = 'E';
    row.rhs = net.nodes[j].demand;
    for (int a : net.in_arcs(j))
      for (int p = 0; p < static_cast<int>(net.pipes[a].options.size()); ++p) {
        row.coeffs.push_back({mp.q_pos(a, p), 1.0});
        row.coeffs.push_back({mp.q_neg(a, p), -1.0});
      }
    for (int a : net.out_arcs(j))
      for (int p = 0; p < static_cast<int>(net.pipes[a].options.size()); ++p) {
        row.coeffs.push_back({mp.q_pos(a, p), -1.0});
        row.coeffs.push_back({mp.q_neg(a, p), 1.0});
      }
    add_row(std::move(row), "conserve[" + net.nodes[j].id + "]");
  }

  // Head-difference / head equalities per arc.
  for (int a = 0; a < num_arcs; ++a) {
    const Pipe& pipe = net.pipes[a];
    LinearCut row;
    row.sense = 'E';
    row.rhs = 0.0;
    if (exact) {
      for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
        row.coeffs.push_back({mp.dh_pos(a, p), 1.0});
        row.coeffs.push_back({mp.dh_neg(a, p), -1.0});
      }
    } else {
      row.coeffs.push_back({mp.dh_pos(a, 0), 1.0});
      row.coeffs.push_back({mp.dh_neg(a, 0), -1.0});
    }
    row.coeffs.push_back({mp.head(pipe.tail), -1.0});
    row.coeffs.push_back({mp.head(pipe.head), 1.0});
    add_row(std::move(row), "head_eq[" + pipe.id + "]");
  }

  // Selection and direction couplings on flows and head differences.
  for (int a = 0; a < num_arcs; ++a) {
    const Pipe& pipe = net.pipes[a];
    for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
      const auto& opt = pipe.options[p];
      auto couple = [&](int var, double cap, int bin, bool complement,
                        const char* tag) {
        LinearCut row;
        row.sense = 'L';
        row.rhs = complement ? cap : 0.0;
        row.coeffs.push_back({var, 1.0});
        row.coeffs.push_back({bin, complement ? cap : -cap});
        add_row(std::move(row), std::string(tag) + "[" + pipe.id + "," +
                                    std::to_string(p) + "]");
      };
      couple(mp.q_pos(a, p), opt.qmax_pos, mp.x(a, p), false, "qpos_x");
      couple(mp.q_neg(a, p), opt.qmax_neg, mp.x(a, p), false, "qneg_x");
      couple(mp.q_pos(a, p), opt.qmax_pos, mp.y(a), false, "qpos_y");
      couple(mp.q_neg(a, p), opt.qmax_neg, mp.y(a), true, "qneg_y");
      if (exact) {
        couple(mp.dh_pos(a, p), opt.dhmax_pos, mp.x(a, p), false, "dhpos_x");
        couple(mp.dh_neg(a, p), opt.dhmax_neg, mp.x(a, p), false, "dhneg_x");
        couple(mp.dh_pos(a, p), opt.dhmax_pos, mp.y(a), false, "dhpos_y");
        couple(mp.dh_neg(a, p), opt.dhmax_neg, mp.y(a), true, "dhneg_y");
      }
    }
    if (!exact) {
      const auto& opt0 = pipe.options.front();
      LinearCut pos;
      pos.sense = 'L';
      pos.rhs = 0.0;
      pos.coeffs = {{mp.dh_pos(a, 0), 1.0}, {mp.y(a), -opt0.dhmax_pos}};
      add_row(std::move(pos), "dhpos_y[" + pipe.id + "]");
      LinearCut neg;
      neg.sense = 'L';
      neg.rhs = opt0.dhmax_neg;
      neg.coeffs = {{mp.dh_neg(a, 0), 1.0}, {mp.y(a), opt0.dhmax_neg}};
      add_row(std::move(neg), "dhneg_y[" + pipe.id + "]");
    }
  }

  // Linear upper bounds tying head differences to flows.
  for (int a = 0; a < num_arcs; ++a) {
    const Pipe& pipe = net.pipes[a];
    if (exact) {
      for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
        const auto& opt = pipe.options[p];
        LinearCut pos;
        pos.sense = 'L';
        pos.coeffs = {{mp.dh_pos(a, p), 1.0},
                      {mp.q_pos(a, p), -pipe.length * opt.resistance *
                                           powp(opt.qmax_pos, alpha - 1.0)}};
        add_row(std::move(pos), "dh_ub_pos[" + pipe.id + "," + std::to_string(p) + "]");
        LinearCut neg;
        neg.sense = 'L';
        neg.coeffs = {{mp.dh_neg(a, p), 1.0},
                      {mp.q_neg(a, p), -pipe.length * opt.resistance *
                                           powp(opt.qmax_neg, alpha - 1.0)}};
        add_row(std::move(neg), "dh_ub_neg[" + pipe.id + "," + std::to_string(p) + "]");
      }
    } else {
      LinearCut pos, neg;
      pos.sense = neg.sense = 'L';
      pos.coeffs.push_back({mp.dh_pos(a, 0), 1.0});
      neg.coeffs.push_back({mp.dh_neg(a, 0), 1.0});
      for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
        const auto& opt = pipe.options[p];
        pos.coeffs.push_back({mp.q_pos(a, p), -pipe.length * opt.resistance *
                                                  powp(opt.qmax_pos, alpha - 1.0)});
        neg.coeffs.push_back({mp.q_neg(a, p), -pipe.length * opt.resistance *
                                                  powp(opt.qmax_neg, alpha - 1.0)});
      }
      add_row(std::move(pos), "dh_ub_pos[" + pipe.id + "]");
      add_row(std::move(neg), "dh_ub_neg[" + pipe.id + "]");
    }
  }

  if (exact) {
    // Direction valid inequalities: every source pushes water out.
    for (int s : net.reservoirs()) {
      if (net.out_arcs(s).empty()) continue;
      LinearCut row;
      row.sense = 'G';
      row.rhs = 1.0;
      for (int a : net.out_arcs(s)) row.coeffs.push_back({mp.y(a), 1.0});
      add_row(std::move(row), "source_out[" + net.nodes[s].id + "]");
    }
    // Every positive-demand junction receives water.
    for (int j : net.junctions()) {
      const Node& node = net.nodes[j];
      if (node.demand <= 0.0) continue;
      LinearCut row;
      row.sense = 'G';
      row.rhs = 1.0 - static_cast<double>(net.out_arcs(j).size());
      for (int a : net.in_arcs(j)) row.coeffs.push_back({mp.y(a), 1.0});
      for (int a : net.out_arcs(j)) row.coeffs.push_back({mp.y(a), -1.0});
      add_row(std::move(row), "demand_in[" + node.id + "]");
    }
    // Degree-two, zero-demand junctions pass flow straight through.
    for (int j : net.junctions()) {
      const Node& node = net.nodes[j];
      if (node.demand != 0.0) continue;
      std::size_t din = net.in_arcs(j).size(), dout = net.out_arcs(j).size();
      if (din == 1 && dout == 1) {
        LinearCut row;
        row.sense = 'E';
        row.rhs = 0.0;
        row.coeffs = {{mp.y(net.in_arcs(j)[0]), 1.0},
                      {mp.y(net.out_arcs(j)[0]), -1.0}};
        add_row(std::move(row), "through[" + node.id + "]");
      } else if ((din == 2 && dout == 0) || (din == 0 && dout == 2)) {
        LinearCut row;
        row.sense = 'E';
        row.rhs = 1.0;
        for (int a : net.in_arcs(j)) row.coeffs.push_back({mp.y(a), 1.0});
        for (int a : net.out_arcs(j)) row.coeffs.push_back({mp.y(a), 1.0});
        add_row(std::move(row), "through[" + node.id + "]");
      }
    }

    // Linear strong-duality row over the nonlinear-term variables.
    LinearCut sd;
    sd.sense = 'L';
    sd.rhs = 0.0;
    for (int a = 0; a < num_arcs; ++a) {
      sd.coeffs.push_back({mp.q_nl(a), net.pipes[a].length});
      sd.coeffs.push_back(
          {mp.dh_nl(a), 1.0 / std::pow(net.pipes[a].length, 1.0 / alpha)});
    }
    for (int s : net.reservoirs()) {
      double hs = net.nodes[s].fixed_head;
      for (int a : net.out_arcs(s))
        for (int p = 0; p < static_cast<int>(net.pipes[a].options.size()); ++p) {
          sd.coeffs.push_back({mp.q_pos(a, p), -hs});
          sd.coeffs.push_back({mp.q_neg(a, p), hs});
        }
    }
    for (int j : net.junctions())
      if (net.nodes[j].demand != 0.0)
        sd.coeffs.push_back({mp.head(j), net.nodes[j].demand});
    add_row(std::move(sd), "strong_duality");
  }

  mp.static_rows = mp.rows.size();
  return mp;
}

namespace {

double ref_cap(const MasterProblem& mp, int arc, int ref_option, Direction dir,
               bool head_difference) {
  const auto& opt = mp.net->pipes[arc].options.at(ref_option);
  if (head_difference)
    return dir == Direction::Positive ? opt.dhmax_pos : opt.dhmax_neg;
  return dir == Direction::Positive ? opt.qmax_pos : opt.qmax_neg;
}

void check_ref(double point, double cap, const char* what) {
  if (point < -1e-12 || point > cap * (1.0 + 1e-9) + 1e-12)
    throw std::invalid_argument(std::string(what) +
                                ": reference point outside [0, cap]");
}

// Intercept term multiplies y (positive direction) or 1-y; returns the rhs
// shift and the y coefficient for "intercept * lifted_binary + ... <= rhs".
void apply_direction(LinearCut& cut, const MasterProblem& mp, int arc,
                     double intercept, Direction dir) {
  if (dir == Direction::Positive) {
    cut.coeffs.push_back({mp.y(arc), intercept});
  } else {
    cut.coeffs.push_back({mp.y(arc), -intercept});
    cut.rhs -= intercept;
  }
}

}  // namespace

LinearCut oa_headloss_cut(const MasterProblem& mp, int arc, int ref_option,
                          double q_tilde, Direction dir) {
  const Network& net = *mp.net;
  const Pipe& pipe = net.pipes[arc];
  const double alpha = net.alpha;
  const double r = pipe.options.at(ref_option).resistance;
  check_ref(q_tilde, ref_cap(mp, arc, ref_option, dir, false), "oa_headloss_cut");

  LinearCut cut;
  cut.kind = CutKind::OaHeadloss;
  cut.sense = 'L';
  cut.arc = arc;
  cut.ref_option = ref_option;
  cut.direction = dir;
  cut.ref_point = q_tilde;

  // Tangent of r*q^alpha at q_tilde, shared intercept across the menu via
  // companion points q_tilde * (r/p)^(1/alpha).
  double intercept = (1.0 - alpha) * r * powp(q_tilde, alpha);
  for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
    double pr = pipe.options[p].resistance;
    double companion = q_tilde * std::pow(r / pr, 1.0 / alpha);
    double slope = alpha * pr * powp(companion, alpha - 1.0);
    int qvar = dir == Direction::Positive ? mp.q_pos(arc, p) : mp.q_neg(arc, p);
    if (slope != 0.0) cut.coeffs.push_back({qvar, slope});
    int dhvar = dir == Direction::Positive ? mp.dh_pos(arc, p) : mp.dh_neg(arc, p);
    if (mp.variant == MasterVariant::Exact || p == 0)
      cut.coeffs.push_back({dhvar, -1.0 / pipe.length});
  }
  apply_direction(cut, mp, arc, intercept, dir);
  cut.label = "oa_headloss[" + pipe.id + "]";
  return cut;
}

LinearCut qnl_cut(const MasterProblem& mp, int arc, int ref_option,
                  double q_tilde, Direction dir) {
  if (mp.variant != MasterVariant::Exact)
    throw std::invalid_argument("qnl_cut: exact master only");
  const Pipe& pipe = mp.net->pipes[arc];
  const double alpha = mp.net->alpha;
  const double r = pipe.options.at(ref_option).resistance;
  check_ref(q_tilde, ref_cap(mp, arc, ref_option, dir, false), "qnl_cut");

  LinearCut cut;
  cut.kind = CutKind::Qnl;
  cut.sense = 'L';
  cut.arc = arc;
  cut.ref_option = ref_option;
  cut.direction = dir;
  cut.ref_point = q_tilde;

  // Tangent of r*q^(1+alpha)/(1+alpha); companions q_tilde*(r/p)^(1/(1+alpha)).
  double intercept = (1.0 / (1.0 + alpha) - 1.0) * r * powp(q_tilde, 1.0 + alpha);
  for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
    double pr = pipe.options[p].resistance;
    double companion = q_tilde * std::pow(r / pr, 1.0 / (1.0 + alpha));
    double slope = pr * powp(companion, alpha);
    int qvar = dir == Direction::Positive ? mp.q_pos(arc, p) : mp.q_neg(arc, p);
    if (slope != 0.0) cut.coeffs.push_back({qvar, slope});
  }
  cut.coeffs.push_back({mp.q_nl(arc), -1.0});
  apply_direction(cut, mp, arc, intercept, dir);
  cut.label = "qnl[" + pipe.id + "]";
  return cut;
}

LinearCut dhnl_cut(const MasterProblem& mp, int arc, int ref_option,
                   double dh_tilde, Direction dir) {
  if (mp.variant != MasterVariant::Exact)
    throw std::invalid_argument("dhnl_cut: exact master only");
  const Pipe& pipe = mp.net->pipes[arc];
  const double alpha = mp.net->alpha;
  const double r = pipe.options.at(ref_option).resistance;
  check_ref(dh_tilde, ref_cap(mp, arc, ref_option, dir, true), "dhnl_cut");

  LinearCut cut;
  cut.kind = CutKind::Dhnl;
  cut.sense = 'L';
  cut.arc = arc;
  cut.ref_option = ref_option;
  cut.direction = dir;
  cut.ref_point = dh_tilde;

  // Tangent of alpha/(1+alpha) * dh^(1+1/alpha) / r^(1/alpha); companions
  // dh_tilde*(p/r)^(1/(1+alpha)) equalize the per-option intercepts.
  double intercept =
      -powp(dh_tilde, 1.0 + 1.0 / alpha) / ((1.0 + alpha) * std::pow(r, 1.0 / alpha));
  for (int p = 0; p < static_cast<int>(pipe.options.size()); ++p) {
    double pr = pipe.options[p].resistance;
    double companion = dh_tilde * std::pow(pr / r, 1.0 / (1.0 + alpha));
    double slope = powp(companion / pr, 1.0 / alpha);
    int dhvar = dir == Direction::Positive ? mp.dh_pos(arc, p) : mp.dh_neg(arc, p);
    if (slope != 0.0) cut.coeffs.push_back({dhvar, slope});
  }
  cut.coeffs.push_back({mp.dh_nl(arc), -1.0});
  apply_direction(cut, mp, arc, intercept, dir);
  cut.label = "dhnl[" + pipe.id + "]";
  return cut;
}

LinearCut nogood_cut(const MasterProblem& mp, const DesignVector& design) {
  const Network& net = *mp.net;
  if (design.choice.size() != net.pipes.size())
    throw std::invalid_argument("nogood_cut: design size mismatch");
  LinearCut cut;
  cut.kind = CutKind::NoGood;
  cut.sense = 'L';
  cut.rhs = static_cast<double>(net.pipes.size()) - 1.0;
  for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a)
    for (int p = 0; p < static_cast<int>(net.pipes[a].options.size()); ++p)
      cut.coeffs.push_back({mp.x(a, p), p == design.choice[a] ? 1.0 : -1.0});
  cut.label = "nogood";
  return cut;
}

std::vector<double> lift_design(const MasterProblem& mp,
                                const DesignVector& design,
                                const HydraulicState& state) {
  const Network& net = *mp.net;
  const double alpha = net.alpha;
  std::vector<double> v(mp.num_vars(), 0.0);
  for (int a = 0; a < static_cast<int>(net.pipes.size()); ++a) {
    const Pipe& pipe = net.pipes[a];
    int chosen = design.choice[a];
    v[mp.x(a, chosen)] = 1.0;
    double q = state.flows[a];
    double dh = state.heads[pipe.tail] - state.heads[pipe.head];
    v[mp.y(a)] = q >= 0.0 ? 1.0 : 0.0;
    v[mp.q_pos(a, chosen)] = std::max(q, 0.0);
    v[mp.q_neg(a, chosen)] = std::max(-q, 0.0);
    if (mp.variant == MasterVariant::Exact) {
      v[mp.dh_pos(a, chosen)] = std::max(dh, 0.0);
      v[mp.dh_neg(a, chosen)] = std::max(-dh, 0.0);
      double r = pipe.options[chosen].resistance;
      v[mp.q_nl(a)] = r * powp(std::abs(q), 1.0 + alpha) / (1.0 + alpha);
      v[mp.dh_nl(a)] = alpha / (1.0 + alpha) *
                       powp(std::abs(dh), 1.0 + 1.0 / alpha) /
                       std::pow(r, 1.0 / alpha);
    } else {
      v[mp.dh_pos(a, 0)] = std::max(dh, 0.0);
      v[mp.dh_neg(a, 0)] = std::max(-dh, 0.0);
    }
  }
  for (int i = 0; i < static_cast<int>(net.nodes.size()); ++i)
    v[mp.head(i)] = state.heads[i];
  return v;
}

double max_constraint_violation(const MasterProblem& mp,
                                const std::vector<double>& point) {
  double worst = 0.0;
  for (int j = 0; j < mp.num_vars(); ++j) {
    worst = std::max(worst, mp.lower[j] - point[j]);
    worst = std::max(worst, point[j] - mp.upper[j]);
  }
  for (const auto& row : mp.rows) {
    double lhs = 0.0;
    for (auto [j, c] : row.coeffs) lhs += c * point[j];
    switch (row.sense) {
      case 'L': worst = std::max(worst, lhs - row.rhs); break;
      case 'G': worst = std::max(worst, row.rhs - lhs); break;
      case 'E': worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

LinearProgram to_lp(const MasterProblem& mp) {
  LinearProgram lp;
  lp.num_vars = mp.num_vars();
  lp.objective = mp.objective;
  lp.lower = mp.lower;
  lp.upper = mp.upper;
  lp.rows.reserve(mp.rows.size());
  for (const auto& row : mp.rows)
    lp.rows.push_back({row.coeffs, row.sense, row.rhs});
  return lp;
}

std::string to_lp_text(const MasterProblem& mp) {
  std::ostringstream out;
  out << "minimize\n ";
  for (int j = 0; j < mp.num_vars(); ++j)
    if (mp.objective[j] != 0.0)
      out << " + " << mp.objective[j] << " v" << j;
  out << "\nsubject to\n";
  for (const auto& row : mp.rows) {
    out << " [" << kind_name(row.kind) << "] " << row.label << ":";
    for (auto [j, c] : row.coeffs) out << " " << (c >= 0 ? "+" : "") << c << " v" << j;
    out << (row.sense == 'L' ? " <= " : row.sense == 'G' ? " >= " : " = ")
        << row.rhs << "\n";
  }
  out << "bounds\n";
  for (int j = 0; j < mp.num_vars(); ++j)
    out << " " << mp.lower[j] << " <= v" << j << " <= " << mp.upper[j] << "\n";
  return out.str();
}

}  // namespace wdn
