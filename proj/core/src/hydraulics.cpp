#include "wdn/hydraulics.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <deque>

namespace wdn {

double head_loss(double q, double length, double resistance, double alpha) {
  return length * resistance * q * std::pow(std::abs(q), alpha - 1.0);
}

namespace {

struct TreeInit {
  std::vector<double> flows;
  std::vector<double> heads;
};

// Spanning-tree flow distribution: route each junction's demand up a BFS
// forest rooted at the reservoirs, then propagate heads down the tree.
TreeInit spanning_tree_start(const Network& net, const DesignVector& design) {
  const size_t num_nodes = net.nodes.size();
  std::vector<int> parent_arc(num_nodes, -1);
  std::vector<int> parent(num_nodes, -1);
  std::vector<int> order;
  std::vector<char> seen(num_nodes, 0);
  std::deque<int> queue;
  for (int s : net.reservoirs()) {
    seen[s] = 1;
    queue.push_back(s);
    order.push_back(s);
  }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    auto visit = [&](int v, int a) {
      if (seen[v]) return;
      seen[v] = 1;
      parent[v] = u;
      parent_arc[v] = a;
      order.push_back(v);
      queue.push_back(v);
    };
    for (int a : net.out_arcs(u)) visit(net.pipes[a].head, a);
    for (int a : net.in_arcs(u)) visit(net.pipes[a].tail, a);
  }

  TreeInit init;
  init.flows.assign(net.pipes.size(), 0.0);
  std::vector<double> subtree(num_nodes, 0.0);
  for (int i : net.junctions()) subtree[i] = net.nodes[i].demand;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (parent[v] < 0) continue;
    int a = parent_arc[v];
    // arc oriented toward v carries +subtree demand
    if (net.pipes[a].head == v)
      init.flows[a] += subtree[v];
    else
      init.flows[a] -= subtree[v];
    subtree[parent[v]] += subtree[v];
  }

  init.heads.assign(num_nodes, 0.0);
  for (int s : net.reservoirs()) init.heads[s] = net.nodes[s].fixed_head;
  for (int v : order) {
    if (parent[v] < 0) continue;
    int a = parent_arc[v];
    const Pipe& p = net.pipes[a];
    double r = p.options[design.choice[a]].resistance;
    double hl = head_loss(init.flows[a], p.length, r, net.alpha);
    init.heads[v] = (p.head == v) ? init.heads[parent[v]] - hl : init.heads[parent[v]] + hl;
  }
  return init;
}

}  // namespace

HydraulicState solve_fixed_design(const Network& net, const DesignVector& design,
                                  const HydraulicOptions& opts) {
  if (design.choice.size() != net.pipes.size())
    throw SolverError("design does not cover every pipe");
  const int num_arcs = static_cast<int>(net.pipes.size());
  const auto& junctions = net.junctions();
  const int num_junctions = static_cast<int>(junctions.size());
  std::vector<int> junction_slot(net.nodes.size(), -1);
  for (int k = 0; k < num_junctions; ++k) junction_slot[junctions[k]] = k;

  TreeInit init = spanning_tree_start(net, design);
  std::vector<double> q = std::move(init.flows);
  std::vector<double> h = std::move(init.heads);

  auto head_at = [&](const std::vector<double>& heads, int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : heads[i];
  };

  const int dim = num_arcs + num_junctions;
  Eigen::VectorXd residual(dim);
  auto eval_residual = [&](const std::vector<double>& qv, const std::vector<double>& hv,
                           Eigen::VectorXd& out) {
    for (int a = 0; a < num_arcs; ++a) {
      const Pipe& p = net.pipes[a];
      double r = p.options[design.choice[a]].resistance;
      out[a] = head_at(hv, p.tail) - head_at(hv, p.head) -
               head_loss(qv[a], p.length, r, net.alpha);
    }
    for (int k = 0; k < num_junctions; ++k) {
      int i = junctions[k];
      double balance = -net.nodes[i].demand;
      for (int a : net.in_arcs(i)) balance += qv[a];
      for (int a : net.out_arcs(i)) balance -= qv[a];
      out[num_arcs + k] = balance;
    }
  };

  eval_residual(q, h, residual);
  double res_norm = residual.lpNorm<Eigen::Infinity>();

  HydraulicState state;
  Eigen::SparseMatrix<double> jac(dim, dim);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  int iter = 0;
  for (; iter < opts.max_iterations && res_norm > opts.tol_feas; ++iter) {
    trips.clear();
    for (int a = 0; a < num_arcs; ++a) {
      const Pipe& p = net.pipes[a];
      double r = p.options[design.choice[a]].resistance;
      // d(head loss)/dq vanishes at q = 0; regularize the Jacobian only
      double qa = std::max(std::abs(q[a]), opts.q_eps);
      trips.emplace_back(a, a, -net.alpha * p.length * r * std::pow(qa, net.alpha - 1.0));
      if (junction_slot[p.tail] >= 0)
        trips.emplace_back(a, num_arcs + junction_slot[p.tail], 1.0);
      if (junction_slot[p.head] >= 0)
        trips.emplace_back(a, num_arcs + junction_slot[p.head], -1.0);
    }
    for (int k = 0; k < num_junctions; ++k) {
      int i = junctions[k];
      for (int a : net.in_arcs(i)) trips.emplace_back(num_arcs + k, a, 1.0);
      for (int a : net.out_arcs(i)) trips.emplace_back(num_arcs + k, a, -1.0);
    }
    jac.setFromTriplets(trips.begin(), trips.end());
    lu.compute(jac);
    if (lu.info() != Eigen::Success)
      throw SolverError("singular Jacobian in hydraulic solve");
    Eigen::VectorXd step = lu.solve(-residual);

    double t = 1.0;
    std::vector<double> q_new(num_arcs), h_new(h);
    Eigen::VectorXd trial(dim);
    while (true) {
      for (int a = 0; a < num_arcs; ++a) q_new[a] = q[a] + t * step[a];
      for (int k = 0; k < num_junctions; ++k)
        h_new[junctions[k]] = h[junctions[k]] + t * step[num_arcs + k];
      eval_residual(q_new, h_new, trial);
      double trial_norm = trial.lpNorm<Eigen::Infinity>();
      if (trial_norm < res_norm || t <= opts.min_step) {
        q.swap(q_new);
        h.swap(h_new);
        residual.swap(trial);
        res_norm = residual.lpNorm<Eigen::Infinity>();
        break;
      }
      t *= 0.5;
    }
  }

  if (res_norm > opts.tol_feas)
    throw SolverError("hydraulic solve did not converge: residual " +
                      std::to_string(res_norm) + " after " + std::to_string(iter) +
                      " iterations");

  for (int s : net.reservoirs()) h[s] = net.nodes[s].fixed_head;
  state.flows = std::move(q);
  state.heads = std::move(h);
  state.residual_norm = res_norm;
  state.iterations = iter;
  return state;
}

double primal_objective(const Network& net, const DesignVector& design,
                        std::span<const double> q_pos, std::span<const double> q_neg) {
  double friction = 0.0;
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    double r = p.options[design.choice[a]].resistance;
    friction += p.length * r / (1.0 + net.alpha) *
                (std::pow(q_pos[a], 1.0 + net.alpha) + std::pow(q_neg[a], 1.0 + net.alpha));
  }
  double generation = 0.0;
  for (int s : net.reservoirs())
    for (int a : net.out_arcs(s))
      generation += net.nodes[s].fixed_head * (q_pos[a] - q_neg[a]);
  return friction - generation;
}

double dual_objective(const Network& net, const DesignVector& design,
                      std::span<const double> heads) {
  auto head_at = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : heads[i];
  };
  double loss = 0.0;
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    double r = p.options[design.choice[a]].resistance;
    double dh = head_at(p.tail) - head_at(p.head);
    loss += std::pow(std::abs(dh), 1.0 + 1.0 / net.alpha) /
            std::pow(p.length * r, 1.0 / net.alpha);
  }
  double demand_power = 0.0;
  for (int j : net.junctions()) demand_power += head_at(j) * net.nodes[j].demand;
  return -net.alpha / (1.0 + net.alpha) * loss - demand_power;
}

DualityReport evaluate_objectives(const Network& net, const DesignVector& design,
                                  const HydraulicState& state) {
  DualityReport rep;
  auto head_at = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : state.heads[i];
  };
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    double r = p.options[design.choice[a]].resistance;
    double qp = std::max(0.0, state.flows[a]);
    double qn = std::max(0.0, -state.flows[a]);
    rep.f1 += p.length * r / (1.0 + net.alpha) *
              (std::pow(qp, 1.0 + net.alpha) + std::pow(qn, 1.0 + net.alpha));
    double dh = head_at(p.tail) - head_at(p.head);
    double dhp = std::max(0.0, dh), dhn = std::max(0.0, -dh);
    rep.f3 += net.alpha / (1.0 + net.alpha) *
              (std::pow(dhp, 1.0 + 1.0 / net.alpha) + std::pow(dhn, 1.0 + 1.0 / net.alpha)) /
              std::pow(p.length * r, 1.0 / net.alpha);
  }
  for (int s : net.reservoirs())
    for (int a : net.out_arcs(s)) rep.f2 += net.nodes[s].fixed_head * state.flows[a];
  for (int j : net.junctions()) rep.f4 += head_at(j) * net.nodes[j].demand;

  rep.f_primal = rep.f1 - rep.f2;
  rep.f_dual = -rep.f3 - rep.f4;
  rep.gap = rep.f_primal - rep.f_dual;
  return rep;
}

FeasibilityResult check_design_feasibility(const Network& net, const DesignVector& design,
                                           const HydraulicOptions& opts) {
  constexpr double kFlowTol = 1e-9;
  constexpr double kHeadTol = 1e-6;
  FeasibilityResult result;
  result.state = solve_fixed_design(net, design, opts);
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    const ResistanceOption& o = p.options[design.choice[a]];
    double q = result.state.flows[a];
    if (q > o.qmax_pos + kFlowTol)
      result.violations.push_back(
          {BoundViolation::Kind::FlowAboveMax, p.id, q - o.qmax_pos});
    if (q < -o.qmax_neg - kFlowTol)
      result.violations.push_back(
          {BoundViolation::Kind::FlowBelowMin, p.id, -o.qmax_neg - q});
  }
  for (int j : net.junctions()) {
    const Node& n = net.nodes[j];
    double h = result.state.heads[j];
    if (h < n.head_lb - kHeadTol)
      result.violations.push_back({BoundViolation::Kind::HeadBelowMin, n.id, n.head_lb - h});
    if (n.has_head_ub && h > n.head_ub + kHeadTol)
      result.violations.push_back({BoundViolation::Kind::HeadAboveMax, n.id, h - n.head_ub});
  }
  result.feasible = result.violations.empty();
  return result;
}

double lagrangian_value(const Network& net, const DesignVector& design,
                        std::span<const double> q_pos, std::span<const double> q_neg,
                        std::span<const double> heads) {
  auto head_at = [&](int i) {
    return net.nodes[i].is_reservoir() ? net.nodes[i].fixed_head : heads[i];
  };
  double value = 0.0;
  for (int j : net.junctions()) value -= head_at(j) * net.nodes[j].demand;
  for (size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    double coeff = p.length * p.options[design.choice[a]].resistance / (1.0 + net.alpha);
    double dh = head_at(p.tail) - head_at(p.head);
    value += coeff * std::pow(q_pos[a], 1.0 + net.alpha) - dh * q_pos[a];
    value += coeff * std::pow(q_neg[a], 1.0 + net.alpha) + dh * q_neg[a];
  }
  return value;
}

}  // namespace wdn
