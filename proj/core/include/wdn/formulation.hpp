#pragma once

#include "wdn/hydraulics.hpp"
#include "wdn/lp.hpp"
#include "wdn/network.hpp"

#include <string>
#include <vector>

namespace wdn {

/// Which linear master to build. Exact carries per-option head differences,
/// the auxiliary nonlinear-term variables, direction valid inequalities and
/// the linear strong-duality row; RelaxedPrevious is the older relaxation
/// with per-arc head differences and head-loss outer approximations only.
enum class MasterVariant { Exact, RelaxedPrevious };

enum class CutKind { Static, OaHeadloss, Qnl, Dhnl, NoGood };
enum class Direction { Positive, Negative };

struct LinearCut {
  std::vector<std::pair<int, double>> coeffs;
  char sense = 'L';
  double rhs = 0.0;
  CutKind kind = CutKind::Static;
  std::string label;
  // Generation metadata used for duplicate suppression (OA families only).
  int arc = -1;
  int ref_option = -1;
  Direction direction = Direction::Positive;
  double ref_point = 0.0;
};

/// Linear master over binaries x (option selection) and y (flow direction)
/// plus the continuous flow/head-difference/head variables. Holds the
/// variable space (bounds, objective) and the full row set, static rows
/// first followed by appended cuts.
class MasterProblem {
 public:
  const Network* net = nullptr;
  MasterVariant variant = MasterVariant::Exact;

  std::vector<double> lower, upper, objective;
  std::vector<LinearCut> rows;
  std::size_t static_rows = 0;

  int num_vars() const { return static_cast<int>(lower.size()); }
  int num_binaries() const { return num_x_ + num_y_; }

  // Variable index maps. Option indices follow Pipe::options order.
  int x(int arc, int opt) const { return x_base_[arc] + opt; }
  int y(int arc) const { return y_base_ + arc; }
  int q_pos(int arc, int opt) const { return qpos_base_[arc] + opt; }
  int q_neg(int arc, int opt) const { return qneg_base_[arc] + opt; }
  int dh_pos(int arc, int opt) const {
    return variant == MasterVariant::Exact ? dhpos_base_[arc] + opt
                                           : dhpos_base_[arc];
  }
  int dh_neg(int arc, int opt) const {
    return variant == MasterVariant::Exact ? dhneg_base_[arc] + opt
                                           : dhneg_base_[arc];
  }
  int head(int node) const { return head_base_ + node; }
  int q_nl(int arc) const { return qnl_base_ + arc; }
  int dh_nl(int arc) const { return dhnl_base_ + arc; }

  /// Appends a cut unless an OA cut of the same family, arc, reference
  /// option and direction already exists with a reference point within
  /// 1e-6 relative. Returns true when the cut was added.
  bool add_cut(LinearCut cut);

  friend MasterProblem build_master(const Network& net, MasterVariant variant);

 private:
  int num_x_ = 0, num_y_ = 0;
  std::vector<int> x_base_, qpos_base_, qneg_base_, dhpos_base_, dhneg_base_;
  int y_base_ = 0, head_base_ = 0, qnl_base_ = 0, dhnl_base_ = 0;
};

MasterProblem build_master(const Network& net, MasterVariant variant);

/// Aggregated equal-intercept tangent of the per-option head-loss curves at
/// reference flow q_tilde on the given option and direction.
LinearCut oa_headloss_cut(const MasterProblem& master, int arc, int ref_option,
                          double q_tilde, Direction dir);

/// Tangent lower bound on the flow nonlinearity variable q_NL (exact only).
LinearCut qnl_cut(const MasterProblem& master, int arc, int ref_option,
                  double q_tilde, Direction dir);

/// Tangent lower bound on the head-difference nonlinearity variable
/// dh_NL (exact only).
LinearCut dhnl_cut(const MasterProblem& master, int arc, int ref_option,
                   double dh_tilde, Direction dir);

/// Combinatorial cut excluding exactly the given design.
LinearCut nogood_cut(const MasterProblem& master, const DesignVector& design);

/// Embeds a feasible design's exact hydraulic state into the master's
/// variable space (direction convention: y=1 at zero flow).
std::vector<double> lift_design(const MasterProblem& master,
                                const DesignVector& design,
                                const HydraulicState& state);

/// Largest violation of any row or variable bound at the given point.
double max_constraint_violation(const MasterProblem& master,
                                const std::vector<double>& point);

LinearProgram to_lp(const MasterProblem& master);

/// Human-readable dump of the current master with row labels.
std::string to_lp_text(const MasterProblem& master);

}  // namespace wdn
