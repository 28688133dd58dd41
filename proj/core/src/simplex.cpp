#include "wdn/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <stdexcept>

namespace wdn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper };

// One product-form update: after a pivot in row r with spike w = B^{-1} a_q,
// the new basis inverse is E^{-1} B^{-1} with E the identity whose column r
// is replaced by w.
struct Eta {
  int row;
  std::vector<std::pair<int, double>> spike;  // nonzeros of w
  double diag;                                // w[row]
};

class Engine {
 public:
  Engine(const LinearProgram& lp, const SimplexSolver::Options& opts)
      : lp_(lp), opts_(opts), n_(lp.num_vars), m_(static_cast<int>(lp.rows.size())) {
    build_columns();
  }

  LpSolution run(const SimplexBasis* warm);

 private:
  const LinearProgram& lp_;
  SimplexSolver::Options opts_;
  int n_, m_;
  int total_ = 0;  // n_ + m_

  // Column-major constraint matrix including logical columns.
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, cost_;
  std::vector<double> rhs_;

  std::vector<int> basic_;          // size m_
  std::vector<VarState> state_;     // size total_
  std::vector<double> beta_;        // values of basic variables, size m_
  std::vector<double> dj_;          // reduced costs, size total_

  // Reduced factorization of the basis (see refactorize for the layout).
  // mutable: Eigen's SparseLU::adjoint() is non-const even for solves.
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  // Snapshot of the basis structure at factorization time; pivots since are
  // carried by the eta file, so solves must not consult the live basic_.
  std::vector<int> spos_;    // basis positions holding structural variables
  std::vector<int> svar_;    // the structural variable at each such position
  std::vector<int> lrow_;    // position -> covered row if logical, else -1
  std::vector<int> rrows_;   // rows not covered by a basic logical
  std::vector<int> rindex_;  // row -> index in rrows_, or -1 if covered
  std::vector<Eta> etas_;
  bool factor_ok_ = false;
  bool perturbed_ = false;

  void build_columns();
  void cold_basis();
  // Refactorizes the current basis; a numerically singular basis falls back
  // to the always-factorizable all-logical basis (losing warmth, not
  // correctness: the cold start is dual feasible by construction).
  void ensure_factor();
  void adopt_basis(const SimplexBasis& warm);
  bool refactorize();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void recompute_beta();
  void recompute_duals();
  double nonbasic_value(int j) const {
    return state_[j] == VarState::AtUpper ? ub_[j] : lb_[j];
  }
  LpSolution extract(LpStatus status, long iters) const;
};

void Engine::build_columns() {
  total_ = n_ + m_;
  cols_.assign(total_, {});
  lb_.assign(total_, 0.0);
  ub_.assign(total_, 0.0);
  cost_.assign(total_, 0.0);
  rhs_.assign(m_, 0.0);

  for (int j = 0; j < n_; ++j) {
    lb_[j] = lp_.lower[j];
    ub_[j] = lp_.upper[j];
    cost_[j] = lp_.objective[j];
    if (!(lb_[j] <= ub_[j]))
      throw std::invalid_argument("lp: variable with empty domain");
  }
  for (int i = 0; i < m_; ++i) {
    const auto& row = lp_.rows[i];
    // Equilibrate: divide each row by its largest coefficient magnitude.
    // The logical keeps coefficient 1, which only rescales its units; the
    // feasible set over structural variables is unchanged, and mixed-scale
    // instances (flow caps ~1e-3 against head-loss slopes ~1e5) stop
    // wrecking the basis factorization and the ratio tests.
    double scale = 0.0;
    for (auto [j, a] : row.coeffs) scale = std::max(scale, std::abs(a));
    scale = scale > 0.0 ? 1.0 / scale : 1.0;
    rhs_[i] = row.rhs * scale;
    for (auto [j, a] : row.coeffs) {
      if (j < 0 || j >= n_) throw std::invalid_argument("lp: bad column index");
      if (a != 0.0) cols_[j].push_back({i, a * scale});
    }
    int s = n_ + i;
    cols_[s] = {{i, 1.0}};
    switch (row.sense) {
      case 'L': lb_[s] = 0.0; ub_[s] = kInf; break;
      case 'G': lb_[s] = -kInf; ub_[s] = 0.0; break;
      case 'E': lb_[s] = 0.0; ub_[s] = 0.0; break;
      default: throw std::invalid_argument("lp: bad row sense");
    }
  }
  // Rows are assembled in index order already; columns need sorting only if
  // a variable appears twice in one row, which add-style builders avoid.
}

void Engine::cold_basis() {
  basic_.resize(m_);
  state_.assign(total_, VarState::AtLower);
  for (int i = 0; i < m_; ++i) {
    basic_[i] = n_ + i;
    state_[n_ + i] = VarState::Basic;
  }
  // Rest each structural on the bound that makes its reduced cost sign
  // dual feasible (y = 0 at the all-logical basis, so d_j = c_j).
  for (int j = 0; j < n_; ++j) {
    if (cost_[j] < 0.0 && std::isfinite(ub_[j]))
      state_[j] = VarState::AtUpper;
    else if (!std::isfinite(lb_[j]))
      state_[j] = std::isfinite(ub_[j]) ? VarState::AtUpper : VarState::AtLower;
    else
      state_[j] = VarState::AtLower;
  }
}

void Engine::adopt_basis(const SimplexBasis& warm) {
  basic_.assign(warm.basic.begin(), warm.basic.end());
  state_.assign(total_, VarState::AtLower);
  for (int j = 0; j < total_ && j < static_cast<int>(warm.at_upper.size()); ++j)
    if (warm.at_upper[j]) state_[j] = VarState::AtUpper;
  for (int i = static_cast<int>(warm.basic.size()); i < m_; ++i)
    basic_.push_back(n_ + i);  // logicals of appended rows
  for (int i = 0; i < m_; ++i) {
    int j = basic_[i];
    if (j < 0 || j >= total_) throw std::invalid_argument("lp: bad warm basis");
    state_[j] = VarState::Basic;
  }
  // A nonbasic variable must rest on a finite bound.
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == VarState::AtLower && !std::isfinite(lb_[j]))
      state_[j] = VarState::AtUpper;
    else if (state_[j] == VarState::AtUpper && !std::isfinite(ub_[j]))
      state_[j] = VarState::AtLower;
  }
}

// The basis is dominated by logical columns (unit vectors), so only the
// structural basic columns need a genuine factorization. With S the basis
// positions holding structural variables and R the rows not covered by a
// basic logical, B is a permutation of [A_RS 0; A_LS I]: factoring the
// |S| x |S| block A_RS suffices, and |S| never exceeds the structural
// variable count even when cut rows push m into the thousands.
bool Engine::refactorize() {
  spos_.clear();
  svar_.clear();
  lrow_.assign(m_, -1);
  rrows_.clear();
  rindex_.assign(m_, -1);
  std::vector<char> covered(m_, 0);
  for (int k = 0; k < m_; ++k) {
    int j = basic_[k];
    if (j >= n_) {
      covered[j - n_] = 1;
      lrow_[k] = j - n_;
    } else {
      spos_.push_back(k);
      svar_.push_back(j);
    }
  }
  for (int i = 0; i < m_; ++i)
    if (!covered[i]) {
      rindex_[i] = static_cast<int>(rrows_.size());
      rrows_.push_back(i);
    }
  const int s = static_cast<int>(spos_.size());
  etas_.clear();
  if (static_cast<int>(rrows_.size()) != s) {
    factor_ok_ = false;
    return false;
  }
  if (s == 0) {
    factor_ok_ = true;
    return true;
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < s; ++t)
    for (auto [i, a] : cols_[svar_[t]])
      if (rindex_[i] >= 0) trips.push_back({rindex_[i], t, a});
  Eigen::SparseMatrix<double> M(s, s);
  M.setFromTriplets(trips.begin(), trips.end());
  lu_.compute(M);
  factor_ok_ = (lu_.info() == Eigen::Success);
  return factor_ok_;
}

void Engine::ftran(Eigen::VectorXd& v) const {
  // Solve B w = v: the reduced block gives the structural part, covered
  // rows then yield each basic logical by direct substitution.
  const int s = static_cast<int>(spos_.size());
  Eigen::VectorXd xs;
  if (s > 0) {
    Eigen::VectorXd bR(s);
    for (int t = 0; t < s; ++t) bR[t] = v[rrows_[t]];
    xs = lu_.solve(bR);
    for (int t = 0; t < s; ++t) {
      double xt = xs[t];
      if (xt != 0.0)
        for (auto [i, a] : cols_[svar_[t]])
          if (rindex_[i] < 0) v[i] -= a * xt;
    }
  }
  Eigen::VectorXd out(m_);
  for (int k = 0; k < m_; ++k) out[k] = lrow_[k] >= 0 ? v[lrow_[k]] : 0.0;
  for (int t = 0; t < s; ++t) out[spos_[t]] = xs[t];
  v = std::move(out);
  for (const auto& e : etas_) {
    double piv = v[e.row] / e.diag;
    if (piv != 0.0) {
      for (auto [i, w] : e.spike) v[i] -= w * piv;
    }
    v[e.row] = piv;
  }
}

void Engine::btran(Eigen::VectorXd& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = v[it->row];
    for (auto [i, w] : it->spike) acc -= w * v[i];
    v[it->row] = acc / it->diag;
  }
  // Solve B^T z = v: basic logicals pin z on their rows, the structural
  // equations then reduce to the transposed block on the remaining rows.
  const int s = static_cast<int>(spos_.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m_);
  for (int k = 0; k < m_; ++k)
    if (lrow_[k] >= 0) z[lrow_[k]] = v[k];
  if (s > 0) {
    Eigen::VectorXd rhsS(s);
    for (int t = 0; t < s; ++t) {
      double c = v[spos_[t]];
      for (auto [i, a] : cols_[svar_[t]])
        if (rindex_[i] < 0) c -= a * z[i];
      rhsS[t] = c;
    }
    Eigen::VectorXd zR = lu_.adjoint().solve(rhsS);
    for (int t = 0; t < s; ++t) z[rrows_[t]] = zR[t];
  }
  v = std::move(z);
}

void Engine::ensure_factor() {
  if (refactorize()) return;
  cold_basis();
  if (!refactorize()) throw std::runtime_error("lp: singular logical basis");
}

void Engine::recompute_beta() {
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m_);
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == VarState::Basic) continue;
    double xj = nonbasic_value(j);
    if (xj != 0.0)
      for (auto [i, a] : cols_[j]) r[i] -= a * xj;
  }
  ftran(r);
  beta_.assign(r.data(), r.data() + m_);
}

void Engine::recompute_duals() {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
  for (int i = 0; i < m_; ++i) y[i] = cost_[basic_[i]];
  btran(y);
  dj_.assign(total_, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == VarState::Basic) continue;
    double d = cost_[j];
    for (auto [i, a] : cols_[j]) d -= y[i] * a;
    dj_[j] = d;
  }
}

LpSolution Engine::extract(LpStatus status, long iters) const {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iters;
  sol.x.assign(n_, 0.0);
  std::vector<double> full(total_, 0.0);
  for (int j = 0; j < total_; ++j)
    if (state_[j] != VarState::Basic) full[j] = nonbasic_value(j);
  for (int i = 0; i < m_; ++i) full[basic_[i]] = beta_[i];
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) {
    sol.x[j] = full[j];
    obj += cost_[j] * full[j];
  }
  sol.objective = obj;
  sol.basis.basic = basic_;
  sol.basis.at_upper.assign(total_, 0);
  for (int j = 0; j < total_; ++j)
    if (state_[j] == VarState::AtUpper) sol.basis.at_upper[j] = 1;
  return sol;
}

LpSolution Engine::run(const SimplexBasis* warm) {
  bool warm_ok = warm && !warm->empty() &&
                 static_cast<int>(warm->basic.size()) <= m_;
  if (warm_ok)
    adopt_basis(*warm);
  else
    cold_basis();

  if (!refactorize()) {
    // Degenerate warm basis (numerically singular): restart cold.
    cold_basis();
    if (!refactorize()) throw std::runtime_error("lp: singular logical basis");
  }
  recompute_beta();
  recompute_duals();

  // A warm basis can be dual infeasible for the current problem (changed
  // bounds, appended rows, roundoff drift). Flipping an offending nonbasic
  // to its other finite bound restores dual feasibility without losing the
  // basis; only a variable with no finite opposite bound forces a cold
  // restart.
  {
    bool flipped = false;
    bool restart = false;
    for (int j = 0; j < total_ && !restart; ++j) {
      if (lb_[j] == ub_[j]) continue;
      if (state_[j] == VarState::AtLower && dj_[j] < -1e-7) {
        if (std::isfinite(ub_[j])) {
          state_[j] = VarState::AtUpper;
          flipped = true;
        } else {
          restart = true;
        }
      } else if (state_[j] == VarState::AtUpper && dj_[j] > 1e-7) {
        if (std::isfinite(lb_[j])) {
          state_[j] = VarState::AtLower;
          flipped = true;
        } else {
          restart = true;
        }
      }
    }
    if (restart) {
      cold_basis();
      if (!refactorize())
        throw std::runtime_error("lp: singular logical basis");
      recompute_beta();
      recompute_duals();
    } else if (flipped) {
      recompute_beta();
    }
  }

  long iters = 0;
  int pivots_since_factor = 0;
  int degenerate_streak = 0;
  Eigen::VectorXd rho(m_), w(m_);
  std::vector<double> alpha(total_, 0.0);
  std::vector<int> candidates;
  candidates.reserve(total_);

  while (true) {
    if (iters >= opts_.max_iterations) return extract(LpStatus::IterationLimit, iters);

    // A long run of dual-degenerate pivots means the ratio test keeps
    // hitting ties. A one-time, tiny, strictly downward cost perturbation
    // breaks the ties; pushing costs down means the reported objective can
    // only underestimate, so it stays a valid lower bound for callers that
    // use it to prune. Bland's rule remains the last resort if the
    // perturbed problem still stalls.
    if (degenerate_streak >= opts_.bland_after && !perturbed_) {
      perturbed_ = true;
      std::mt19937_64 prng(0x9e3779b97f4a7c15ull);
      std::uniform_real_distribution<double> u(0.5, 1.0);
      for (int j = 0; j < total_; ++j)
        if (lb_[j] != ub_[j])
          cost_[j] -= 1e-9 * u(prng) * (1.0 + std::abs(cost_[j]));
      recompute_duals();
      degenerate_streak = 0;
      continue;
    }
    // Leaving variable: largest primal bound violation among basics; under
    // Bland's anti-cycling regime, the violated basic with smallest index.
    const bool bland = perturbed_ && degenerate_streak >= opts_.bland_after;
    int r = -1;
    double worst = opts_.feas_tol;
    double target = 0.0;
    int bland_var = total_;
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      double below = lb_[j] - beta_[i];
      double above = beta_[i] - ub_[j];
      double viol = std::max(below, above);
      if (viol <= opts_.feas_tol) continue;
      bool take = bland ? j < bland_var : viol > worst;
      if (take) {
        worst = viol;
        r = i;
        target = below > above ? lb_[j] : ub_[j];
        bland_var = j;
      }
    }
    if (r < 0) {
      // Claimed optimal: confirm against a fresh factorization when the
      // eta file is nonempty, in case accumulated updates hid a violation.
      if (!etas_.empty()) {
        ensure_factor();
        recompute_beta();
        recompute_duals();
        pivots_since_factor = 0;
        bool clean = true;
        for (int i = 0; i < m_; ++i) {
          int j = basic_[i];
          if (beta_[i] < lb_[j] - opts_.feas_tol ||
              beta_[i] > ub_[j] + opts_.feas_tol) { clean = false; break; }
        }
        if (!clean) continue;
      }
      return extract(LpStatus::Optimal, iters);
    }

    bool leaving_below = beta_[r] < lb_[basic_[r]];

    // alpha_j = rho . A_j for nonbasic j, with rho = row r of B^{-1} A.
    rho.setZero();
    rho[r] = 1.0;
    btran(rho);
    candidates.clear();
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      if (lb_[j] == ub_[j]) continue;  // fixed, can never enter usefully
      double a = 0.0;
      for (auto [i, c] : cols_[j]) a += rho[i] * c;
      if (std::abs(a) <= opts_.pivot_tol) continue;
      // Eligibility keeps the dual step signed toward feasibility.
      bool at_lower = state_[j] == VarState::AtLower;
      bool ok = leaving_below ? (at_lower ? a < 0.0 : a > 0.0)
                              : (at_lower ? a > 0.0 : a < 0.0);
      if (ok) {
        alpha[j] = a;
        candidates.push_back(j);
      }
    }
    if (candidates.empty()) {
      // Dual ray: the violated row cannot be repaired, primal infeasible.
      return extract(LpStatus::Infeasible, iters);
    }

    // Entering variable: minimum ratio |d_j / alpha_j| keeps the remaining
    // reduced costs dual feasible. Ties go to the largest pivot normally;
    // under Bland's regime the smallest index among the minimizers wins,
    // which rules out cycling through tied zero-ratio candidates.
    int q = -1;
    double best_ratio = kInf;
    for (int j : candidates)
      best_ratio = std::min(best_ratio, std::abs(dj_[j] / alpha[j]));
    if (bland) {
      for (int j : candidates)
        if (std::abs(dj_[j] / alpha[j]) <= best_ratio + 1e-12) { q = j; break; }
    } else {
      double best_piv = 0.0;
      for (int j : candidates) {
        double ratio = std::abs(dj_[j] / alpha[j]);
        if (ratio <= best_ratio + 1e-12 && std::abs(alpha[j]) > best_piv) {
          best_piv = std::abs(alpha[j]);
          q = j;
        }
      }
    }

    double theta = dj_[q] / alpha[q];  // dual step
    w.setZero();
    for (auto [i, c] : cols_[q]) w[i] = c;
    ftran(w);
    if (std::abs(w[r]) <= opts_.pivot_tol) {
      // Updated spike disagrees with pricing: refactorize and retry. Counts
      // as an iteration so a persistent mismatch hits the iteration limit
      // instead of looping forever.
      ++iters;
      ensure_factor();
      recompute_beta();
      recompute_duals();
      pivots_since_factor = 0;
      continue;
    }

    double xq = nonbasic_value(q);
    double delta = (beta_[r] - target) / w[r];  // primal step of entering var

    // Dual update over nonbasics: d_j -= theta * alpha_j.
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || j == q) continue;
      double a = 0.0;
      for (auto [i, c] : cols_[j]) a += rho[i] * c;
      if (a != 0.0) dj_[j] -= theta * a;
    }
    int leave = basic_[r];
    dj_[leave] = -theta;
    dj_[q] = 0.0;

    // Primal update.
    if (delta != 0.0)
      for (int i = 0; i < m_; ++i) beta_[i] -= delta * w[i];
    beta_[r] = xq + delta;
    basic_[r] = q;
    state_[q] = VarState::Basic;
    state_[leave] = leaving_below ? VarState::AtLower : VarState::AtUpper;

    Eta eta;
    eta.row = r;
    eta.diag = w[r];
    for (int i = 0; i < m_; ++i)
      if (w[i] != 0.0 && i != r) eta.spike.push_back({i, w[i]});
    etas_.push_back(std::move(eta));

    ++iters;
    ++pivots_since_factor;
    // A dual-degenerate pivot (theta ~ 0) makes no dual-objective progress;
    // long runs of them indicate stalling or cycling, so switch to Bland.
    degenerate_streak =
        std::abs(theta) < opts_.dual_tol ? degenerate_streak + 1 : 0;
    if (pivots_since_factor >= opts_.refactor_every) {
      ensure_factor();
      recompute_beta();
      recompute_duals();
      pivots_since_factor = 0;
    }
  }
}

}  // namespace

int LinearProgram::add_variable(double lb, double ub, double obj) {
  lower.push_back(lb);
  upper.push_back(ub);
  objective.push_back(obj);
  return num_vars++;
}

LpSolution SimplexSolver::solve(const LinearProgram& lp, const SimplexBasis* warm) {
  Engine engine(lp, opts_);
  return engine.run(warm);
}

}  // namespace wdn
