#pragma once

#include <cstdint>
#include <vector>

namespace wdn {

/// Bounded-variable LP in the form: minimize c'x subject to row senses
/// ('L' <=, 'E' =, 'G' >=) and finite box bounds on every variable.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower, upper;

  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    char sense = 'L';
    double rhs = 0.0;
  };
  std::vector<Row> rows;

  int add_variable(double lb, double ub, double obj = 0.0);
};

enum class LpStatus { Optimal, Infeasible, IterationLimit };

/// Simplex basis for warm starts. Columns 0..n-1 are structural, n+i is the
/// logical of row i. A basis saved against fewer rows than the current
/// program is extended by making the new logicals basic.
struct SimplexBasis {
  std::vector<int> basic;          // one column per row
  std::vector<std::uint8_t> at_upper;  // nonbasic rest position, sized n+m
  bool empty() const { return basic.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  SimplexBasis basis;
  long iterations = 0;
};

/// Bounded-variable dual revised simplex over a sparse LU factorization of
/// the basis with product-form updates. A cold start from the all-logical
/// basis is dual feasible by bound selection, so the dual method doubles as
/// the phase-1/phase-2 engine; warm bases from bound changes or row
/// appended rows stay dual feasible and re-solve in few pivots.
class SimplexSolver {
 public:
  struct Options {
    double feas_tol = 1e-7;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    long max_iterations = 200000;
    int refactor_every = 64;
    int bland_after = 1000;  // consecutive degenerate pivots
  };

  SimplexSolver() = default;
  explicit SimplexSolver(Options opts) : opts_(opts) {}

  LpSolution solve(const LinearProgram& lp, const SimplexBasis* warm = nullptr);

 private:
  Options opts_;
};

}  // namespace wdn
