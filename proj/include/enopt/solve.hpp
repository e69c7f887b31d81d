#pragma once

// Desk-scale built-in solvers: dense two-phase primal simplex for LPs,
// best-bound branch-and-bound for MILPs, and a pointwise feasibility
// evaluator for (possibly nonlinear) flat models.

#include <map>
#include <string>
#include <vector>

#include "enopt/flatten.hpp"

namespace enopt {

struct SolverOptions {
  double rel_gap = 1e-6;
  double abs_gap = 1e-9;
  double feas_tol = 1e-8;
  std::size_t max_iter = 100000;  // simplex pivots per LP
  std::size_t max_nodes = 200000;
  bool log = false;  // node/iteration lines to stderr

  void check() const;  // BadParams on non-positive tolerances
};

// Minimizes the affine objective over the affine rows; integrality is
// ignored. NotLinear on nonlinear input.
Solution solve_lp(const FlatModel& m, const SolverOptions& opt = {});

// Best-bound branch and bound over the LP relaxation. Branching variable:
// most fractional (ties by lowest index); down branch explored first.
Solution solve_milp(const FlatModel& m, const SolverOptions& opt = {});

struct FeasibilityReport {
  struct Entry {
    std::string name;
    double violation = 0.0;  // signed magnitude beyond the allowed side
  };
  std::vector<Entry> entries;  // one per constraint, plus violated bounds
  double max_violation = 0.0;
  double objective = 0.0;

  bool pass(double feas_tol) const { return max_violation <= feas_tol; }
};

// Residuals of every constraint (and variable bound) at a point given by
// instance name. MissingValue when the point is incomplete.
FeasibilityReport check_feasibility(const FlatModel& m,
                                    const std::map<std::string, double>& point,
                                    double feas_tol = 1e-8);

}  // namespace enopt
