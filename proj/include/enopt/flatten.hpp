#pragma once

// Deterministic-equivalent construction: replicate second-stage constraints
// per (scenario, timepoint), bind parameter data, optionally discretize
// states and linearize targeted constraints, and emit/parse the result as
// canonical LP text or an expression listing.

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "enopt/transform.hpp"

namespace enopt {

struct FlatVariable {
  std::string name;
  SymbolRef sym;
  VarDomain domain = VarDomain::Real;
  double lo = 0.0, hi = 0.0;  // always finite; defaulted when unbounded
};

struct FlatConstraint {
  std::string name;
  Expr lhs, rhs;
  Relation rel = Relation::Eq;
  std::string scenario;  // empty for design-stage rows
  bool linear = false;
};

struct FlatModel {
  std::vector<FlatVariable> variables;
  std::vector<FlatConstraint> constraints;
  Expr objective;  // minimized
  // Origin of each variable: design instances keep empty scenario/timepoint.
  std::vector<Instance> instances;

  bool linear() const;
  const FlatVariable* find_variable(const std::string& name) const;
};

enum class LinearizeMethod { ConvexCombination, MultipleChoice };

struct FlatOptions {
  bool discretize = true;
  LinearizeMethod method = LinearizeMethod::ConvexCombination;
  // Targets: constraint name -> ordered (qualified symbol name, breakpoints).
  GridSpec linearize;
  bool parallel = true;  // scenario-parallel replication
};

FlatModel flatten(const ProblemSpec& p, const FlatOptions& opt = {});

// Structural affinity scan: fills coefficient-per-symbol-id and the constant
// term when e is affine in variables; returns false otherwise. Products of
// two variables are nonlinear even when one factor is binary.
bool affine_decompose(const Expr& e, std::map<std::uint64_t, double>& coefs,
                      double& constant);

// Canonical LP text (linear models only; NonlinearModel otherwise). Output
// is byte-deterministic; emit(parse(emit(m))) == emit(m).
std::string emit_canonical_lp(const FlatModel& m);
FlatModel parse_canonical_lp(std::string_view text);

// Expression listing for nonlinear models: common subexpressions are pulled
// into a defs block, then objective and rows in the expression grammar.
std::string emit_expr_listing(const FlatModel& m);

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, IterLimit, NodeLimit };

const char* status_text(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::map<std::string, double> values;  // instance name -> value
  std::optional<double> bound_gap;
};

// Solution file: "# status <s>" and "# objective <v>" header comments, then
// one "name value" line per variable in model order.
std::string write_solution(const FlatModel& m, const Solution& sol);
Solution parse_solution(const FlatModel& m, std::istream& in);

// Installs a solution into the problem's design/operation views.
void write_back(ProblemSpec& p, const FlatModel& m, const Solution& sol);

// Objective value of an assignment given by instance name.
double evaluate_objective(const FlatModel& m,
                          const std::map<std::string, double>& values);

// Builds an alternative objective over an existing flat model's instances:
// design_part + sum_s w_s sum_t delta * operation_part(s, t), using the
// same data binding as the model's own objective.
Expr flatten_objective(const ProblemSpec& p, const FlatModel& m,
                       const Expr& design_part, const Expr& operation_part);

// Splits an expression into (design, operation) parts by classifying its
// top-level sum terms; a SecondStage term goes to the operation part.
std::pair<Expr, Expr> split_objective(const Expr& e);

}  // namespace enopt
