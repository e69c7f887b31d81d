#pragma once

// Reformulations applied between modeling and solving: implicit Euler
// discretization of declared states, piecewise linearization of nonlinear
// expressions (convex-combination and multiple-choice encodings over a Kuhn
// triangulation), max-smoothing, and tanh elimination.

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "enopt/problem.hpp"

namespace enopt {

// Shared registry of per-(scenario, timepoint) variable instances. Flattening
// and discretization draw from the same table so that a state instance and
// its derivative instance are the same symbols everywhere.
class InstanceTable {
public:
  // Creates (or returns) the instance of `base` at (s, t); design-stage
  // symbols use empty s/t and map to themselves' unindexed instance.
  SymbolRef get(const SymbolRef& base, const std::string& s,
                const std::string& t);

  const std::map<std::tuple<std::uint64_t, std::string, std::string>,
                 SymbolRef>&
  entries() const {
    return entries_;
  }

private:
  std::map<std::tuple<std::uint64_t, std::string, std::string>, SymbolRef>
      entries_;
};

// Implicit Euler state links: for every state y, scenario s, and consecutive
// time points (t_prev, t), emits y[s,t] = y[s,t_prev] + delta * y_dot[s,t];
// the first point links back to the state's initial value from the data
// table. delta = 0 degenerates to y[s,t] = y[s,t_prev].
std::vector<RelationalConstraint> apply_implicit_euler(const ProblemSpec& p,
                                                       InstanceTable& table);

struct PiecewiseGrid {
  // Per input dimension: the symbol and its strictly increasing breakpoints.
  std::vector<std::pair<SymbolRef, std::vector<double>>> dims;
  // Function samples at every grid vertex, row-major (last dim fastest).
  std::vector<double> values;

  std::size_t vertex_count() const;
  double value_at(const std::vector<std::size_t>& idx) const;
  void check() const;  // GridMismatch on malformed breakpoints or values
};

// Samples `e` at every vertex of the breakpoint lattice.
PiecewiseGrid sample_grid(
    const Expr& e,
    std::vector<std::pair<SymbolRef, std::vector<double>>> dims);

// Uniform helper: n breakpoints per dimension spanning each variable's
// bounds. Throws UnboundedVariable when a variable lacks a bound.
PiecewiseGrid uniform_grid(const Expr& e, const std::vector<SymbolRef>& vars,
                          std::size_t n = 5);

struct LinearizationArtifacts {
  SymbolRef surrogate;                     // continuous stand-in for e
  std::vector<SymbolRef> aux_continuous;   // lambda weights / copies
  std::vector<SymbolRef> aux_binary;       // simplex selectors
  std::vector<RelationalConstraint> constraints;
};

// Convex-combination encoding: one lambda per grid vertex, binaries select
// one Kuhn simplex of one cell, inputs and surrogate are lambda-combinations.
LinearizationArtifacts linearize_convex_combination(
    const Expr& e, const PiecewiseGrid& grid,
    const std::string& name_prefix = "pwl");

// Multiple-choice encoding: per-simplex binary with disaggregated lambda
// copies; exactly one simplex active.
LinearizationArtifacts linearize_multiple_choice(
    const Expr& e, const PiecewiseGrid& grid,
    const std::string& name_prefix = "pwl");

// 0.5*(a + b + ((a - b + eps)^2)^0.5), eps > 0.
Expr smooth_max(const Expr& a, const Expr& b, double eps);

// Replaces every tanh(x) with 1 - 2/(exp(2x) + 1); returns the input tree
// unchanged (same nodes) when no tanh occurs.
Expr reformulate_tanh(const Expr& e);

// Grid specification document: one block per linearization target,
//   grid <constraint-or-expression name> {
//     var <qualified symbol>: b0 b1 ... bn
//   }
struct GridSpec {
  // target name -> ordered (symbol name, breakpoints)
  std::vector<std::pair<std::string,
                        std::vector<std::pair<std::string, std::vector<double>>>>>
      targets;
};

GridSpec parse_grid_spec(std::istream& in);
GridSpec parse_grid_spec_file(const std::string& path);

}  // namespace enopt
