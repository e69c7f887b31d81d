#pragma once

// User-level algorithms on top of the solver stack: augmented epsilon-
// constraint bi-objective sweeps, k-means scenario aggregation, and the
// fix-binaries-then-verify correction workflow.

#include <map>
#include <string>
#include <vector>

#include "enopt/solve.hpp"

namespace enopt {

struct ParetoPoint {
  double objective_a = 0.0;
  double objective_b = 0.0;
  std::map<std::string, double> design;  // design instance snapshot
  SolveStatus status = SolveStatus::Optimal;
};

// Augmented epsilon-constraint sweep: solves min a and min b for the range
// of b, then n_points subproblems min a + rho*slack s.t. b + slack = eps
// with uniformly spaced eps; rho = 1e-3 of the range of a. Objectives are
// expressions over system symbols; second-stage terms are weight-integrated
// like the problem objective. Infeasible subproblems are skipped. The result
// is filtered to a mutually non-dominated set, ordered by eps.
std::vector<ParetoPoint> epsilon_constraint_pareto(
    const ProblemSpec& p, const Expr& obj_a, const Expr& obj_b,
    std::size_t n_points, const FlatOptions& fopt = {},
    const SolverOptions& sopt = {});

std::string pareto_csv(const std::vector<ParetoPoint>& front);

struct ClusterResult {
  std::vector<std::vector<double>> centers;
  std::vector<double> weights;  // fraction of points per cluster, sums to 1
  std::vector<std::size_t> assignment;
  double sse = 0.0;
  std::vector<double> sse_trace;  // per Lloyd iteration, nonincreasing
};

// Lloyd's algorithm with deterministic farthest-point seeding from `seed`.
// With keep_max, the point maximizing feature `max_feature` is pinned as its
// own (fixed) center. BadK when k == 0 or exceeds the distinct points.
ClusterResult kmeans_cluster(const std::vector<std::vector<double>>& points,
                             std::size_t k, std::uint64_t seed = 0,
                             std::size_t max_iter = 100, bool keep_max = false,
                             std::size_t max_feature = 0, bool parallel = true);

std::string cluster_csv(const ClusterResult& r);

// Pins every binary instance of `m` to its solution value (lo = hi) and
// installs all values into `p` as the initial point. The returned model is
// ready for check_feasibility or a continuous re-solve.
// MissingBinaryValue when a binary instance has no value.
FlatModel fix_and_correct(ProblemSpec& p, const FlatModel& m,
                          const Solution& sol);

// Pins one variable; BadParams when it is not binary.
FlatModel pin_binary(FlatModel m, const std::string& name, double value);

}  // namespace enopt
