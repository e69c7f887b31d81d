#include "enopt/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace enopt {

namespace {

bool has_discrete(const FlatModel& m) {
  for (const auto& v : m.variables)
    if (v.domain != VarDomain::Real) return true;
  return false;
}

Solution solve_auto(const FlatModel& m, const SolverOptions& opt) {
  return has_discrete(m) ? solve_milp(m, opt) : solve_lp(m, opt);
}

std::map<std::string, double> design_snapshot(const FlatModel& m,
                                              const Solution& sol) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < m.instances.size(); ++i)
    if (m.instances[i].base->kind == SymbolKind::DesignVariable)
      out[m.instances[i].name] = sol.values.at(m.instances[i].name);
  return out;
}

double eval_at(const FlatModel& m, const Expr& e, const Solution& sol) {
  Bindings b;
  for (const auto& v : m.variables) b.set(v.sym, sol.values.at(v.name));
  return evaluate(e, b);
}

}  // namespace

std::vector<ParetoPoint> epsilon_constraint_pareto(
    const ProblemSpec& p, const Expr& obj_a, const Expr& obj_b,
    std::size_t n_points, const FlatOptions& fopt, const SolverOptions& sopt) {
  if (n_points < 2) throw BadParams("n_points must be >= 2");
  auto [a_design, a_operation] = split_objective(obj_a);
  auto [b_design, b_operation] = split_objective(obj_b);

  FlatModel base = flatten(p.with_objectives(a_design, a_operation), fopt);
  Expr a_flat = base.objective;
  Expr b_flat = flatten_objective(p, base, b_design, b_operation);

  // Lexicographic-ish anchors for the ranges.
  Solution min_a = solve_auto(base, sopt);
  if (min_a.status != SolveStatus::Optimal)
    throw SolverFailure("min obj_a anchor did not solve");
  FlatModel base_b = base;
  base_b.objective = b_flat;
  Solution min_b = solve_auto(base_b, sopt);
  if (min_b.status != SolveStatus::Optimal)
    throw SolverFailure("min obj_b anchor did not solve");

  double b_lo = eval_at(base, b_flat, min_b);
  double b_hi = eval_at(base, b_flat, min_a);
  double a_lo = min_a.objective;
  double a_hi = eval_at(base, a_flat, min_b);
  double rho = 1e-3 * std::max(std::abs(a_hi - a_lo), 1e-12);

  // One subproblem per epsilon; independent, solved in order.
  std::vector<ParetoPoint> raw(n_points);
  std::vector<bool> ok(n_points, false);
  SymbolRef slack = make_symbol("eps.slack", SymbolKind::DesignVariable,
                                VarDomain::Real, 0.0,
                                std::max(b_hi - b_lo, 1.0) * 2.0 + 1.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    double eps = n_points == 1
                     ? b_hi
                     : b_lo + (b_hi - b_lo) * static_cast<double>(i) /
                                  static_cast<double>(n_points - 1);
    FlatModel sub = base;
    sub.variables.push_back({slack->name, slack, VarDomain::Real, *slack->lo,
                             *slack->hi});
    sub.instances.push_back({slack, "", "", slack->name});
    sub.constraints.push_back({"eps.bound", b_flat + Expr(slack), Expr(eps),
                               Relation::Eq, "", true});
    sub.objective = a_flat + Expr(rho) * Expr(slack);
    Solution sol = solve_auto(sub, sopt);
    if (sol.status != SolveStatus::Optimal) continue;  // skipped with note
    ParetoPoint pt;
    pt.objective_a = eval_at(base, a_flat, sol);
    pt.objective_b = eval_at(base, b_flat, sol);
    pt.design = design_snapshot(base, sol);
    pt.status = sol.status;
    raw[i] = std::move(pt);
    ok[i] = true;
  }

  // Non-dominated filter (1e-9 tolerance), keeping the first of duplicates.
  std::vector<ParetoPoint> front;
  const double tol = 1e-9;
  for (std::size_t i = 0; i < n_points; ++i) {
    if (!ok[i]) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < n_points && !dominated; ++j) {
      if (j == i || !ok[j]) continue;
      bool le_a = raw[j].objective_a <= raw[i].objective_a + tol;
      bool le_b = raw[j].objective_b <= raw[i].objective_b + tol;
      bool lt = raw[j].objective_a < raw[i].objective_a - tol ||
                raw[j].objective_b < raw[i].objective_b - tol;
      if (le_a && le_b && lt) dominated = true;
      // exact duplicate: keep the lower index
      if (j < i && std::abs(raw[j].objective_a - raw[i].objective_a) <= tol &&
          std::abs(raw[j].objective_b - raw[i].objective_b) <= tol)
        dominated = true;
    }
    if (!dominated) front.push_back(raw[i]);
  }
  return front;
}

std::string pareto_csv(const std::vector<ParetoPoint>& front) {
  std::ostringstream os;
  os << "objective_a,objective_b";
  if (!front.empty())
    for (const auto& [name, v] : front.front().design) os << "," << name;
  os << "\n";
  for (const auto& pt : front) {
    os << format_shortest(pt.objective_a) << ","
       << format_shortest(pt.objective_b);
    for (const auto& [name, v] : pt.design) os << "," << format_shortest(v);
    os << "\n";
  }
  return os.str();
}

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

ClusterResult kmeans_cluster(const std::vector<std::vector<double>>& points,
                             std::size_t k, std::uint64_t seed,
                             std::size_t max_iter, bool keep_max,
                             std::size_t max_feature, bool parallel) {
  std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (k == 0 || k > distinct.size())
    throw BadK("k must be in [1, number of distinct points]");
  std::size_t n = points.size(), d = points.front().size();

  ClusterResult r;
  r.centers.reserve(k);

  std::size_t fixed = 0;
  if (keep_max) {
    // the maximum-demand point becomes its own pinned center
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (points[i][max_feature] > points[best][max_feature]) best = i;
    r.centers.push_back(points[best]);
    fixed = 1;
  }

  // farthest-point seeding
  std::mt19937_64 rng(seed);
  if (r.centers.empty())
    r.centers.push_back(points[rng() % n]);
  while (r.centers.size() < k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double near = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centers) near = std::min(near, sqdist(points[i], c));
      if (near > far_d + 1e-15) {
        far_d = near;
        far = i;
      }
    }
    r.centers.push_back(points[far]);
  }

  r.assignment.assign(n, 0);
  auto assign = [&]() {
    double sse = 0.0;
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : sse)
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double bd = sqdist(points[i], r.centers[0]);
        for (std::size_t c = 1; c < k; ++c) {
          double dd = sqdist(points[i], r.centers[c]);
          if (dd < bd - 1e-15) {
            bd = dd;
            best = c;
          }
        }
        r.assignment[i] = best;
        sse += bd;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double bd = sqdist(points[i], r.centers[0]);
        for (std::size_t c = 1; c < k; ++c) {
          double dd = sqdist(points[i], r.centers[c]);
          if (dd < bd - 1e-15) {
            bd = dd;
            best = c;
          }
        }
        r.assignment[i] = best;
        sse += bd;
      }
    }
    return sse;
  };

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double sse = assign();
    r.sse_trace.push_back(sse);
    if (sse >= prev - 1e-12) break;
    prev = sse;
    // centroid update (pinned centers stay)
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[r.assignment[i]];
      for (std::size_t j = 0; j < d; ++j)
        sums[r.assignment[i]][j] += points[i][j];
    }
    for (std::size_t c = fixed; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < d; ++j)
        r.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  r.sse = assign();
  r.weights.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) r.weights[r.assignment[i]] += 1.0;
  for (double& w : r.weights) w /= static_cast<double>(n);
  return r;
}

std::string cluster_csv(const ClusterResult& r) {
  std::ostringstream os;
  std::size_t d = r.centers.empty() ? 0 : r.centers.front().size();
  for (std::size_t j = 0; j < d; ++j) os << "feature" << j << ",";
  os << "weight\n";
  for (std::size_t c = 0; c < r.centers.size(); ++c) {
    for (double v : r.centers[c]) os << format_shortest(v) << ",";
    os << format_shortest(r.weights[c]) << "\n";
  }
  return os.str();
}

FlatModel fix_and_correct(ProblemSpec& p, const FlatModel& m,
                          const Solution& sol) {
  FlatModel fixed = m;
  for (auto& v : fixed.variables) {
    if (v.domain != VarDomain::Binary) continue;
    auto it = sol.values.find(v.name);
    if (it == sol.values.end())
      throw MissingBinaryValue("no value for binary " + v.name);
    double val = std::round(it->second);
    v.lo = val;
    v.hi = val;
  }
  write_back(p, m, sol);  // remaining values become the initial point
  return fixed;
}

FlatModel pin_binary(FlatModel m, const std::string& name, double value) {
  for (auto& v : m.variables) {
    if (v.name != name) continue;
    if (v.domain != VarDomain::Binary)
      throw BadParams(name + " is not a binary variable");
    v.lo = v.hi = std::round(value);
    return m;
  }
  throw UnknownVariable(name);
}

}  // namespace enopt
