#include "enopt/solve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <queue>

namespace enopt {

void SolverOptions::check() const {
  if (!(rel_gap > 0.0) || !(abs_gap > 0.0) || !(feas_tol > 0.0))
    throw BadParams("solver tolerances must be positive");
}

namespace {

struct LpData {
  std::size_t n = 0;              // structural variables
  std::vector<double> c;          // objective coefficients
  double c0 = 0.0;                // objective constant
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<Relation> rel;
  std::vector<double> lo, hi;
};

LpData build_lp(const FlatModel& m) {
  LpData lp;
  lp.n = m.variables.size();
  std::map<std::uint64_t, std::size_t> col;
  for (std::size_t j = 0; j < lp.n; ++j) {
    col[m.variables[j].sym->id] = j;
    lp.lo.push_back(m.variables[j].lo);
    lp.hi.push_back(m.variables[j].hi);
  }

  auto row_of = [&](const Expr& e, std::vector<double>& coefs,
                    double& constant) {
    std::map<std::uint64_t, double> cm;
    constant = 0.0;
    if (!affine_decompose(e, cm, constant)) return false;
    coefs.assign(lp.n, 0.0);
    for (const auto& [id, v] : cm) {
      auto it = col.find(id);
      if (it == col.end()) return false;  // foreign symbol
      coefs[it->second] = v;
    }
    return true;
  };

  double constant = 0.0;
  if (!row_of(m.objective, lp.c, constant))
    throw NotLinear("objective is not affine");
  lp.c0 = constant;
  for (const auto& row : m.constraints) {
    std::vector<double> coefs;
    if (!row_of(row.lhs - row.rhs, coefs, constant))
      throw NotLinear("constraint " + row.name + " is not affine");
    lp.A.push_back(std::move(coefs));
    lp.b.push_back(-constant);
    lp.rel.push_back(row.rel);
  }
  return lp;
}

struct SimplexResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x;  // structural values (original space)
  double objective = 0.0;
};

// Dense two-phase primal simplex on the standard form obtained by shifting
// each variable to [0, hi-lo] and adding an upper-bound row per variable.
SimplexResult simplex(const LpData& lp, const SolverOptions& opt) {
  const double tol = 1e-9;
  std::size_t n = lp.n;
  std::size_t m_rows = lp.A.size() + n;  // constraint rows + upper bounds

  // Columns: n structural, then one slack/surplus per row, then artificials.
  struct Row {
    std::vector<double> a;
    double b = 0.0;
  };
  std::vector<Row> rows(m_rows);
  std::vector<int> slack_col(m_rows, -1), art_col(m_rows, -1);
  std::size_t ncols = n;

  for (std::size_t i = 0; i < lp.A.size(); ++i) {
    rows[i].a = lp.A[i];
    double shift = 0.0;
    for (std::size_t j = 0; j < n; ++j) shift += lp.A[i][j] * lp.lo[j];
    rows[i].b = lp.b[i] - shift;
  }
  for (std::size_t j = 0; j < n; ++j) {
    Row& r = rows[lp.A.size() + j];
    r.a.assign(n, 0.0);
    r.a[j] = 1.0;
    r.b = lp.hi[j] - lp.lo[j];
    if (r.b < 0.0) return {SolveStatus::Infeasible, {}, 0.0};
  }

  std::vector<Relation> rel(lp.rel);
  rel.resize(m_rows, Relation::Le);  // upper-bound rows

  // Normalize b >= 0.
  for (std::size_t i = 0; i < m_rows; ++i) {
    if (rows[i].b < 0.0) {
      for (double& v : rows[i].a) v = -v;
      rows[i].b = -rows[i].b;
      if (rel[i] == Relation::Le)
        rel[i] = Relation::Ge;
      else if (rel[i] == Relation::Ge)
        rel[i] = Relation::Le;
    }
  }

  // Slack / surplus columns.
  for (std::size_t i = 0; i < m_rows; ++i) {
    if (rel[i] == Relation::Le) {
      slack_col[i] = static_cast<int>(ncols++);
    } else if (rel[i] == Relation::Ge) {
      slack_col[i] = static_cast<int>(ncols++);  // surplus, coefficient -1
    }
  }
  // Artificials: Eq rows and Ge rows need one.
  for (std::size_t i = 0; i < m_rows; ++i)
    if (rel[i] != Relation::Le) art_col[i] = static_cast<int>(ncols++);

  std::size_t first_art = ncols;
  for (std::size_t i = 0; i < m_rows; ++i)
    if (art_col[i] >= 0) first_art = std::min(first_art, (std::size_t)art_col[i]);

  // Tableau: m_rows x (ncols + 1).
  std::vector<std::vector<double>> T(m_rows,
                                     std::vector<double>(ncols + 1, 0.0));
  std::vector<std::size_t> basis(m_rows);
  for (std::size_t i = 0; i < m_rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = rows[i].a[j];
    if (slack_col[i] >= 0)
      T[i][slack_col[i]] = rel[i] == Relation::Ge ? -1.0 : 1.0;
    if (art_col[i] >= 0) T[i][art_col[i]] = 1.0;
    T[i][ncols] = rows[i].b;
    basis[i] = art_col[i] >= 0 ? (std::size_t)art_col[i]
                               : (std::size_t)slack_col[i];
  }

  std::vector<double> cost(ncols, 0.0);

  auto run_phase = [&](bool phase1) -> SolveStatus {
    // reduced cost row: z_j = cost_j - sum_i cost[basis_i] * T[i][j]
    std::vector<double> z(ncols + 1, 0.0);
    auto recompute = [&]() {
      for (std::size_t j = 0; j <= ncols; ++j) {
        double v = j < ncols ? cost[j] : 0.0;
        for (std::size_t i = 0; i < m_rows; ++i)
          v -= cost[basis[i]] * T[i][j];
        z[j] = v;
      }
    };
    recompute();

    std::size_t degenerate = 0;
    bool bland = false;
    for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
      // entering column
      std::size_t enter = ncols;
      if (bland) {
        for (std::size_t j = 0; j < ncols; ++j)
          if (z[j] < -tol) {
            enter = j;
            break;
          }
      } else {
        double best = -tol;
        for (std::size_t j = 0; j < ncols; ++j)
          if (z[j] < best) {
            best = z[j];
            enter = j;
          }
      }
      if (enter == ncols) return SolveStatus::Optimal;
      if (!phase1 && enter >= first_art) {
        z[enter] = 0.0;  // never re-enter an artificial in phase 2
        continue;
      }

      // ratio test
      std::size_t leave = m_rows;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_rows; ++i) {
        if (T[i][enter] > tol) {
          double ratio = T[i][ncols] / T[i][enter];
          if (ratio < best_ratio - tol ||
              (ratio < best_ratio + tol && leave < m_rows &&
               basis[i] < basis[leave])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m_rows) return SolveStatus::Unbounded;
      if (best_ratio < tol) {
        if (++degenerate > 100) bland = true;
      } else {
        degenerate = 0;
      }

      // pivot
      double piv = T[leave][enter];
      for (double& v : T[leave]) v /= piv;
      for (std::size_t i = 0; i < m_rows; ++i) {
        if (i == leave) continue;
        double f = T[i][enter];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j <= ncols; ++j) T[i][j] -= f * T[leave][j];
      }
      double zf = z[enter];
      for (std::size_t j = 0; j <= ncols; ++j) z[j] -= zf * T[leave][j];
      basis[leave] = enter;
    }
    return SolveStatus::IterLimit;
  };

  // Phase 1.
  bool need_phase1 = false;
  for (std::size_t i = 0; i < m_rows; ++i)
    if (art_col[i] >= 0) need_phase1 = true;
  if (need_phase1) {
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t i = 0; i < m_rows; ++i)
      if (art_col[i] >= 0) cost[art_col[i]] = 1.0;
    SolveStatus s = run_phase(true);
    if (s == SolveStatus::IterLimit) return {s, {}, 0.0};
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_rows; ++i)
      if (basis[i] >= first_art) infeas += T[i][ncols];
    if (infeas > opt.feas_tol) return {SolveStatus::Infeasible, {}, 0.0};
    // drive basic artificials (at zero) out of the basis
    for (std::size_t i = 0; i < m_rows; ++i) {
      if (basis[i] < first_art) continue;
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < first_art; ++j)
        if (std::abs(T[i][j]) > tol) {
          enter = j;
          break;
        }
      if (enter == ncols) continue;  // redundant row
      double piv = T[i][enter];
      for (double& v : T[i]) v /= piv;
      for (std::size_t k = 0; k < m_rows; ++k) {
        if (k == i) continue;
        double f = T[k][enter];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j <= ncols; ++j) T[k][j] -= f * T[i][j];
      }
      basis[i] = enter;
    }
  }

  // Phase 2.
  std::fill(cost.begin(), cost.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.c[j];
  SolveStatus s = run_phase(false);
  if (s != SolveStatus::Optimal) return {s, {}, 0.0};

  std::vector<double> y(ncols, 0.0);
  for (std::size_t i = 0; i < m_rows; ++i) y[basis[i]] = T[i][ncols];
  SimplexResult out;
  out.status = SolveStatus::Optimal;
  out.x.resize(n);
  out.objective = lp.c0;
  for (std::size_t j = 0; j < n; ++j) {
    out.x[j] = lp.lo[j] + y[j];
    out.objective += lp.c[j] * out.x[j];
  }
  return out;
}

Solution pack_solution(const FlatModel& m, const SimplexResult& r) {
  Solution sol;
  sol.status = r.status;
  sol.objective = r.objective;
  if (r.status == SolveStatus::Optimal || r.status == SolveStatus::Feasible)
    for (std::size_t j = 0; j < m.variables.size(); ++j)
      sol.values[m.variables[j].name] = r.x[j];
  return sol;
}

}  // namespace

Solution solve_lp(const FlatModel& m, const SolverOptions& opt) {
  opt.check();
  LpData lp = build_lp(m);
  return pack_solution(m, simplex(lp, opt));
}

Solution solve_milp(const FlatModel& m, const SolverOptions& opt) {
  opt.check();
  LpData root = build_lp(m);

  std::vector<std::size_t> int_vars;
  for (std::size_t j = 0; j < m.variables.size(); ++j)
    if (m.variables[j].domain != VarDomain::Real) int_vars.push_back(j);

  struct BbNode {
    double bound;
    std::uint64_t id;  // insertion order: deterministic tie-break
    std::vector<double> lo, hi;
    bool operator<(const BbNode& o) const {
      if (bound != o.bound) return bound > o.bound;  // min-heap on bound
      return id > o.id;
    }
  };

  std::priority_queue<BbNode> open;
  std::uint64_t next_id = 0;
  open.push({-std::numeric_limits<double>::infinity(), next_id++, root.lo,
             root.hi});

  bool has_incumbent = false;
  Solution best;
  best.status = SolveStatus::Infeasible;
  double incumbent = std::numeric_limits<double>::infinity();
  const double int_tol = 1e-6;
  std::size_t nodes = 0;
  bool exhausted = true;

  while (!open.empty()) {
    if (++nodes > opt.max_nodes) {
      exhausted = false;
      break;
    }
    BbNode node = open.top();
    open.pop();
    if (has_incumbent &&
        node.bound >= incumbent - std::max(opt.rel_gap * std::abs(incumbent),
                                           opt.abs_gap))
      continue;  // pruned by bound

    LpData lp = root;
    lp.lo = node.lo;
    lp.hi = node.hi;
    SimplexResult r = simplex(lp, opt);
    if (opt.log)
      std::cerr << "node " << nodes << " status "
                << status_text(r.status) << " obj " << r.objective << "\n";
    if (r.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      return best;
    }
    if (r.status != SolveStatus::Optimal) continue;
    if (has_incumbent &&
        r.objective >= incumbent - std::max(opt.rel_gap * std::abs(incumbent),
                                            opt.abs_gap))
      continue;

    // most fractional integer variable, ties by lowest index
    std::size_t branch = int_vars.size();
    double best_frac = int_tol;
    for (std::size_t k = 0; k < int_vars.size(); ++k) {
      std::size_t j = int_vars[k];
      double f = r.x[j] - std::floor(r.x[j]);
      double dist = std::min(f, 1.0 - f);
      if (dist > best_frac + 1e-12) {
        best_frac = dist;
        branch = k;
      }
    }
    if (branch == int_vars.size()) {
      // integral: new incumbent
      std::vector<double> x = r.x;
      for (std::size_t j : int_vars) x[j] = std::round(x[j]);
      incumbent = r.objective;
      best = pack_solution(m, {SolveStatus::Optimal, x, r.objective});
      has_incumbent = true;
      continue;
    }

    std::size_t j = int_vars[branch];
    double v = r.x[j];
    // branch down first (lower id -> preferred on equal bounds)
    BbNode down{r.objective, next_id++, node.lo, node.hi};
    down.hi[j] = std::floor(v);
    BbNode up{r.objective, next_id++, node.lo, node.hi};
    up.lo[j] = std::ceil(v);
    if (down.hi[j] >= down.lo[j] - 1e-12) open.push(down);
    if (up.lo[j] <= up.hi[j] + 1e-12) open.push(up);
  }

  if (has_incumbent) {
    best.status = exhausted ? SolveStatus::Optimal : SolveStatus::NodeLimit;
    if (!exhausted && !open.empty())
      best.bound_gap = incumbent - open.top().bound;
  } else if (!exhausted) {
    best.status = SolveStatus::NodeLimit;
  }
  return best;
}

FeasibilityReport check_feasibility(const FlatModel& m,
                                    const std::map<std::string, double>& point,
                                    double feas_tol) {
  (void)feas_tol;
  Bindings b;
  for (const auto& v : m.variables) {
    auto it = point.find(v.name);
    if (it == point.end()) throw MissingValue("no value for " + v.name);
    b.set(v.sym, it->second);
  }

  FeasibilityReport rep;
  for (const auto& row : m.constraints) {
    double r = evaluate(row.lhs, b) - evaluate(row.rhs, b);
    double v = 0.0;
    switch (row.rel) {
      case Relation::Eq: v = std::abs(r); break;
      case Relation::Le: v = std::max(r, 0.0); break;
      case Relation::Ge: v = std::max(-r, 0.0); break;
    }
    rep.entries.push_back({row.name, v});
    rep.max_violation = std::max(rep.max_violation, v);
  }
  for (const auto& v : m.variables) {
    double x = point.at(v.name);
    double viol = std::max(v.lo - x, x - v.hi);
    if (viol > 0.0) {
      rep.entries.push_back({v.name + " bounds", viol});
      rep.max_violation = std::max(rep.max_violation, viol);
    }
  }
  rep.objective = evaluate(m.objective, b);
  return rep;
}

}  // namespace enopt
