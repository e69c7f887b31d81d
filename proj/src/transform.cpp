#include "enopt/transform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace enopt {

SymbolRef InstanceTable::get(const SymbolRef& base, const std::string& s,
                             const std::string& t) {
  auto key = std::make_tuple(base->id, s, t);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  SymbolRef inst = make_symbol(instance_name(base, s, t), base->kind,
                               base->domain, base->lo, base->hi, base->init);
  entries_.emplace(key, inst);
  return inst;
}

std::vector<RelationalConstraint> apply_implicit_euler(const ProblemSpec& p,
                                                       InstanceTable& table) {
  std::vector<RelationalConstraint> out;
  for (const auto& sd : p.system().all_states()) {
    for (const auto& [sid, w] : p.scenarios().entries) {
      const auto& pts = p.grid().points(sid);  // MissingStep when absent
      const DataValue* dv = p.find_data(sd.initial->id);
      std::optional<double> y0 = dv ? dv->lookup(sid, pts.empty() ? "" : pts.front().first)
                                    : std::nullopt;
      if (!y0)
        throw MissingInitial("no initial value for state " + sd.state->name +
                             " in scenario " + sid);
      Expr prev(*y0);
      for (const auto& [t, delta] : pts) {
        Expr y(table.get(sd.state, sid, t));
        Expr ydot(table.get(sd.derivative, sid, t));
        Expr rhs = delta == 0.0 ? prev : prev + Expr(delta) * ydot;
        out.push_back({instance_name(sd.state, sid, t) + "#link", y, rhs,
                       Relation::Eq, StageClass::SecondStage,
                       /*auto_generated=*/true});
        prev = y;
      }
    }
  }
  return out;
}

std::size_t PiecewiseGrid::vertex_count() const {
  std::size_t n = 1;
  for (const auto& [sym, bps] : dims) n *= bps.size();
  return n;
}

double PiecewiseGrid::value_at(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims.size(); ++i)
    flat = flat * dims[i].second.size() + idx[i];
  return values.at(flat);
}

void PiecewiseGrid::check() const {
  if (dims.empty()) throw GridMismatch("grid has no dimensions");
  for (const auto& [sym, bps] : dims) {
    if (bps.size() < 2)
      throw GridMismatch(sym->name + ": fewer than 2 breakpoints");
    for (std::size_t i = 1; i < bps.size(); ++i)
      if (!(bps[i] > bps[i - 1]))
        throw GridMismatch(sym->name + ": breakpoints not strictly increasing");
  }
  if (values.size() != vertex_count())
    throw GridMismatch("value table does not cover the vertex lattice");
  for (double v : values)
    if (!std::isfinite(v)) throw GridMismatch("non-finite vertex value");
}

namespace {

// Iterates multi-indices over sizes (row-major, last dim fastest).
bool advance(std::vector<std::size_t>& idx,
             const std::vector<std::size_t>& sizes) {
  for (std::size_t i = idx.size(); i-- > 0;) {
    if (++idx[i] < sizes[i]) return true;
    idx[i] = 0;
  }
  return false;
}

std::size_t flatten_index(const std::vector<std::size_t>& idx,
                          const std::vector<std::size_t>& sizes) {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) flat = flat * sizes[i] + idx[i];
  return flat;
}

std::vector<std::size_t> dim_sizes(const PiecewiseGrid& g) {
  std::vector<std::size_t> sizes;
  for (const auto& [sym, bps] : g.dims) sizes.push_back(bps.size());
  return sizes;
}

// All Kuhn simplices of the lattice: for every cell (lower-corner index) and
// every permutation of the dimensions, the vertex chain corner, corner+e_p0,
// corner+e_p0+e_p1, ... Each simplex is its d+1 vertex multi-indices.
std::vector<std::vector<std::vector<std::size_t>>> kuhn_simplices(
    const PiecewiseGrid& g) {
  std::size_t d = g.dims.size();
  std::vector<std::size_t> cells;
  for (const auto& [sym, bps] : g.dims) cells.push_back(bps.size() - 1);

  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::size_t> cell(d, 0);
  do {
    for (const auto& pi : perms) {
      std::vector<std::vector<std::size_t>> verts;
      std::vector<std::size_t> v = cell;
      verts.push_back(v);
      for (std::size_t k = 0; k < d; ++k) {
        ++v[pi[k]];
        verts.push_back(v);
      }
      out.push_back(std::move(verts));
    }
  } while (advance(cell, cells));
  return out;
}

void check_inputs(const Expr& e, const PiecewiseGrid& grid) {
  grid.check();
  auto used = collect_symbols(e);
  if (used.size() != grid.dims.size())
    throw GridMismatch("expression symbols do not match grid dimensions");
  for (const auto& [sym, bps] : grid.dims) {
    if (!used.count(sym->id))
      throw GridMismatch("grid dimension " + sym->name +
                         " unused by expression");
    if (sym->kind != SymbolKind::Parameter) {
      if (!sym->lo || !sym->hi) throw UnboundedVariable(sym->name);
      if (*sym->lo < bps.front() - 1e-12 || *sym->hi > bps.back() + 1e-12)
        throw GridMismatch(sym->name + ": bounds outside the grid hull");
    }
  }
}

SymbolKind aux_kind(const PiecewiseGrid& grid) {
  for (const auto& [sym, bps] : grid.dims)
    if (sym->kind == SymbolKind::OperationalVariable)
      return SymbolKind::OperationalVariable;
  return SymbolKind::DesignVariable;
}

std::pair<double, double> value_range(const PiecewiseGrid& grid) {
  auto [lo, hi] =
      std::minmax_element(grid.values.begin(), grid.values.end());
  return {*lo, *hi};
}

}  // namespace

PiecewiseGrid sample_grid(
    const Expr& e,
    std::vector<std::pair<SymbolRef, std::vector<double>>> dims) {
  PiecewiseGrid g;
  g.dims = std::move(dims);
  auto sizes = dim_sizes(g);
  g.values.resize(g.vertex_count());
  std::vector<std::size_t> idx(g.dims.size(), 0);
  do {
    Bindings b;
    for (std::size_t i = 0; i < g.dims.size(); ++i)
      b.set(g.dims[i].first, g.dims[i].second[idx[i]]);
    g.values[flatten_index(idx, sizes)] = evaluate(e, b);
  } while (advance(idx, sizes));
  g.check();
  return g;
}

PiecewiseGrid uniform_grid(const Expr& e, const std::vector<SymbolRef>& vars,
                          std::size_t n) {
  std::vector<std::pair<SymbolRef, std::vector<double>>> dims;
  for (const auto& v : vars) {
    if (!v->lo || !v->hi) throw UnboundedVariable(v->name);
    std::vector<double> bps(n);
    for (std::size_t i = 0; i < n; ++i)
      bps[i] = *v->lo + (*v->hi - *v->lo) * static_cast<double>(i) /
                            static_cast<double>(n - 1);
    dims.emplace_back(v, std::move(bps));
  }
  return sample_grid(e, std::move(dims));
}

LinearizationArtifacts linearize_convex_combination(
    const Expr& e, const PiecewiseGrid& grid, const std::string& name_prefix) {
  check_inputs(e, grid);
  LinearizationArtifacts art;
  SymbolKind kind = aux_kind(grid);
  auto [vlo, vhi] = value_range(grid);
  art.surrogate =
      make_symbol(name_prefix + ".y", kind, VarDomain::Real, vlo, vhi);

  auto sizes = dim_sizes(grid);
  std::size_t nv = grid.vertex_count();

  // One lambda weight per lattice vertex.
  std::vector<SymbolRef> lam(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    lam[k] = make_symbol(name_prefix + ".lam" + std::to_string(k), kind,
                         VarDomain::Real, 0.0, 1.0);
    art.aux_continuous.push_back(lam[k]);
  }

  auto simplices = kuhn_simplices(grid);
  std::vector<SymbolRef> sel(simplices.size());
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    sel[s] = make_symbol(name_prefix + ".d" + std::to_string(s), kind,
                         VarDomain::Binary, 0.0, 1.0);
    art.aux_binary.push_back(sel[s]);
  }

  auto add = [&](const std::string& n, Expr lhs, Relation rel, Expr rhs) {
    art.constraints.push_back({name_prefix + "." + n, std::move(lhs),
                               std::move(rhs), rel,
                               kind == SymbolKind::OperationalVariable
                                   ? StageClass::SecondStage
                                   : StageClass::FirstStage,
                               /*auto_generated=*/true});
  };

  // sum(lambda) = 1
  std::vector<Expr> lam_terms(lam.begin(), lam.end());
  add("lam_sum", sum(lam_terms), Relation::Eq, Expr(1.0));

  // Input reconstruction per dimension and surrogate output.
  std::vector<std::size_t> idx(grid.dims.size(), 0);
  std::vector<std::vector<Expr>> input_terms(grid.dims.size());
  std::vector<Expr> out_terms;
  do {
    std::size_t flat = flatten_index(idx, sizes);
    for (std::size_t i = 0; i < grid.dims.size(); ++i)
      input_terms[i].push_back(Expr(grid.dims[i].second[idx[i]]) *
                               Expr(lam[flat]));
    out_terms.push_back(Expr(grid.values[flat]) * Expr(lam[flat]));
  } while (advance(idx, sizes));
  for (std::size_t i = 0; i < grid.dims.size(); ++i)
    add("input" + std::to_string(i), Expr(grid.dims[i].first), Relation::Eq,
        sum(input_terms[i]));
  add("output", Expr(art.surrogate), Relation::Eq, sum(out_terms));

  // Exactly one simplex active; lambda support restricted to its vertices.
  std::vector<Expr> sel_terms(sel.begin(), sel.end());
  add("simplex_sum", sum(sel_terms), Relation::Eq, Expr(1.0));
  for (std::size_t k = 0; k < nv; ++k) {
    std::vector<Expr> cover;
    for (std::size_t s = 0; s < simplices.size(); ++s)
      for (const auto& v : simplices[s])
        if (flatten_index(v, sizes) == k) {
          cover.push_back(Expr(sel[s]));
          break;
        }
    add("support" + std::to_string(k), Expr(lam[k]), Relation::Le, sum(cover));
  }
  return art;
}

LinearizationArtifacts linearize_multiple_choice(const Expr& e,
                                                 const PiecewiseGrid& grid,
                                                 const std::string& name_prefix) {
  check_inputs(e, grid);
  LinearizationArtifacts art;
  SymbolKind kind = aux_kind(grid);
  auto [vlo, vhi] = value_range(grid);
  art.surrogate =
      make_symbol(name_prefix + ".y", kind, VarDomain::Real, vlo, vhi);

  auto sizes = dim_sizes(grid);
  auto simplices = kuhn_simplices(grid);

  auto add = [&](const std::string& n, Expr lhs, Relation rel, Expr rhs) {
    art.constraints.push_back({name_prefix + "." + n, std::move(lhs),
                               std::move(rhs), rel,
                               kind == SymbolKind::OperationalVariable
                                   ? StageClass::SecondStage
                                   : StageClass::FirstStage,
                               /*auto_generated=*/true});
  };

  std::vector<SymbolRef> sel(simplices.size());
  std::vector<std::vector<SymbolRef>> lam(simplices.size());
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    sel[s] = make_symbol(name_prefix + ".d" + std::to_string(s), kind,
                         VarDomain::Binary, 0.0, 1.0);
    art.aux_binary.push_back(sel[s]);
    lam[s].resize(simplices[s].size());
    for (std::size_t j = 0; j < simplices[s].size(); ++j) {
      lam[s][j] = make_symbol(name_prefix + ".lam" + std::to_string(s) + "_" +
                                  std::to_string(j),
                              kind, VarDomain::Real, 0.0, 1.0);
      art.aux_continuous.push_back(lam[s][j]);
    }
  }

  std::vector<Expr> sel_terms(sel.begin(), sel.end());
  add("mc_sel", sum(sel_terms), Relation::Eq, Expr(1.0));

  // Disaggregated weights fill their simplex's selector.
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    std::vector<Expr> terms(lam[s].begin(), lam[s].end());
    add("fill" + std::to_string(s), sum(terms), Relation::Eq, Expr(sel[s]));
  }

  // Inputs and output reconstructed across all copies.
  for (std::size_t i = 0; i < grid.dims.size(); ++i) {
    std::vector<Expr> terms;
    for (std::size_t s = 0; s < simplices.size(); ++s)
      for (std::size_t j = 0; j < simplices[s].size(); ++j)
        terms.push_back(Expr(grid.dims[i].second[simplices[s][j][i]]) *
                        Expr(lam[s][j]));
    add("input" + std::to_string(i), Expr(grid.dims[i].first), Relation::Eq,
        sum(terms));
  }
  std::vector<Expr> out_terms;
  for (std::size_t s = 0; s < simplices.size(); ++s)
    for (std::size_t j = 0; j < simplices[s].size(); ++j)
      out_terms.push_back(
          Expr(grid.values[flatten_index(simplices[s][j], sizes)]) *
          Expr(lam[s][j]));
  add("output", Expr(art.surrogate), Relation::Eq, sum(out_terms));
  return art;
}

Expr smooth_max(const Expr& a, const Expr& b, double eps) {
  if (!(eps > 0.0)) throw NonPositiveEps("eps must be positive");
  Expr diff = a - b + Expr(eps);
  return Expr(0.5) * (a + b + pow(pow(diff, Expr(2.0)), Expr(0.5)));
}

Expr reformulate_tanh(const Expr& e) {
  const Node& n = e.node();
  if (n.children.empty()) return e;
  std::vector<Expr> kids;
  kids.reserve(n.children.size());
  bool changed = false;
  for (const auto& c : n.children) {
    Expr rc = reformulate_tanh(c);
    changed = changed || rc.ptr() != c.ptr();
    kids.push_back(std::move(rc));
  }
  if (n.kind == NodeKind::Func && n.tag == FuncTag::Tanh) {
    Expr x = kids[0];
    return Expr(1.0) -
           Expr(2.0) / (exp(Expr(2.0) * x) + Expr(1.0));
  }
  if (!changed) return e;
  switch (n.kind) {
    case NodeKind::Sum:
      return sum(std::move(kids));
    case NodeKind::Product:
      return product(std::move(kids));
    case NodeKind::Power:
      return pow(kids[0], kids[1]);
    case NodeKind::Func:
      return func(n.tag, std::move(kids));
    default:
      return e;
  }
}

GridSpec parse_grid_spec(std::istream& in) {
  GridSpec spec;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::string, std::vector<double>>>* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;  // blank
    if (word == "#") continue;
    if (word == "grid") {
      std::string target, brace;
      if (!(ls >> target >> brace) || brace != "{")
        throw ParseError("grid spec line " + std::to_string(lineno) +
                         ": expected 'grid <name> {'");
      spec.targets.emplace_back(target,
                                std::vector<std::pair<std::string,
                                                      std::vector<double>>>{});
      current = &spec.targets.back().second;
    } else if (word == "}") {
      current = nullptr;
    } else if (word == "var") {
      if (!current)
        throw ParseError("grid spec line " + std::to_string(lineno) +
                         ": 'var' outside a grid block");
      std::string name;
      if (!(ls >> name))
        throw ParseError("grid spec line " + std::to_string(lineno) +
                         ": missing variable name");
      if (!name.empty() && name.back() == ':') name.pop_back();
      std::vector<double> bps;
      double v;
      while (ls >> v) bps.push_back(v);
      if (bps.size() < 2)
        throw ParseError("grid spec line " + std::to_string(lineno) +
                         ": need at least 2 breakpoints");
      current->emplace_back(name, std::move(bps));
    } else {
      throw ParseError("grid spec line " + std::to_string(lineno) +
                       ": unknown directive '" + word + "'");
    }
  }
  if (current) throw ParseError("grid spec: unterminated block");
  return spec;
}

GridSpec parse_grid_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid spec: " + path);
  return parse_grid_spec(in);
}

}  // namespace enopt
