#include "enopt/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace enopt {

bool FlatModel::linear() const {
  std::map<std::uint64_t, double> coefs;
  double c = 0.0;
  if (!affine_decompose(objective, coefs, c)) return false;
  for (const auto& row : constraints)
    if (!row.linear) return false;
  return true;
}

const FlatVariable* FlatModel::find_variable(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

bool affine_decompose(const Expr& e, std::map<std::uint64_t, double>& coefs,
                      double& constant) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant:
      constant += n.value;
      return true;
    case NodeKind::Symbol:
      coefs[n.sym->id] += 1.0;
      return true;
    case NodeKind::Sum:
      for (const auto& c : n.children)
        if (!affine_decompose(c, coefs, constant)) return false;
      return true;
    case NodeKind::Product: {
      double scale = 1.0;
      const Expr* dependent = nullptr;
      for (const auto& c : n.children) {
        if (c.is_constant()) {
          scale *= c.constant_value();
        } else if (dependent) {
          return false;  // product of two non-constant factors
        } else {
          dependent = &c;
        }
      }
      if (!dependent) {
        constant += scale;
        return true;
      }
      std::map<std::uint64_t, double> inner;
      double ic = 0.0;
      if (!affine_decompose(*dependent, inner, ic)) return false;
      for (const auto& [id, v] : inner) coefs[id] += scale * v;
      constant += scale * ic;
      return true;
    }
    case NodeKind::Power:
    case NodeKind::Func:
      return false;
  }
  return false;
}

namespace {

bool is_affine(const Expr& e) {
  std::map<std::uint64_t, double> coefs;
  double c = 0.0;
  return affine_decompose(e, coefs, c);
}

std::string index_suffix(const std::string& s, const std::string& t) {
  return "[" + escape_index_label(s) + "," + escape_index_label(t) + "]";
}

constexpr double kDefaultBound = 1e9;

struct FlattenContext {
  const ProblemSpec& p;
  const FlatOptions& opt;
  FlatModel& m;
  InstanceTable table;
  SubstMap first_map;  // scalar parameter values
  std::set<std::string> targets;

  SubstMap point_map(const std::string& s, const std::string& t) {
    SubstMap map;
    for (const auto& param : p.parameters()) {
      const DataValue* dv = p.find_data(param->id);
      if (!dv) continue;
      if (auto v = dv->lookup(s, t)) map.emplace(param->id, Expr(*v));
    }
    for (const auto& v : p.operational_vars())
      map.emplace(v->id, Expr(table.get(v, s, t)));
    return map;
  }
};

void add_variable(FlatModel& m, const SymbolRef& sym, Instance inst) {
  m.variables.push_back({inst.name, sym, sym->domain,
                         sym->lo.value_or(-kDefaultBound),
                         sym->hi.value_or(kDefaultBound)});
  m.instances.push_back(std::move(inst));
}

// Checks no parameter symbol survived substitution.
void require_no_parameters(const Expr& e, const std::string& where) {
  for (const auto& [id, sym] : collect_symbols(e))
    if (sym->kind == SymbolKind::Parameter)
      throw MissingData("no value for parameter " + sym->name + " in " + where);
}

void push_row(std::vector<FlatConstraint>& rows, std::string name, Expr lhs,
              Expr rhs, Relation rel, std::string scenario) {
  bool lin = is_affine(lhs) && is_affine(rhs);
  rows.push_back({std::move(name), std::move(lhs), std::move(rhs), rel,
                  std::move(scenario), lin});
}

// Targeted linearization of one already-substituted row expression
// e = lhs - rhs REL 0: the nonaffine terms are replaced by a piecewise
// surrogate over the supplied grid, the affine remainder stays.
void linearize_row(FlattenContext& ctx, std::vector<FlatConstraint>& rows,
                   const std::string& name, const Expr& e, Relation rel,
                   const std::string& scenario,
                   const std::vector<std::pair<SymbolRef, std::vector<double>>>&
                       dims,
                   const std::string& prefix) {
  std::vector<Expr> affine_terms, nonaffine_terms;
  const Node& n = e.node();
  if (n.kind == NodeKind::Sum) {
    for (const auto& c : n.children)
      (is_affine(c) ? affine_terms : nonaffine_terms).push_back(c);
  } else {
    (is_affine(e) ? affine_terms : nonaffine_terms).push_back(e);
  }
  if (nonaffine_terms.empty())
    throw NonlinearAfterLinearize(name + ": target is already linear");
  Expr g = sum(nonaffine_terms);

  // The grid must cover exactly the variables of the nonaffine part.
  auto used = collect_symbols(g);
  if (used.size() != dims.size())
    throw NonlinearAfterLinearize(name +
                                  ": grid does not match the nonlinear part");
  for (const auto& [sym, bps] : dims)
    if (!used.count(sym->id))
      throw NonlinearAfterLinearize(name + ": grid dimension " + sym->name +
                                    " unused by the nonlinear part");

  PiecewiseGrid grid = sample_grid(g, dims);
  LinearizationArtifacts art =
      ctx.opt.method == LinearizeMethod::ConvexCombination
          ? linearize_convex_combination(g, grid, prefix)
          : linearize_multiple_choice(g, grid, prefix);

  auto add_aux = [&](const SymbolRef& s) {
    add_variable(ctx.m, s, {s, scenario, "", s->name});
  };
  add_aux(art.surrogate);
  for (const auto& s : art.aux_continuous) add_aux(s);
  for (const auto& s : art.aux_binary) add_aux(s);
  for (const auto& c : art.constraints)
    push_row(rows, c.name, c.lhs, c.rhs, c.rel, scenario);

  affine_terms.push_back(Expr(art.surrogate));
  push_row(rows, name, sum(affine_terms), Expr(0.0), rel, scenario);
}

}  // namespace

FlatModel flatten(const ProblemSpec& p, const FlatOptions& opt) {
  ValidationReport report = p.validate();
  if (!report.ok()) {
    std::string msg = "flatten refused:";
    for (const auto& e : report.errors) msg += "\n  " + e;
    throw ValidationFailed(msg);
  }

  FlatModel m;
  FlattenContext ctx{p, opt, m};
  for (const auto& [name, dims] : opt.linearize.targets)
    ctx.targets.insert(name);

  // Variable universe: design variables keep their base symbols; operational
  // variables get one instance per (scenario, timepoint).
  for (const auto& d : p.design_vars())
    add_variable(m, d, {d, "", "", d->name});
  for (const auto& v : p.operational_vars())
    for (const auto& [sid, w] : p.scenarios().entries)
      for (const auto& [t, delta] : p.grid().points(sid)) {
        SymbolRef inst = ctx.table.get(v, sid, t);
        add_variable(m, inst, {v, sid, t, inst->name});
      }

  for (const auto& param : p.parameters()) {
    const DataValue* dv = p.find_data(param->id);
    if (dv && dv->scalar) ctx.first_map.emplace(param->id, Expr(*dv->scalar));
  }

  const auto all = p.system().all_constraints();

  // First-stage rows, once.
  for (const auto& c : all) {
    if (c.stage != StageClass::FirstStage) continue;
    if (ctx.targets.count(c.name)) continue;
    Expr lhs = substitute(c.lhs, ctx.first_map);
    Expr rhs = substitute(c.rhs, ctx.first_map);
    require_no_parameters(lhs, c.name);
    require_no_parameters(rhs, c.name);
    push_row(m.constraints, c.name, lhs, rhs, c.rel, "");
  }

  // Second-stage rows, replicated per (scenario, timepoint). Scenarios are
  // independent; the parallel path fills per-scenario buckets that merge in
  // scenario order, the serial path is the reference.
  const auto& scen = p.scenarios().entries;
  // Instance symbols are created up front (point_map only reads the table
  // inside the loop).
  std::vector<SubstMap> maps;
  std::vector<std::pair<std::size_t, std::string>> points;  // (scenario idx, t)
  for (std::size_t si = 0; si < scen.size(); ++si)
    for (const auto& [t, delta] : p.grid().points(scen[si].first)) {
      maps.push_back(ctx.point_map(scen[si].first, t));
      points.emplace_back(si, t);
    }

  std::vector<std::vector<FlatConstraint>> buckets(points.size());
  auto replicate_point = [&](std::size_t k) {
    const auto& [si, t] = points[k];
    const std::string& sid = scen[si].first;
    for (const auto& c : all) {
      if (c.stage != StageClass::SecondStage) continue;
      if (ctx.targets.count(c.name)) continue;
      Expr lhs = substitute(c.lhs, maps[k]);
      Expr rhs = substitute(c.rhs, maps[k]);
      require_no_parameters(lhs, c.name);
      require_no_parameters(rhs, c.name);
      push_row(buckets[k], c.name + index_suffix(sid, t), lhs, rhs, c.rel,
               sid);
    }
  };
  if (opt.parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < points.size(); ++k) replicate_point(k);
  } else {
    for (std::size_t k = 0; k < points.size(); ++k) replicate_point(k);
  }
  for (auto& bucket : buckets)
    for (auto& row : bucket) m.constraints.push_back(std::move(row));

  // State links.
  if (opt.discretize) {
    auto links = apply_implicit_euler(p, ctx.table);
    // apply_implicit_euler iterates states x scenarios x points in order;
    // recover each link's scenario for the separability tag.
    std::size_t k = 0;
    for (const auto& sd : p.system().all_states()) {
      (void)sd;
      for (const auto& [sid, w] : scen)
        for (const auto& pt : p.grid().points(sid)) {
          (void)pt;
          FlatConstraint row{links[k].name, links[k].lhs, links[k].rhs,
                             links[k].rel, sid, true};
          m.constraints.push_back(std::move(row));
          ++k;
        }
    }
  }

  // Targeted linearization.
  for (const auto& [tname, spec_dims] : opt.linearize.targets) {
    const RelationalConstraint* target = nullptr;
    for (const auto& c : all)
      if (c.name == tname) target = &c;
    if (!target) throw UnknownId("linearization target " + tname);
    Expr e = target->lhs - target->rhs;
    if (target->stage == StageClass::FirstStage) {
      std::vector<std::pair<SymbolRef, std::vector<double>>> dims;
      for (const auto& [sname, bps] : spec_dims) {
        SymbolRef s = p.find_symbol(sname);
        if (!s) throw UnknownSymbol(sname);
        dims.emplace_back(s, bps);
      }
      linearize_row(ctx, m.constraints, tname, substitute(e, ctx.first_map),
                    target->rel, "", dims, "lin." + tname);
    } else {
      std::size_t k = 0;
      for (std::size_t si = 0; si < scen.size(); ++si)
        for (const auto& [t, delta] : p.grid().points(scen[si].first)) {
          while (points[k].first != si || points[k].second != t) ++k;
          std::vector<std::pair<SymbolRef, std::vector<double>>> dims;
          for (const auto& [sname, bps] : spec_dims) {
            SymbolRef base = p.find_symbol(sname);
            if (!base) throw UnknownSymbol(sname);
            SymbolRef s = base->kind == SymbolKind::OperationalVariable
                              ? ctx.table.get(base, scen[si].first, t)
                              : base;
            dims.emplace_back(s, bps);
          }
          std::string suffix = index_suffix(scen[si].first, t);
          linearize_row(ctx, m.constraints, tname + suffix,
                        substitute(e, maps[k]), target->rel, scen[si].first,
                        dims, "lin." + tname + suffix);
        }
    }
  }

  // Objective: F_I + sum_s w_s sum_t delta * F_II(s, t). Zero coefficients
  // drop structurally, so zero-weight scenarios never reach the objective.
  std::vector<Expr> terms;
  Expr fi = substitute(p.design_objective(), ctx.first_map);
  require_no_parameters(fi, "design objective");
  terms.push_back(fi);
  std::size_t k = 0;
  for (std::size_t si = 0; si < scen.size(); ++si)
    for (const auto& [t, delta] : p.grid().points(scen[si].first)) {
      Expr fii = substitute(p.operation_objective(), maps[k]);
      require_no_parameters(fii, "operation objective");
      terms.push_back(Expr(scen[si].second * delta) * fii);
      ++k;
    }
  m.objective = sum(terms);
  return m;
}

namespace {

// Emits one affine row body as "+ c name - c name ...", terms in model
// variable order, then "REL rhs". Throws NonlinearModel on nonaffine input.
void emit_terms(std::ostringstream& os, const FlatModel& m,
                const std::map<std::uint64_t, double>& coefs, double constant,
                bool with_constant) {
  bool any = false;
  for (const auto& v : m.variables) {
    auto it = coefs.find(v.sym->id);
    if (it == coefs.end() || it->second == 0.0) continue;
    double c = it->second;
    os << (c < 0 ? " - " : " + ") << format_shortest(std::abs(c)) << " "
       << v.name;
    any = true;
  }
  if (with_constant && constant != 0.0) {
    os << (constant < 0 ? " - " : " + ")
       << format_shortest(std::abs(constant));
    any = true;
  }
  if (!any) os << " + 0";
}

}  // namespace

std::string emit_canonical_lp(const FlatModel& m) {
  std::ostringstream os;
  os << "minimize\n obj:";
  std::map<std::uint64_t, double> coefs;
  double constant = 0.0;
  if (!affine_decompose(m.objective, coefs, constant))
    throw NonlinearModel("objective is not affine");
  emit_terms(os, m, coefs, constant, /*with_constant=*/true);
  os << "\nsubject to\n";
  for (const auto& row : m.constraints) {
    coefs.clear();
    constant = 0.0;
    if (!affine_decompose(row.lhs - row.rhs, coefs, constant))
      throw NonlinearModel("constraint " + row.name + " is not affine");
    os << " " << row.name << ":";
    emit_terms(os, m, coefs, 0.0, /*with_constant=*/false);
    os << " " << relation_text(row.rel) << " " << format_shortest(-constant)
       << "\n";
  }
  os << "bounds\n";
  for (const auto& v : m.variables)
    os << " " << format_shortest(v.lo) << " <= " << v.name
       << " <= " << format_shortest(v.hi) << "\n";
  bool any_bin = false, any_int = false;
  for (const auto& v : m.variables) {
    any_bin = any_bin || v.domain == VarDomain::Binary;
    any_int = any_int || v.domain == VarDomain::Integer;
  }
  if (any_bin) {
    os << "binaries\n";
    for (const auto& v : m.variables)
      if (v.domain == VarDomain::Binary) os << " " << v.name << "\n";
  }
  if (any_int) {
    os << "generals\n";
    for (const auto& v : m.variables)
      if (v.domain == VarDomain::Integer) os << " " << v.name << "\n";
  }
  os << "end\n";
  return os.str();
}

namespace {

struct LpLines {
  std::vector<std::string> objective, rows, bounds, binaries, generals;
};

double parse_number(const std::string& tok, std::size_t lineno) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MalformedLine("line " + std::to_string(lineno) + ": bad number '" +
                        tok + "'");
  }
}

}  // namespace

FlatModel parse_canonical_lp(std::string_view text) {
  LpLines sections;
  std::vector<std::string>* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "minimize") {
      current = &sections.objective;
    } else if (line == "subject to") {
      current = &sections.rows;
    } else if (line == "bounds") {
      current = &sections.bounds;
    } else if (line == "binaries") {
      current = &sections.binaries;
    } else if (line == "generals") {
      current = &sections.generals;
    } else if (line == "end") {
      ended = true;
      break;
    } else if (current) {
      current->push_back(line);
    } else {
      throw MalformedLine("line " + std::to_string(lineno) +
                          ": content before any section");
    }
  }
  if (!ended) throw MalformedLine("missing 'end'");

  FlatModel m;
  std::map<std::string, SymbolRef> by_name;
  std::set<std::string> bins, ints;
  for (const auto& l : sections.binaries) {
    std::istringstream ls(l);
    std::string n;
    while (ls >> n) bins.insert(n);
  }
  for (const auto& l : sections.generals) {
    std::istringstream ls(l);
    std::string n;
    while (ls >> n) ints.insert(n);
  }
  for (const auto& l : sections.bounds) {
    std::istringstream ls(l);
    std::string lo, le1, name, le2, hi;
    if (!(ls >> lo >> le1 >> name >> le2 >> hi) || le1 != "<=" || le2 != "<=")
      throw MalformedLine("bad bounds line: " + l);
    VarDomain dom = bins.count(name)   ? VarDomain::Binary
                    : ints.count(name) ? VarDomain::Integer
                                       : VarDomain::Real;
    SymbolRef sym =
        make_symbol(name, SymbolKind::OperationalVariable, dom,
                    parse_number(lo, 0), parse_number(hi, 0));
    by_name.emplace(name, sym);
    m.variables.push_back({name, sym, dom, *sym->lo, *sym->hi});
  }

  // term sequence "+ c [name] - c [name] ... [rel rhs]"
  auto parse_row = [&](const std::string& l, bool is_objective) {
    std::istringstream ls(l);
    std::string head;
    ls >> head;  // "name:"
    if (head.empty() || head.back() != ':')
      throw MalformedLine("missing row name in: " + l);
    std::string name = head.substr(0, head.size() - 1);

    std::vector<Expr> terms;
    Relation rel = Relation::Eq;
    double rhs = 0.0;
    bool has_rel = false;
    std::string tok;
    while (ls >> tok) {
      if (tok == "<=" || tok == "=" || tok == ">=") {
        rel = tok == "<=" ? Relation::Le : tok == ">=" ? Relation::Ge
                                                       : Relation::Eq;
        std::string rtok;
        if (!(ls >> rtok)) throw MalformedLine("missing rhs in: " + l);
        rhs = parse_number(rtok, 0);
        has_rel = true;
        break;
      }
      double sign = tok == "-" ? -1.0 : 1.0;
      if (tok != "+" && tok != "-")
        throw MalformedLine("expected sign in: " + l);
      std::string ctok;
      if (!(ls >> ctok)) throw MalformedLine("dangling sign in: " + l);
      double coef = sign * parse_number(ctok, 0);
      // optional variable name (peek: next token that is not a sign/rel)
      std::streampos pos = ls.tellg();
      std::string vtok;
      if (ls >> vtok && vtok != "+" && vtok != "-" && vtok != "<=" &&
          vtok != "=" && vtok != ">=") {
        auto it = by_name.find(vtok);
        if (it == by_name.end())
          throw UnknownVariable(vtok + " in row " + name);
        if (coef != 0.0) terms.push_back(Expr(coef) * Expr(it->second));
      } else {
        if (coef != 0.0) terms.push_back(Expr(coef));
        ls.clear();
        ls.seekg(pos);
      }
    }
    if (is_objective) {
      m.objective = sum(terms);
    } else {
      if (!has_rel) throw MalformedLine("row without relation: " + l);
      m.constraints.push_back(
          {name, sum(terms), Expr(rhs), rel, "", true});
    }
  };

  if (sections.objective.empty()) throw MalformedLine("missing objective");
  parse_row(sections.objective[0], /*is_objective=*/true);
  for (const auto& l : sections.rows) parse_row(l, false);
  return m;
}

std::string emit_expr_listing(const FlatModel& m) {
  std::vector<Expr> exprs;
  exprs.push_back(m.objective);
  for (const auto& row : m.constraints) {
    exprs.push_back(row.lhs);
    exprs.push_back(row.rhs);
  }
  CseResult cse = eliminate_common_subexpressions(exprs, "cse.t");

  Dialect d = default_dialect();
  std::ostringstream os;
  if (!cse.defs.empty()) {
    os << "defs\n";
    for (const auto& [sym, def] : cse.defs)
      os << " " << sym->name << " = " << print_expr(def, d) << "\n";
  }
  os << "minimize\n obj: " << print_expr(cse.reduced[0], d) << "\n";
  os << "subject to\n";
  for (std::size_t i = 0; i < m.constraints.size(); ++i) {
    const auto& row = m.constraints[i];
    os << " " << row.name << ": " << print_expr(cse.reduced[1 + 2 * i], d)
       << " " << relation_text(row.rel) << " "
       << print_expr(cse.reduced[2 + 2 * i], d) << "\n";
  }
  os << "bounds\n";
  for (const auto& v : m.variables)
    os << " " << format_shortest(v.lo) << " <= " << v.name
       << " <= " << format_shortest(v.hi) << "\n";
  os << "end\n";
  return os.str();
}

const char* status_text(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::NodeLimit: return "NodeLimit";
  }
  return "?";
}

std::string write_solution(const FlatModel& m, const Solution& sol) {
  std::ostringstream os;
  os << "# status " << status_text(sol.status) << "\n";
  os << "# objective " << format_shortest(sol.objective) << "\n";
  for (const auto& v : m.variables) {
    auto it = sol.values.find(v.name);
    if (it == sol.values.end())
      throw MissingValue("no value for " + v.name);
    os << v.name << " " << format_shortest(it->second) << "\n";
  }
  return os.str();
}

Solution parse_solution(const FlatModel& m, std::istream& in) {
  Solution sol;
  sol.status = SolveStatus::Feasible;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "#") {
      std::string key;
      ls >> key;
      if (key == "status") {
        std::string v;
        ls >> v;
        for (SolveStatus s : {SolveStatus::Optimal, SolveStatus::Feasible,
                              SolveStatus::Infeasible, SolveStatus::Unbounded,
                              SolveStatus::IterLimit, SolveStatus::NodeLimit})
          if (v == status_text(s)) sol.status = s;
      } else if (key == "objective") {
        std::string v;
        ls >> v;
        sol.objective = parse_number(v, 0);
      }
      continue;
    }
    std::string vtok;
    if (!(ls >> vtok)) throw MalformedLine("bad solution line: " + line);
    if (!m.find_variable(first))
      throw UnknownVariable(first + " not in model");
    sol.values[first] = parse_number(vtok, 0);
  }
  for (const auto& v : m.variables)
    if (!sol.values.count(v.name))
      throw MalformedLine("solution missing " + v.name);
  return sol;
}

void write_back(ProblemSpec& p, const FlatModel& m, const Solution& sol) {
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    const Instance& inst = m.instances[i];
    auto it = sol.values.find(inst.name);
    if (it == sol.values.end())
      throw MissingValue("no value for " + inst.name);
    if (inst.base->kind == SymbolKind::DesignVariable) {
      p.set_design(inst.base, it->second);
    } else if (inst.base->kind == SymbolKind::OperationalVariable &&
               !inst.scenario.empty() && !inst.timepoint.empty()) {
      p.set_operation(inst.base, inst.scenario, inst.timepoint, it->second);
    }
    // Scenario-tagged auxiliaries without a timepoint (linearization aux)
    // stay internal to the flat model.
  }
}

Expr flatten_objective(const ProblemSpec& p, const FlatModel& m,
                       const Expr& design_part, const Expr& operation_part) {
  // instance lookup (base id, s, t) -> flat symbol
  std::map<std::tuple<std::uint64_t, std::string, std::string>, SymbolRef> inst;
  for (std::size_t i = 0; i < m.instances.size(); ++i)
    inst[{m.instances[i].base->id, m.instances[i].scenario,
          m.instances[i].timepoint}] = m.variables[i].sym;

  SubstMap first_map;
  for (const auto& param : p.parameters()) {
    const DataValue* dv = p.find_data(param->id);
    if (dv && dv->scalar) first_map.emplace(param->id, Expr(*dv->scalar));
  }

  std::vector<Expr> terms;
  Expr fi = substitute(design_part, first_map);
  require_no_parameters(fi, "objective design part");
  terms.push_back(fi);
  for (const auto& [sid, w] : p.scenarios().entries)
    for (const auto& [t, delta] : p.grid().points(sid)) {
      SubstMap map;
      for (const auto& param : p.parameters()) {
        const DataValue* dv = p.find_data(param->id);
        if (!dv) continue;
        if (auto v = dv->lookup(sid, t)) map.emplace(param->id, Expr(*v));
      }
      for (const auto& v : p.operational_vars()) {
        auto it = inst.find({v->id, sid, t});
        if (it != inst.end()) map.emplace(v->id, Expr(it->second));
      }
      Expr fii = substitute(operation_part, map);
      require_no_parameters(fii, "objective operation part");
      terms.push_back(Expr(w * delta) * fii);
    }
  return sum(terms);
}

std::pair<Expr, Expr> split_objective(const Expr& e) {
  std::vector<Expr> design, operation;
  const Node& n = e.node();
  if (n.kind == NodeKind::Sum) {
    for (const auto& c : n.children)
      (classify_stage(c) == StageClass::FirstStage ? design : operation)
          .push_back(c);
  } else {
    (classify_stage(e) == StageClass::FirstStage ? design : operation)
        .push_back(e);
  }
  return {sum(design), sum(operation)};
}

double evaluate_objective(const FlatModel& m,
                          const std::map<std::string, double>& values) {
  Bindings b;
  for (const auto& v : m.variables) {
    auto it = values.find(v.name);
    if (it == values.end()) throw MissingValue("no value for " + v.name);
    b.set(v.sym, it->second);
  }
  return evaluate(m.objective, b);
}

}  // namespace enopt
