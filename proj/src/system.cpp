#include "enopt/system.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <cstring>

namespace enopt {

void SystemModel::add_component(ComponentPtr member) {
  require_mutable();
  if (!member) throw Error("null member");
  for (const auto& m : members_)
    if (m->label() == member->label()) throw DuplicateName(member->label());
  member->chain_prefix(full_path());
  members_.push_back(std::move(member));
}

ComponentPtr SystemModel::find_member(const std::string& label) const {
  for (const auto& m : members_)
    if (m->label() == label) return m;
  return nullptr;
}

SystemModel::ResolvedConnector SystemModel::resolve_connector(
    const std::string& ref) const {
  auto dot = ref.find('.');
  if (dot == std::string::npos) throw UnknownConnector(ref);
  std::string member_label = ref.substr(0, dot);
  std::string rest = ref.substr(dot + 1);
  ComponentPtr m = find_member(member_label);
  if (!m) throw UnknownConnector(ref + " (no member " + member_label + ")");
  if (auto* sub = dynamic_cast<SystemModel*>(m.get())) {
    for (const auto& e : sub->exposures_)
      if (e.new_id == rest) return sub->resolve_connector(e.member_connector);
  }
  const Connector* c = m->find_connector(rest);
  if (!c) throw UnknownConnector(ref);
  return {m.get(), rest, c};
}

bool SystemModel::is_connected_deep(const ComponentModel* owner,
                                    const std::string& id) const {
  for (const auto& [o, i] : connected_)
    if (o == owner && i == id) return true;
  for (const auto& m : members_)
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get()))
      if (sub->is_connected_deep(owner, id)) return true;
  return false;
}

const RelationalConstraint& SystemModel::connect(
    const std::string& bus_label,
    const std::vector<std::string>& connector_refs) {
  require_mutable();
  if (connector_refs.empty())
    throw UnknownConnector("connection " + bus_label + " has no connectors");
  std::vector<Expr> terms;
  std::vector<ResolvedConnector> resolved;
  for (const auto& ref : connector_refs) {
    ResolvedConnector rc = resolve_connector(ref);
    if (is_connected_deep(rc.owner, rc.id))
      throw AlreadyConnected(ref);
    terms.push_back(rc.connector->expr);
    resolved.push_back(rc);
  }
  const RelationalConstraint& c =
      add_constraint(bus_label, sum(std::move(terms)), Relation::Eq, Expr(0.0));
  mutable_constraints().back().auto_generated = true;
  for (const auto& rc : resolved) connected_.emplace_back(rc.owner, rc.id);
  connections_.push_back({bus_label, connector_refs});
  return c;
}

void SystemModel::expose_connector(const std::string& member_connector,
                                   const std::string& new_id) {
  require_mutable();
  ResolvedConnector rc = resolve_connector(member_connector);
  if (is_connected_deep(rc.owner, rc.id))
    throw AlreadyConnected(member_connector);
  for (const auto& e : exposures_)
    if (e.new_id == new_id) throw DuplicateName(new_id);
  if (find_connector(new_id)) throw DuplicateName(new_id);
  exposures_.push_back({new_id, member_connector});
}

Expr SystemModel::aggregate_component_expressions(const std::string& id) const {
  std::vector<Expr> terms;
  if (has_expression(id)) terms.push_back(get_expression(id));
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      Expr e = sub->aggregate_component_expressions(id);
      if (!(e.is_constant() && e.constant_value() == 0.0))
        terms.push_back(std::move(e));
    } else if (m->has_expression(id)) {
      terms.push_back(m->get_expression(id));
    }
  }
  return sum(std::move(terms));
}

std::vector<RelationalConstraint> SystemModel::all_constraints() const {
  std::vector<RelationalConstraint> out;
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      auto sc = sub->all_constraints();
      out.insert(out.end(), sc.begin(), sc.end());
    } else {
      out.insert(out.end(), m->constraints().begin(), m->constraints().end());
    }
  }
  out.insert(out.end(), constraints().begin(), constraints().end());
  return out;
}

std::vector<StateDeclaration> SystemModel::all_states() const {
  std::vector<StateDeclaration> out;
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      auto ss = sub->all_states();
      out.insert(out.end(), ss.begin(), ss.end());
    } else {
      out.insert(out.end(), m->states().begin(), m->states().end());
    }
  }
  out.insert(out.end(), states().begin(), states().end());
  return out;
}

void SystemModel::all_symbols(std::vector<SymbolRef>& params,
                              std::vector<SymbolRef>& design,
                              std::vector<SymbolRef>& operational) const {
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      sub->all_symbols(params, design, operational);
    } else {
      params.insert(params.end(), m->parameters().begin(), m->parameters().end());
      design.insert(design.end(), m->design_vars().begin(), m->design_vars().end());
      operational.insert(operational.end(), m->operational_vars().begin(),
                         m->operational_vars().end());
    }
  }
  params.insert(params.end(), parameters().begin(), parameters().end());
  design.insert(design.end(), design_vars().begin(), design_vars().end());
  operational.insert(operational.end(), operational_vars().begin(),
                     operational_vars().end());
}

std::map<std::uint64_t, double> SystemModel::all_default_data() const {
  std::map<std::uint64_t, double> out = default_data();
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      auto d = sub->all_default_data();
      out.insert(d.begin(), d.end());
    } else {
      out.insert(m->default_data().begin(), m->default_data().end());
    }
  }
  return out;
}

SymbolRef SystemModel::resolve_symbol(const std::string& qualified_name) const {
  if (SymbolRef s = find_symbol(qualified_name)) return s;
  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<const SystemModel*>(m.get())) {
      if (SymbolRef s = sub->resolve_symbol(qualified_name)) return s;
    } else if (SymbolRef s = m->find_symbol(qualified_name)) {
      return s;
    }
  }
  return nullptr;
}

void SystemModel::freeze_all() {
  std::vector<SymbolRef> p, d, o;
  all_symbols(p, d, o);
  std::set<std::string> names;
  for (const auto* v : {&p, &d, &o})
    for (const auto& s : *v)
      if (!names.insert(s->name).second)
        throw DuplicateName("symbol name not unique in system: " + s->name);

  // States are unique per variable system-wide.
  std::set<std::uint64_t> state_ids;
  for (const auto& sd : all_states())
    if (!state_ids.insert(sd.state->id).second)
      throw AlreadyState(sd.state->name);

  for (const auto& m : members_) {
    if (auto* sub = dynamic_cast<SystemModel*>(m.get()))
      sub->freeze_all();
    else
      m->freeze();
  }
  freeze();
}

void SystemModel::chain_prefix(const std::string& prefix) {
  ComponentModel::chain_prefix(prefix);
  for (const auto& m : members_) m->chain_prefix(prefix);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) { return format_shortest(v); }

void emit_symbol_lines(const ComponentModel& c, const std::string& path,
                       std::vector<std::pair<std::uint64_t, std::string>>& out) {
  auto local = [&](const SymbolRef& s) {
    return s->name.substr(path.size() + 1);
  };
  for (const auto& s : c.parameters()) {
    if (c.is_implicit_symbol(s->id)) continue;
    std::string line = "parameter " + local(s);
    auto it = c.default_data().find(s->id);
    if (it != c.default_data().end()) line += " value " + fmt(it->second);
    if (s->indexed) line += " indexed";
    out.emplace_back(s->id, std::move(line));
  }
  auto var_line = [&](const SymbolRef& s, const char* kw) {
    std::string line = std::string(kw) + " " + local(s);
    switch (s->domain) {
      case VarDomain::Real: line += " real"; break;
      case VarDomain::Integer: line += " integer"; break;
      case VarDomain::Binary: line += " binary"; break;
    }
    if (s->lo) line += " lo " + fmt(*s->lo);
    if (s->hi) line += " hi " + fmt(*s->hi);
    if (s->init) line += " init " + fmt(*s->init);
    return line;
  };
  for (const auto& s : c.design_vars())
    if (!c.is_implicit_symbol(s->id))
      out.emplace_back(s->id, var_line(s, "design"));
  for (const auto& s : c.operational_vars())
    if (!c.is_implicit_symbol(s->id))
      out.emplace_back(s->id, var_line(s, "operational"));
}

void emit_component(const ComponentModel& c, int depth, std::string& out) {
  std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
  std::string ind1(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const auto* sys = dynamic_cast<const SystemModel*>(&c);
  out += ind + (sys ? "system " : "component ") + c.label() + " {\n";
  std::string path = c.full_path();

  std::vector<std::pair<std::uint64_t, std::string>> symbol_lines;
  emit_symbol_lines(c, path, symbol_lines);
  std::sort(symbol_lines.begin(), symbol_lines.end());
  for (const auto& [id, line] : symbol_lines) out += ind1 + line + "\n";

  if (sys)
    for (const auto& m : sys->members()) emit_component(*m, depth + 1, out);

  for (const auto& sd : c.states()) {
    std::string local = sd.state->name.substr(path.size() + 1);
    std::string line = "state " + local;
    if (c.is_implicit_symbol(sd.initial->id)) {
      line += " initial " + fmt(c.default_data().at(sd.initial->id));
    } else {
      line += " initial param " + sd.initial->name;
    }
    if (sd.derivative->lo) line += " der_lo " + fmt(*sd.derivative->lo);
    if (sd.derivative->hi) line += " der_hi " + fmt(*sd.derivative->hi);
    line += ": " + print_expr(sd.rhs);
    out += ind1 + line + "\n";
  }

  for (const auto& con : c.constraints()) {
    if (con.auto_generated) continue;
    std::string local = con.name.substr(path.size() + 1);
    out += ind1 + "constraint " + local + ": " + print_expr(con.lhs) + " " +
           relation_text(con.rel) + " " + print_expr(con.rhs) + "\n";
  }

  for (const auto& [id, e] : c.expressions())
    out += ind1 + "expression " + id + ": " + print_expr(e) + "\n";

  for (const auto& [id, con] : c.connectors()) {
    const char* pol = con.polarity == Polarity::Input     ? "input"
                      : con.polarity == Polarity::Output  ? "output"
                                                          : "bidirectional";
    out += ind1 + "connector " + id + " " + pol + ": " +
           print_expr(con.expr) + "\n";
  }

  if (sys) {
    for (const auto& conn : sys->connections()) {
      out += ind1 + "connect " + conn.bus_label + ":";
      for (const auto& r : conn.connector_refs) out += " " + r;
      out += "\n";
    }
    for (const auto& e : sys->exposures())
      out += ind1 + "expose " + e.new_id + ": " + e.member_connector + "\n";
  }

  out += ind + "}\n";
}

}  // namespace

std::string serialize_system(const SystemModel& sys) {
  std::string out;
  emit_component(sys, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing (two passes: structure+symbols, then expressions)
// ---------------------------------------------------------------------------

namespace {

struct Tok {
  std::vector<std::string> words;  // split at spaces, before any ':'
  std::string tail;                // after the first ':' (expression text)
};

Tok split_line(const std::string& line) {
  Tok t;
  std::string head = line;
  // The first ':' that is part of a declaration separates head from tail.
  auto colon = line.find(':');
  if (colon != std::string::npos) {
    head = line.substr(0, colon);
    t.tail = line.substr(colon + 1);
    // trim
    while (!t.tail.empty() && t.tail.front() == ' ') t.tail.erase(0, 1);
  }
  std::istringstream is(head);
  std::string w;
  while (is >> w) t.words.push_back(w);
  return t;
}

struct Deferred {
  ComponentModel* owner = nullptr;
  Tok tok;
};

double parse_num(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw ParseError("bad number: " + s);
  return v;
}

struct Ctx {
  std::vector<Deferred> deferred;
};

ComponentPtr parse_block(std::istream& in, const std::string& kind,
                         const std::string& label, Ctx& ctx) {
  ComponentPtr comp;
  SystemModel* sys = nullptr;
  if (kind == "system") {
    auto s = std::make_shared<SystemModel>(label);
    sys = s.get();
    comp = s;
  } else {
    comp = std::make_shared<ComponentModel>(label);
  }

  std::string line;
  while (std::getline(in, line)) {
    // trim
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    if (line == "}") return comp;
    Tok t = split_line(line);
    if (t.words.empty()) continue;
    const std::string& kw = t.words[0];

    if (kw == "system" || kw == "component") {
      if (t.words.size() < 3 || t.words[2] != "{")
        throw ParseError("bad block header: " + line);
      if (!sys) throw ParseError("components cannot nest members: " + line);
      sys->add_component(parse_block(in, kw, t.words[1], ctx));
    } else if (kw == "parameter") {
      std::optional<double> value;
      bool indexed = false;
      for (std::size_t i = 2; i < t.words.size(); ++i) {
        if (t.words[i] == "value") value = parse_num(t.words.at(++i));
        else if (t.words[i] == "indexed") indexed = true;
        else throw ParseError("bad parameter attribute: " + t.words[i]);
      }
      comp->make_parameter(t.words.at(1), value, indexed);
    } else if (kw == "design" || kw == "operational") {
      VarDomain dom = VarDomain::Real;
      std::optional<double> lo, hi, init;
      std::size_t i = 2;
      if (i < t.words.size()) {
        if (t.words[i] == "real") { dom = VarDomain::Real; ++i; }
        else if (t.words[i] == "integer") { dom = VarDomain::Integer; ++i; }
        else if (t.words[i] == "binary") { dom = VarDomain::Binary; ++i; }
      }
      for (; i < t.words.size(); ++i) {
        if (t.words[i] == "lo") lo = parse_num(t.words.at(++i));
        else if (t.words[i] == "hi") hi = parse_num(t.words.at(++i));
        else if (t.words[i] == "init") init = parse_num(t.words.at(++i));
        else throw ParseError("bad variable attribute: " + t.words[i]);
      }
      if (kw == "design")
        comp->make_design_variable(t.words.at(1), lo, hi, dom, init);
      else
        comp->make_operational_variable(t.words.at(1), lo, hi, dom, init);
    } else if (kw == "state" || kw == "constraint" || kw == "expression" ||
               kw == "connector" || kw == "connect" || kw == "expose") {
      ctx.deferred.push_back({comp.get(), std::move(t)});
    } else {
      throw ParseError("unknown keyword: " + kw);
    }
  }
  throw ParseError("unterminated block for " + label);
}

Relation parse_relation_split(const std::string& text, std::string& lhs,
                              std::string& rhs) {
  for (const auto& [tok, rel] :
       std::initializer_list<std::pair<const char*, Relation>>{
           {" <= ", Relation::Le}, {" >= ", Relation::Ge}, {" = ", Relation::Eq}}) {
    auto p = text.find(tok);
    if (p != std::string::npos) {
      lhs = text.substr(0, p);
      rhs = text.substr(p + std::strlen(tok));
      return rel;
    }
  }
  throw ParseError("no relation in: " + text);
}

}  // namespace

SystemPtr parse_system(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  std::getline(in, header);
  Tok h = split_line(header);
  if (h.words.size() < 3 || h.words[0] != "system" || h.words[2] != "{")
    throw ParseError("expected top-level 'system <label> {'");

  Ctx ctx;
  ComponentPtr rootc = parse_block(in, "system", h.words[1], ctx);
  auto root = std::static_pointer_cast<SystemModel>(rootc);

  SymbolResolver resolve = [&](std::string_view name) -> SymbolRef {
    SymbolRef s = root->resolve_symbol(std::string(name));
    if (!s) throw ParseError("unknown symbol: " + std::string(name));
    return s;
  };

  for (auto& d : ctx.deferred) {
    const auto& w = d.tok.words;
    const std::string& kw = w[0];
    if (kw == "state") {
      std::variant<double, SymbolRef> initial = 0.0;
      std::optional<double> der_lo, der_hi;
      for (std::size_t i = 2; i < w.size(); ++i) {
        if (w[i] == "initial") {
          if (w.at(i + 1) == "param")
            initial = resolve(w.at(i += 2));
          else
            initial = parse_num(w.at(++i));
        } else if (w[i] == "der_lo") {
          der_lo = parse_num(w.at(++i));
        } else if (w[i] == "der_hi") {
          der_hi = parse_num(w.at(++i));
        } else {
          throw ParseError("bad state attribute: " + w[i]);
        }
      }
      SymbolRef state = d.owner->find_symbol(d.owner->full_path() + "." + w.at(1));
      if (!state) throw ParseError("unknown state variable: " + w.at(1));
      d.owner->declare_state(state, parse_expr(d.tok.tail, resolve), initial,
                             der_lo, der_hi);
    } else if (kw == "constraint") {
      std::string lt, rt;
      Relation rel = parse_relation_split(d.tok.tail, lt, rt);
      d.owner->add_constraint(w.at(1), parse_expr(lt, resolve), rel,
                              parse_expr(rt, resolve));
    } else if (kw == "expression") {
      d.owner->add_expression(w.at(1), parse_expr(d.tok.tail, resolve));
    } else if (kw == "connector") {
      Polarity pol = Polarity::Bidirectional;
      if (w.at(2) == "input") pol = Polarity::Input;
      else if (w.at(2) == "output") pol = Polarity::Output;
      else if (w.at(2) != "bidirectional")
        throw ParseError("bad polarity: " + w.at(2));
      d.owner->add_connector(w.at(1), parse_expr(d.tok.tail, resolve), pol);
    } else if (kw == "connect") {
      auto* sys = dynamic_cast<SystemModel*>(d.owner);
      if (!sys) throw ParseError("connect outside system block");
      std::istringstream rs(d.tok.tail);
      std::vector<std::string> refs;
      std::string r;
      while (rs >> r) refs.push_back(r);
      sys->connect(w.at(1), refs);
    } else if (kw == "expose") {
      auto* sys = dynamic_cast<SystemModel*>(d.owner);
      if (!sys) throw ParseError("expose outside system block");
      sys->expose_connector(d.tok.tail, w.at(1));
    }
  }
  return root;
}

}  // namespace enopt
