#include "enopt/component.hpp"

#include <algorithm>

namespace enopt {

const char* relation_text(Relation r) {
  switch (r) {
    case Relation::Le: return "<=";
    case Relation::Eq: return "=";
    case Relation::Ge: return ">=";
  }
  return "?";
}

ComponentModel::ComponentModel(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw Error("component label must be non-empty");
  if (label_.find('.') != std::string::npos)
    throw Error("component label must not contain '.': " + label_);
}

void ComponentModel::require_mutable() const {
  if (frozen_) throw FrozenModel(label_ + " is frozen");
}

void ComponentModel::require_unused_symbol_name(const std::string& local) const {
  std::string q = qualify(local);
  auto used = [&](const std::vector<SymbolRef>& v) {
    return std::any_of(v.begin(), v.end(),
                       [&](const SymbolRef& s) { return s->name == q; });
  };
  if (used(parameters_) || used(design_vars_) || used(operational_vars_))
    throw DuplicateName(q);
}

SymbolRef ComponentModel::make_parameter(const std::string& name,
                                         std::optional<double> value,
                                         bool indexed) {
  require_mutable();
  require_unused_symbol_name(name);
  SymbolRef s = make_symbol(qualify(name), SymbolKind::Parameter,
                            VarDomain::Real, std::nullopt, std::nullopt,
                            std::nullopt, indexed);
  parameters_.push_back(s);
  if (value) defaults_[s->id] = *value;
  return s;
}

SymbolRef ComponentModel::make_design_variable(const std::string& name,
                                               std::optional<double> lo,
                                               std::optional<double> hi,
                                               VarDomain domain,
                                               std::optional<double> init) {
  require_mutable();
  require_unused_symbol_name(name);
  SymbolRef s = make_symbol(qualify(name), SymbolKind::DesignVariable, domain,
                            lo, hi, init);
  design_vars_.push_back(s);
  return s;
}

SymbolRef ComponentModel::make_operational_variable(
    const std::string& name, std::optional<double> lo,
    std::optional<double> hi, VarDomain domain, std::optional<double> init) {
  require_mutable();
  require_unused_symbol_name(name);
  SymbolRef s = make_symbol(qualify(name), SymbolKind::OperationalVariable,
                            domain, lo, hi, init);
  operational_vars_.push_back(s);
  return s;
}

const RelationalConstraint& ComponentModel::add_constraint(
    const std::string& name, Expr lhs, Relation rel, Expr rhs) {
  require_mutable();
  std::string q = qualify(name);
  for (const auto& c : constraints_)
    if (c.name == q) throw DuplicateName(q);
  StageClass stage =
      (classify_stage(lhs) == StageClass::FirstStage &&
       classify_stage(rhs) == StageClass::FirstStage)
          ? StageClass::FirstStage
          : StageClass::SecondStage;
  constraints_.push_back({q, std::move(lhs), std::move(rhs), rel, stage});
  return constraints_.back();
}

void ComponentModel::add_expression(const std::string& id, Expr e) {
  require_mutable();
  if (expressions_.count(id)) throw DuplicateName(qualify(id));
  expressions_.emplace(id, std::move(e));
}

const Expr& ComponentModel::get_expression(const std::string& id) const {
  auto it = expressions_.find(id);
  if (it == expressions_.end()) throw UnknownId(qualify(id));
  return it->second;
}

bool ComponentModel::has_expression(const std::string& id) const {
  return expressions_.count(id) != 0;
}

const StateDeclaration& ComponentModel::declare_state(
    const SymbolRef& state, Expr rhs, std::variant<double, SymbolRef> initial,
    std::optional<double> der_lo, std::optional<double> der_hi) {
  require_mutable();
  if (state->kind != SymbolKind::OperationalVariable)
    throw ForeignSymbol(state->name + " is not an operational variable");
  bool owned = std::any_of(
      operational_vars_.begin(), operational_vars_.end(),
      [&](const SymbolRef& s) { return s->id == state->id; });
  if (!owned) throw ForeignSymbol(state->name + " is not owned by " + label_);
  for (const auto& d : states_)
    if (d.state->id == state->id) throw AlreadyState(state->name);

  std::string local = state->name.substr(label_.size() + 1);
  SymbolRef der = make_operational_variable(local + "_dot", der_lo, der_hi);

  SymbolRef init_param;
  if (std::holds_alternative<double>(initial)) {
    init_param = make_parameter(local + "_init", std::get<double>(initial));
  } else {
    init_param = std::get<SymbolRef>(initial);
    if (init_param->kind != SymbolKind::Parameter)
      throw ForeignSymbol("initial value must be a parameter: " +
                          init_param->name);
  }

  add_constraint(local + "_state_eq", Expr(der), Relation::Eq, rhs);
  constraints_.back().auto_generated = true;
  implicit_symbols_.insert(der->id);
  if (std::holds_alternative<double>(initial))
    implicit_symbols_.insert(init_param->id);
  states_.push_back({state, der, std::move(rhs), init_param});
  return states_.back();
}

const StateDeclaration& ComponentModel::make_state(
    const std::string& name, Expr rhs, std::variant<double, SymbolRef> initial,
    std::optional<double> lo, std::optional<double> hi,
    std::optional<double> der_lo, std::optional<double> der_hi) {
  SymbolRef v = make_operational_variable(name, lo, hi);
  return declare_state(v, std::move(rhs), std::move(initial), der_lo, der_hi);
}

const Connector& ComponentModel::add_connector(const std::string& id,
                                               Expr expr, Polarity polarity) {
  require_mutable();
  if (connectors_.count(id)) throw DuplicateName(qualify(id));
  if (polarity == Polarity::Input) {
    add_constraint(id + "_polarity", expr, Relation::Ge, Expr(0.0));
    constraints_.back().auto_generated = true;
  } else if (polarity == Polarity::Output) {
    add_constraint(id + "_polarity", expr, Relation::Le, Expr(0.0));
    constraints_.back().auto_generated = true;
  }
  auto [it, ok] =
      connectors_.emplace(id, Connector{id, std::move(expr), polarity});
  (void)ok;
  return it->second;
}

const Connector* ComponentModel::find_connector(const std::string& id) const {
  auto it = connectors_.find(id);
  return it == connectors_.end() ? nullptr : &it->second;
}

SymbolRef ComponentModel::find_symbol(const std::string& qualified_name) const {
  for (const auto* v : {&parameters_, &design_vars_, &operational_vars_})
    for (const auto& s : *v)
      if (s->name == qualified_name) return s;
  return nullptr;
}

void ComponentModel::freeze() { frozen_ = true; }

void ComponentModel::chain_prefix(const std::string& prefix) {
  require_mutable();
  // Renaming happens during single-threaded system construction, before any
  // expression sharing across threads; symbol identity (id) is untouched.
  for (const auto* v : {&parameters_, &design_vars_, &operational_vars_})
    for (const auto& s : *v)
      const_cast<SymbolData&>(*s).name = prefix + "." + s->name;
  for (auto& c : constraints_) c.name = prefix + "." + c.name;
  path_prefix_ =
      path_prefix_.empty() ? prefix : prefix + "." + path_prefix_;
}

}  // namespace enopt
