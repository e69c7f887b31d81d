#pragma once

// Component modeling: symbols, constraints, stored expressions, differential
// states and connectors for one named component.

#include <map>
#include <set>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "enopt/expr.hpp"

namespace enopt {

enum class Relation { Le, Eq, Ge };

const char* relation_text(Relation r);  // "<=", "=", ">="

struct RelationalConstraint {
  std::string name;  // qualified "label.name"
  Expr lhs, rhs;
  Relation rel = Relation::Eq;
  StageClass stage = StageClass::FirstStage;  // derived from both sides
  // True for constraints created as a side effect (connector polarity, state
  // equalities, bus balances); these regenerate on deserialization.
  bool auto_generated = false;
};

enum class Polarity { Input, Output, Bidirectional };

struct Connector {
  std::string id;  // local id
  Expr expr;
  Polarity polarity = Polarity::Bidirectional;
};

struct StateDeclaration {
  SymbolRef state;       // operational variable
  SymbolRef derivative;  // fresh operational variable, linked by an equality
  Expr rhs;
  // Initial values are always a parameter symbol; literal initials create an
  // implicit parameter carrying the literal as its default datum.
  SymbolRef initial;
};

class ComponentModel {
public:
  explicit ComponentModel(std::string label);
  virtual ~ComponentModel() = default;

  const std::string& label() const { return label_; }
  // Dot-joined chain of enclosing system labels plus the own label.
  std::string full_path() const {
    return path_prefix_.empty() ? label_ : path_prefix_ + "." + label_;
  }

  SymbolRef make_parameter(const std::string& name,
                           std::optional<double> value = std::nullopt,
                           bool indexed = false);
  SymbolRef make_design_variable(const std::string& name,
                                 std::optional<double> lo = std::nullopt,
                                 std::optional<double> hi = std::nullopt,
                                 VarDomain domain = VarDomain::Real,
                                 std::optional<double> init = std::nullopt);
  SymbolRef make_operational_variable(
      const std::string& name, std::optional<double> lo = std::nullopt,
      std::optional<double> hi = std::nullopt,
      VarDomain domain = VarDomain::Real,
      std::optional<double> init = std::nullopt);

  const RelationalConstraint& add_constraint(const std::string& name, Expr lhs,
                                             Relation rel, Expr rhs);

  void add_expression(const std::string& id, Expr e);
  const Expr& get_expression(const std::string& id) const;
  bool has_expression(const std::string& id) const;

  // Registers `state` as a differential state: creates a fresh derivative
  // variable and the equality derivative = rhs. The state/derivative time
  // link itself is added at discretization time.
  const StateDeclaration& declare_state(
      const SymbolRef& state, Expr rhs,
      std::variant<double, SymbolRef> initial,
      std::optional<double> der_lo = std::nullopt,
      std::optional<double> der_hi = std::nullopt);

  // make_operational_variable + declare_state in one call.
  const StateDeclaration& make_state(
      const std::string& name, Expr rhs,
      std::variant<double, SymbolRef> initial,
      std::optional<double> lo = std::nullopt,
      std::optional<double> hi = std::nullopt,
      std::optional<double> der_lo = std::nullopt,
      std::optional<double> der_hi = std::nullopt);

  const Connector& add_connector(const std::string& id, Expr expr,
                                 Polarity polarity);

  const std::vector<SymbolRef>& parameters() const { return parameters_; }
  const std::vector<SymbolRef>& design_vars() const { return design_vars_; }
  const std::vector<SymbolRef>& operational_vars() const {
    return operational_vars_;
  }
  const std::vector<RelationalConstraint>& constraints() const {
    return constraints_;
  }
  const std::vector<StateDeclaration>& states() const { return states_; }
  const std::map<std::string, Connector>& connectors() const {
    return connectors_;
  }
  const std::map<std::string, Expr>& expressions() const {
    return expressions_;
  }
  // Default data recorded at creation (parameter defaults, literal initials).
  const std::map<std::uint64_t, double>& default_data() const {
    return defaults_;
  }

  const Connector* find_connector(const std::string& id) const;
  SymbolRef find_symbol(const std::string& qualified_name) const;

  // Symbols created implicitly (state derivatives, literal initial
  // parameters); skipped by the serializer.
  bool is_implicit_symbol(std::uint64_t id) const {
    return implicit_symbols_.count(id) != 0;
  }

  void freeze();
  bool frozen() const { return frozen_; }

  // Prefixes every owned symbol and constraint name with "prefix."; called
  // when this model is added as a member of an enclosing system.
  virtual void chain_prefix(const std::string& prefix);

protected:
  void require_mutable() const;
  void require_unused_symbol_name(const std::string& local) const;
  std::string qualify(const std::string& local) const {
    return full_path() + "." + local;
  }
  std::vector<RelationalConstraint>& mutable_constraints() {
    return constraints_;
  }

private:
  std::string label_;
  std::string path_prefix_;
  bool frozen_ = false;
  std::vector<SymbolRef> parameters_, design_vars_, operational_vars_;
  std::vector<RelationalConstraint> constraints_;
  std::vector<StateDeclaration> states_;
  std::map<std::string, Connector> connectors_;
  std::map<std::string, Expr> expressions_;
  std::map<std::uint64_t, double> defaults_;
  std::set<std::uint64_t> implicit_symbols_;
};

using ComponentPtr = std::shared_ptr<ComponentModel>;

}  // namespace enopt
