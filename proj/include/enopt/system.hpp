#pragma once

// System models aggregate components and subsystems: bus connections with
// automatic balance constraints, connector exposure, recursive expression
// aggregation, and serialization to a structured text document.

#include <memory>
#include <string>
#include <vector>

#include "enopt/component.hpp"

namespace enopt {

class SystemModel;
using SystemPtr = std::shared_ptr<SystemModel>;

class SystemModel : public ComponentModel {
public:
  explicit SystemModel(std::string label) : ComponentModel(std::move(label)) {}

  // Adds a component or subsystem; its symbol and constraint names are
  // prefixed with this system's label.
  void add_component(ComponentPtr member);

  const std::vector<ComponentPtr>& members() const { return members_; }
  ComponentPtr find_member(const std::string& label) const;

  // Connects connectors ("member.connector_id", or an exposed id of a member
  // subsystem) to a bus; adds the balance equality sum(expr_k) = 0.
  const RelationalConstraint& connect(
      const std::string& bus_label,
      const std::vector<std::string>& connector_refs);

  // Makes a member's connector addressable on this system under new_id.
  void expose_connector(const std::string& member_connector,
                        const std::string& new_id);

  // Recursive sum of all expressions stored under `id` in this system and
  // every (sub)member; members lacking the id contribute 0.
  Expr aggregate_component_expressions(const std::string& id) const;

  struct Connection {
    std::string bus_label;
    std::vector<std::string> connector_refs;  // as given to connect()
  };
  const std::vector<Connection>& connections() const { return connections_; }

  struct Exposure {
    std::string new_id;
    std::string member_connector;
  };
  const std::vector<Exposure>& exposures() const { return exposures_; }

  // All constraints of the system and its members, depth first.
  std::vector<RelationalConstraint> all_constraints() const;
  std::vector<StateDeclaration> all_states() const;
  void all_symbols(std::vector<SymbolRef>& params, std::vector<SymbolRef>& design,
                   std::vector<SymbolRef>& operational) const;
  std::map<std::uint64_t, double> all_default_data() const;
  SymbolRef resolve_symbol(const std::string& qualified_name) const;

  // Freezes the whole tree and checks global name uniqueness.
  void freeze_all();

  void chain_prefix(const std::string& prefix) override;

private:
  struct ResolvedConnector {
    ComponentModel* owner = nullptr;
    std::string id;  // connector id local to owner
    const Connector* connector = nullptr;
  };
  ResolvedConnector resolve_connector(const std::string& ref) const;
  bool is_connected_deep(const ComponentModel* owner,
                         const std::string& id) const;

  std::vector<ComponentPtr> members_;
  std::vector<Connection> connections_;
  std::vector<Exposure> exposures_;
  // Connectors consumed by a connection at this level.
  std::vector<std::pair<const ComponentModel*, std::string>> connected_;
};

// Structured-text serialization; serialize(parse_system(text)) == text for
// documents produced by serialize().
std::string serialize_system(const SystemModel& sys);
SystemPtr parse_system(std::string_view text);

}  // namespace enopt
