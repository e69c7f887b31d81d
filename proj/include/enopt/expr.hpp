#pragma once

// Immutable symbolic expression trees: construction, evaluation,
// differentiation, substitution, stage classification, common subexpression
// elimination and generic printing/parsing.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "enopt/errors.hpp"

namespace enopt {

enum class SymbolKind { Parameter, DesignVariable, OperationalVariable };
enum class VarDomain { Real, Integer, Binary };

struct SymbolData {
  std::uint64_t id = 0;
  std::string name;  // qualified, "component.local_name"
  SymbolKind kind = SymbolKind::Parameter;
  VarDomain domain = VarDomain::Real;
  std::optional<double> lo, hi;
  std::optional<double> init;
  // Parameters only: true when the datum varies per scenario/time point.
  bool indexed = false;
};

using SymbolRef = std::shared_ptr<const SymbolData>;

// Validates the symbol invariants (bounds ordering, binary range, variable-only
// domains) and assigns a fresh process-wide id.
SymbolRef make_symbol(std::string name, SymbolKind kind,
                      VarDomain domain = VarDomain::Real,
                      std::optional<double> lo = std::nullopt,
                      std::optional<double> hi = std::nullopt,
                      std::optional<double> init = std::nullopt,
                      bool indexed = false);

inline bool is_variable(const SymbolRef& s) {
  return s->kind != SymbolKind::Parameter;
}

enum class NodeKind { Constant, Symbol, Sum, Product, Power, Func };
enum class FuncTag { Exp, Log, Tanh, Sqrt, Min, Max, Abs };

const char* func_name(FuncTag tag);

class Expr;
struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Value handle over an immutable tree node. Freely copyable and shareable.
class Expr {
public:
  Expr() : Expr(0.0) {}
  Expr(double c);                // NOLINT: implicit by design
  Expr(const SymbolRef& s);      // NOLINT
  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  const Node& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }
  NodeKind kind() const;
  std::size_t hash() const;

  bool is_constant() const { return kind() == NodeKind::Constant; }
  bool is_symbol() const { return kind() == NodeKind::Symbol; }
  double constant_value() const;  // requires Constant
  const SymbolRef& symbol() const;  // requires Symbol

private:
  NodePtr node_;
};

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;             // Constant
  SymbolRef sym;                  // Symbol
  FuncTag tag = FuncTag::Exp;     // Func
  std::vector<Expr> children;     // Sum/Product args, Power [base, exponent], Func args
  std::size_t hash = 0;
};

// Structural equality / total ordering (kind rank, then symbol id, constant
// value, tag, children lexicographically). The ordering is the canonical
// child order of Sum/Product nodes.
bool equal(const Expr& a, const Expr& b);
int compare(const Expr& a, const Expr& b);

// Builders. Sum/Product require >= 2 children after construction; the n-ary
// helpers return the single child (or the neutral element) for shorter inputs.
// Pure-constant subtrees fold to a Constant at construction; nothing else is
// simplified.
Expr sum(std::vector<Expr> children);
Expr product(std::vector<Expr> children);
Expr pow(Expr base, Expr exponent);
Expr func(FuncTag tag, std::vector<Expr> args);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);

Expr exp(Expr x);
Expr log(Expr x);
Expr tanh(Expr x);
Expr sqrt(Expr x);
Expr abs(Expr x);
Expr min(Expr a, Expr b);
Expr max(Expr a, Expr b);

// Bindings map symbol ids to numeric values.
class Bindings {
public:
  Bindings() = default;
  Bindings(std::initializer_list<std::pair<SymbolRef, double>> init) {
    for (const auto& [s, v] : init) set(s, v);
  }
  void set(const SymbolRef& s, double v) { values_[s->id] = v; }
  const double* find(std::uint64_t id) const {
    auto it = values_.find(id);
    return it == values_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return values_.size(); }

private:
  std::unordered_map<std::uint64_t, double> values_;
};

double evaluate(const Expr& e, const Bindings& b);

// Evaluates e at many binding sets. `parallel` enables the OpenMP kernel;
// the serial path is the reference used for testing.
std::vector<double> evaluate_many(const Expr& e, std::span<const Bindings> bs,
                                  bool parallel = true);

Expr differentiate(const Expr& e, const SymbolRef& s);

using SubstMap = std::unordered_map<std::uint64_t, Expr>;
Expr substitute(const Expr& e, const SubstMap& map);

enum class StageClass { FirstStage, SecondStage };
StageClass classify_stage(const Expr& e);

bool contains_symbol(const Expr& e, std::uint64_t id);
void collect_symbols(const Expr& e,
                     std::map<std::uint64_t, SymbolRef>& out);
std::map<std::uint64_t, SymbolRef> collect_symbols(const Expr& e);

// Isolates `s` from the affine equation lhs == rhs, returning the solving
// expression (rhs_b - lhs_b) / (lhs_a - rhs_a) for e = a*s + b decompositions.
// Throws NotLinearInSymbol when either side is not affine in s or the
// coefficient of s vanishes structurally.
Expr solve_linear(const Expr& lhs, const Expr& rhs, const SymbolRef& s);

struct CseResult {
  std::vector<std::pair<SymbolRef, Expr>> defs;  // ordered, later defs may use earlier aux symbols
  std::vector<Expr> reduced;
};

// Replaces every composite subtree occurring at least twice across `es` by a
// fresh auxiliary Parameter symbol defined once. Substituting defs back (in
// reverse order) reproduces the inputs structurally.
CseResult eliminate_common_subexpressions(std::span<const Expr> es,
                                          std::string_view aux_prefix = "cse.t");

// Printing. The default dialect matches the plain-text grammar in
// docs/expr-grammar.md ("**" power, function-call syntax, shortest
// round-trip number format).
struct Dialect {
  std::string power_op = "**";
  std::unordered_map<int, std::string> func_names;  // FuncTag -> name
  std::function<std::string(double)> format_number;  // default: shortest round-trip
};

const Dialect& default_dialect();
std::string print_expr(const Expr& e, const Dialect& d = default_dialect());

// Shortest round-trip decimal representation of a binary64 value.
std::string format_shortest(double v);

// Parses the default-dialect grammar. The resolver maps an identifier to its
// symbol; it may create symbols on the fly or throw for unknown names.
using SymbolResolver = std::function<SymbolRef(std::string_view)>;
Expr parse_expr(std::string_view text, const SymbolResolver& resolve);

}  // namespace enopt
