#include "enopt/expr.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace enopt {

namespace {

std::atomic<std::uint64_t> g_next_symbol_id{1};

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_double(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0.0
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return std::hash<std::uint64_t>{}(bits);
}

std::size_t compute_hash(const Node& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1000003u;
  switch (n.kind) {
    case NodeKind::Constant:
      h = hash_combine(h, hash_double(n.value));
      break;
    case NodeKind::Symbol:
      h = hash_combine(h, std::hash<std::uint64_t>{}(n.sym->id));
      break;
    case NodeKind::Func:
      h = hash_combine(h, static_cast<std::size_t>(n.tag) + 17);
      [[fallthrough]];
    default:
      for (const auto& c : n.children) h = hash_combine(h, c.hash());
      break;
  }
  return h;
}

NodePtr make_node(Node n) {
  n.hash = compute_hash(n);
  return std::make_shared<const Node>(std::move(n));
}

int kind_rank(NodeKind k) { return static_cast<int>(k); }

bool all_constant(const std::vector<Expr>& es) {
  return std::all_of(es.begin(), es.end(),
                     [](const Expr& e) { return e.is_constant(); });
}

double apply_func(FuncTag tag, const std::vector<double>& args) {
  switch (tag) {
    case FuncTag::Exp: return std::exp(args[0]);
    case FuncTag::Log:
      if (args[0] <= 0.0) throw DomainError("log of non-positive value");
      return std::log(args[0]);
    case FuncTag::Tanh: return std::tanh(args[0]);
    case FuncTag::Sqrt:
      if (args[0] < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(args[0]);
    case FuncTag::Abs: return std::abs(args[0]);
    case FuncTag::Min: return *std::min_element(args.begin(), args.end());
    case FuncTag::Max: return *std::max_element(args.begin(), args.end());
  }
  throw Error("unreachable func tag");
}

std::size_t func_arity_min(FuncTag tag) {
  return (tag == FuncTag::Min || tag == FuncTag::Max) ? 2 : 1;
}

}  // namespace

const char* func_name(FuncTag tag) {
  switch (tag) {
    case FuncTag::Exp: return "exp";
    case FuncTag::Log: return "log";
    case FuncTag::Tanh: return "tanh";
    case FuncTag::Sqrt: return "sqrt";
    case FuncTag::Min: return "min";
    case FuncTag::Max: return "max";
    case FuncTag::Abs: return "abs";
  }
  return "?";
}

SymbolRef make_symbol(std::string name, SymbolKind kind, VarDomain domain,
                      std::optional<double> lo, std::optional<double> hi,
                      std::optional<double> init, bool indexed) {
  if (kind == SymbolKind::Parameter && domain != VarDomain::Real)
    throw BadBounds("Integer/Binary domains are for variables only: " + name);
  if (lo && hi && *lo > *hi)
    throw BadBounds(name + ": lo > hi");
  if (domain == VarDomain::Binary) {
    double blo = lo.value_or(0.0), bhi = hi.value_or(1.0);
    if (blo < 0.0 || bhi > 1.0)
      throw BadBounds(name + ": binary bounds must lie within [0,1]");
    lo = blo;
    hi = bhi;
  }
  auto s = std::make_shared<SymbolData>();
  s->id = g_next_symbol_id.fetch_add(1);
  s->name = std::move(name);
  s->kind = kind;
  s->domain = domain;
  s->lo = lo;
  s->hi = hi;
  s->init = init;
  s->indexed = indexed;
  return s;
}

Expr::Expr(double c) {
  Node n;
  n.kind = NodeKind::Constant;
  n.value = c;
  node_ = make_node(std::move(n));
}

Expr::Expr(const SymbolRef& s) {
  if (!s) throw Error("null symbol");
  Node n;
  n.kind = NodeKind::Symbol;
  n.sym = s;
  node_ = make_node(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
std::size_t Expr::hash() const { return node_->hash; }

double Expr::constant_value() const {
  assert(is_constant());
  return node_->value;
}

const SymbolRef& Expr::symbol() const {
  assert(is_symbol());
  return node_->sym;
}

int compare(const Expr& a, const Expr& b) {
  if (a.ptr() == b.ptr()) return 0;
  const Node& na = a.node();
  const Node& nb = b.node();
  if (kind_rank(na.kind) != kind_rank(nb.kind))
    return kind_rank(na.kind) < kind_rank(nb.kind) ? -1 : 1;
  switch (na.kind) {
    case NodeKind::Constant:
      if (na.value != nb.value) return na.value < nb.value ? -1 : 1;
      return 0;
    case NodeKind::Symbol:
      if (na.sym->id != nb.sym->id) return na.sym->id < nb.sym->id ? -1 : 1;
      return 0;
    case NodeKind::Func:
      if (na.tag != nb.tag) return na.tag < nb.tag ? -1 : 1;
      break;
    default:
      break;
  }
  std::size_t n = std::min(na.children.size(), nb.children.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(na.children[i], nb.children[i]);
    if (c != 0) return c;
  }
  if (na.children.size() != nb.children.size())
    return na.children.size() < nb.children.size() ? -1 : 1;
  return 0;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.ptr() == b.ptr()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

Expr sum(std::vector<Expr> children) {
  // Neutral elements are dropped; nothing else is simplified.
  std::erase_if(children, [](const Expr& e) {
    return e.is_constant() && e.constant_value() == 0.0;
  });
  if (children.empty()) return Expr(0.0);
  if (children.size() == 1) return children[0];
  if (all_constant(children)) {
    double v = 0.0;
    for (const auto& c : children) v += c.constant_value();
    return Expr(v);
  }
  std::stable_sort(children.begin(), children.end(),
                   [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  Node n;
  n.kind = NodeKind::Sum;
  n.children = std::move(children);
  return Expr(make_node(std::move(n)));
}

Expr product(std::vector<Expr> children) {
  for (const auto& c : children)
    if (c.is_constant() && c.constant_value() == 0.0) return Expr(0.0);
  std::erase_if(children, [](const Expr& e) {
    return e.is_constant() && e.constant_value() == 1.0;
  });
  if (children.empty()) return Expr(1.0);
  if (children.size() == 1) return children[0];
  if (all_constant(children)) {
    double v = 1.0;
    for (const auto& c : children) v *= c.constant_value();
    return Expr(v);
  }
  std::stable_sort(children.begin(), children.end(),
                   [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  Node n;
  n.kind = NodeKind::Product;
  n.children = std::move(children);
  return Expr(make_node(std::move(n)));
}

Expr pow(Expr base, Expr exponent) {
  if (exponent.is_constant() && exponent.constant_value() == 1.0) return base;
  if (exponent.is_constant() && exponent.constant_value() == 0.0)
    return Expr(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    double b = base.constant_value(), e = exponent.constant_value();
    if (b == 0.0 && e < 0.0) throw DomainError("0 raised to a negative power");
    double v = std::pow(b, e);
    if (std::isfinite(v)) return Expr(v);
    throw DomainError("constant power is not finite");
  }
  Node n;
  n.kind = NodeKind::Power;
  n.children = {std::move(base), std::move(exponent)};
  return Expr(make_node(std::move(n)));
}

Expr func(FuncTag tag, std::vector<Expr> args) {
  if (args.size() < func_arity_min(tag))
    throw Error(std::string("too few arguments for ") + func_name(tag));
  if (func_arity_min(tag) == 1 && args.size() != 1)
    throw Error(std::string(func_name(tag)) + " takes exactly one argument");
  if (all_constant(args)) {
    std::vector<double> vals;
    vals.reserve(args.size());
    for (const auto& a : args) vals.push_back(a.constant_value());
    return Expr(apply_func(tag, vals));
  }
  if (tag == FuncTag::Min || tag == FuncTag::Max)
    std::stable_sort(args.begin(), args.end(), [](const Expr& a, const Expr& b) {
      return compare(a, b) < 0;
    });
  Node n;
  n.kind = NodeKind::Func;
  n.tag = tag;
  n.children = std::move(args);
  return Expr(make_node(std::move(n)));
}

Expr operator+(Expr a, Expr b) { return sum({std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) {
  return sum({std::move(a), product({Expr(-1.0), std::move(b)})});
}
Expr operator*(Expr a, Expr b) { return product({std::move(a), std::move(b)}); }
Expr operator/(Expr a, Expr b) {
  return product({std::move(a), pow(std::move(b), Expr(-1.0))});
}
Expr operator-(Expr a) { return product({Expr(-1.0), std::move(a)}); }

Expr exp(Expr x) { return func(FuncTag::Exp, {std::move(x)}); }
Expr log(Expr x) { return func(FuncTag::Log, {std::move(x)}); }
Expr tanh(Expr x) { return func(FuncTag::Tanh, {std::move(x)}); }
Expr sqrt(Expr x) { return func(FuncTag::Sqrt, {std::move(x)}); }
Expr abs(Expr x) { return func(FuncTag::Abs, {std::move(x)}); }
Expr min(Expr a, Expr b) { return func(FuncTag::Min, {std::move(a), std::move(b)}); }
Expr max(Expr a, Expr b) { return func(FuncTag::Max, {std::move(a), std::move(b)}); }

double evaluate(const Expr& e, const Bindings& b) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant:
      return n.value;
    case NodeKind::Symbol: {
      const double* v = b.find(n.sym->id);
      if (!v) throw MissingBinding(n.sym->name);
      return *v;
    }
    case NodeKind::Sum: {
      double acc = 0.0;
      for (const auto& c : n.children) acc += evaluate(c, b);
      return acc;
    }
    case NodeKind::Product: {
      double acc = 1.0;
      for (const auto& c : n.children) acc *= evaluate(c, b);
      return acc;
    }
    case NodeKind::Power: {
      double base = evaluate(n.children[0], b);
      double ex = evaluate(n.children[1], b);
      if (base == 0.0 && ex < 0.0)
        throw DomainError("0 raised to a negative power");
      double v = std::pow(base, ex);
      if (std::isnan(v)) throw DomainError("power produced NaN");
      return v;
    }
    case NodeKind::Func: {
      std::vector<double> args;
      args.reserve(n.children.size());
      for (const auto& c : n.children) args.push_back(evaluate(c, b));
      return apply_func(n.tag, args);
    }
  }
  throw Error("unreachable node kind");
}

std::vector<double> evaluate_many(const Expr& e, std::span<const Bindings> bs,
                                  bool parallel) {
  std::vector<double> out(bs.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(bs.size()); ++i)
      out[static_cast<std::size_t>(i)] = evaluate(e, bs[static_cast<std::size_t>(i)]);
  } else {
    for (std::size_t i = 0; i < bs.size(); ++i) out[i] = evaluate(e, bs[i]);
  }
  return out;
}

namespace {

Expr diff(const Expr& e, std::uint64_t id) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant:
      return Expr(0.0);
    case NodeKind::Symbol:
      return Expr(n.sym->id == id ? 1.0 : 0.0);
    case NodeKind::Sum: {
      std::vector<Expr> terms;
      for (const auto& c : n.children) {
        Expr d = diff(c, id);
        if (!(d.is_constant() && d.constant_value() == 0.0))
          terms.push_back(std::move(d));
      }
      return sum(std::move(terms));
    }
    case NodeKind::Product: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        Expr d = diff(n.children[i], id);
        if (d.is_constant() && d.constant_value() == 0.0) continue;
        std::vector<Expr> factors;
        for (std::size_t j = 0; j < n.children.size(); ++j)
          if (j != i) factors.push_back(n.children[j]);
        if (!(d.is_constant() && d.constant_value() == 1.0))
          factors.push_back(std::move(d));
        terms.push_back(product(std::move(factors)));
      }
      return sum(std::move(terms));
    }
    case NodeKind::Power: {
      const Expr& base = n.children[0];
      const Expr& ex = n.children[1];
      bool base_dep = contains_symbol(base, id);
      bool ex_dep = contains_symbol(ex, id);
      if (!base_dep && !ex_dep) return Expr(0.0);
      if (!ex_dep) {
        // d/ds base^c = c * base^(c-1) * base'
        Expr d = diff(base, id);
        return product({ex, pow(base, ex - Expr(1.0)), std::move(d)});
      }
      // General case via b^e = exp(e*log(b)).
      Expr inner = diff(product({ex, log(base)}), id);
      return product({e, std::move(inner)});
    }
    case NodeKind::Func: {
      const Expr& arg = n.children[0];
      switch (n.tag) {
        case FuncTag::Min:
        case FuncTag::Max:
        case FuncTag::Abs:
          if (contains_symbol(e, id))
            throw NonSmooth(std::string(func_name(n.tag)) +
                            " is not differentiable");
          return Expr(0.0);
        case FuncTag::Exp:
          return product({e, diff(arg, id)});
        case FuncTag::Log:
          return product({pow(arg, Expr(-1.0)), diff(arg, id)});
        case FuncTag::Tanh:
          return product({Expr(1.0) - pow(tanh(arg), Expr(2.0)), diff(arg, id)});
        case FuncTag::Sqrt:
          return product({Expr(0.5), pow(arg, Expr(-0.5)), diff(arg, id)});
      }
      throw Error("unreachable func tag");
    }
  }
  throw Error("unreachable node kind");
}

}  // namespace

Expr differentiate(const Expr& e, const SymbolRef& s) {
  if (!is_variable(s))
    throw Error("differentiation target must be a variable: " + s->name);
  return diff(e, s->id);
}

Expr substitute(const Expr& e, const SubstMap& map) {
  const Node& n = e.node();
  if (n.kind == NodeKind::Symbol) {
    auto it = map.find(n.sym->id);
    return it == map.end() ? e : it->second;
  }
  if (n.children.empty()) return e;
  std::vector<Expr> children;
  children.reserve(n.children.size());
  bool changed = false;
  for (const auto& c : n.children) {
    Expr r = substitute(c, map);
    changed = changed || r.ptr() != c.ptr();
    children.push_back(std::move(r));
  }
  if (!changed) return e;
  switch (n.kind) {
    case NodeKind::Sum: return sum(std::move(children));
    case NodeKind::Product: return product(std::move(children));
    case NodeKind::Power: return pow(children[0], children[1]);
    case NodeKind::Func: return func(n.tag, std::move(children));
    default: return e;
  }
}

StageClass classify_stage(const Expr& e) {
  const Node& n = e.node();
  if (n.kind == NodeKind::Symbol) {
    if (n.sym->kind == SymbolKind::OperationalVariable ||
        (n.sym->kind == SymbolKind::Parameter && n.sym->indexed))
      return StageClass::SecondStage;
    return StageClass::FirstStage;
  }
  for (const auto& c : n.children)
    if (classify_stage(c) == StageClass::SecondStage)
      return StageClass::SecondStage;
  return StageClass::FirstStage;
}

bool contains_symbol(const Expr& e, std::uint64_t id) {
  const Node& n = e.node();
  if (n.kind == NodeKind::Symbol) return n.sym->id == id;
  for (const auto& c : n.children)
    if (contains_symbol(c, id)) return true;
  return false;
}

void collect_symbols(const Expr& e, std::map<std::uint64_t, SymbolRef>& out) {
  const Node& n = e.node();
  if (n.kind == NodeKind::Symbol) {
    out.emplace(n.sym->id, n.sym);
    return;
  }
  for (const auto& c : n.children) collect_symbols(c, out);
}

std::map<std::uint64_t, SymbolRef> collect_symbols(const Expr& e) {
  std::map<std::uint64_t, SymbolRef> out;
  collect_symbols(e, out);
  return out;
}

namespace {

// Affine decomposition e = a*s + b with a, b free of s.
struct AffineInS {
  Expr a, b;
};

AffineInS decompose(const Expr& e, std::uint64_t id) {
  const Node& n = e.node();
  if (!contains_symbol(e, id)) return {Expr(0.0), e};
  switch (n.kind) {
    case NodeKind::Symbol:
      return {Expr(1.0), Expr(0.0)};
    case NodeKind::Sum: {
      std::vector<Expr> as, bs;
      for (const auto& c : n.children) {
        AffineInS d = decompose(c, id);
        if (!(d.a.is_constant() && d.a.constant_value() == 0.0))
          as.push_back(std::move(d.a));
        if (!(d.b.is_constant() && d.b.constant_value() == 0.0))
          bs.push_back(std::move(d.b));
      }
      return {sum(std::move(as)), sum(std::move(bs))};
    }
    case NodeKind::Product: {
      std::vector<Expr> rest;
      std::optional<AffineInS> dep;
      for (const auto& c : n.children) {
        if (contains_symbol(c, id)) {
          if (dep) throw NotLinearInSymbol("product of terms containing symbol");
          dep = decompose(c, id);
        } else {
          rest.push_back(c);
        }
      }
      Expr r = product(std::move(rest));
      Expr a = dep->a.is_constant() && dep->a.constant_value() == 0.0
                   ? Expr(0.0)
                   : product({r, dep->a});
      Expr b = dep->b.is_constant() && dep->b.constant_value() == 0.0
                   ? Expr(0.0)
                   : product({r, dep->b});
      return {std::move(a), std::move(b)};
    }
    default:
      throw NotLinearInSymbol("nonlinear occurrence of symbol");
  }
}

}  // namespace

Expr solve_linear(const Expr& lhs, const Expr& rhs, const SymbolRef& s) {
  AffineInS l = decompose(lhs, s->id);
  AffineInS r = decompose(rhs, s->id);
  Expr coeff = l.a - r.a;
  if (coeff.is_constant() && coeff.constant_value() == 0.0)
    throw NotLinearInSymbol("coefficient of " + s->name + " vanishes");
  return (r.b - l.b) / coeff;
}

namespace {

struct ExprHashEq {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
  bool operator()(const Expr& a, const Expr& b) const { return equal(a, b); }
};

using ExprCount = std::unordered_map<Expr, std::size_t, ExprHashEq, ExprHashEq>;

std::size_t tree_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : e.node().children) n += tree_size(c);
  return n;
}

void count_subtrees(const Expr& e, ExprCount& counts) {
  const Node& n = e.node();
  if (n.kind == NodeKind::Constant || n.kind == NodeKind::Symbol) return;
  ++counts[e];
  for (const auto& c : n.children) count_subtrees(c, counts);
}

}  // namespace

CseResult eliminate_common_subexpressions(std::span<const Expr> es,
                                          std::string_view aux_prefix) {
  ExprCount counts;
  for (const auto& e : es) count_subtrees(e, counts);

  std::vector<Expr> shared;
  for (const auto& [e, c] : counts)
    if (c >= 2) shared.push_back(e);
  // Inner (smaller) subtrees first so later defs can reference earlier aux
  // symbols; ties broken by the canonical expression ordering.
  std::sort(shared.begin(), shared.end(), [](const Expr& a, const Expr& b) {
    std::size_t sa = tree_size(a), sb = tree_size(b);
    if (sa != sb) return sa < sb;
    return compare(a, b) < 0;
  });

  CseResult result;
  SubstMap rewrite_by_aux;  // unused; replacement is structural, see below
  std::vector<std::pair<Expr, Expr>> replacements;  // original subtree -> aux symbol

  auto rewrite = [&](const Expr& e, auto&& self) -> Expr {
    // Replace any recorded shared subtree (matched structurally) first.
    for (const auto& [orig, auxsym] : replacements)
      if (equal(e, orig)) return auxsym;
    const Node& n = e.node();
    if (n.children.empty()) return e;
    std::vector<Expr> children;
    children.reserve(n.children.size());
    bool changed = false;
    for (const auto& c : n.children) {
      Expr r = self(c, self);
      changed = changed || r.ptr() != c.ptr();
      children.push_back(std::move(r));
    }
    if (!changed) return e;
    switch (n.kind) {
      case NodeKind::Sum: return sum(std::move(children));
      case NodeKind::Product: return product(std::move(children));
      case NodeKind::Power: return pow(children[0], children[1]);
      case NodeKind::Func: return func(n.tag, std::move(children));
      default: return e;
    }
  };

  for (std::size_t i = 0; i < shared.size(); ++i) {
    Expr def = rewrite(shared[i], rewrite);  // express in terms of earlier defs
    SymbolRef aux = make_symbol(std::string(aux_prefix) + std::to_string(i),
                                SymbolKind::Parameter);
    result.defs.emplace_back(aux, std::move(def));
    replacements.emplace_back(shared[i], Expr(aux));
  }
  for (const auto& e : es) result.reduced.push_back(rewrite(e, rewrite));
  return result;
}

std::string format_shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

const Dialect& default_dialect() {
  static const Dialect d = [] {
    Dialect x;
    x.power_op = "**";
    for (FuncTag t : {FuncTag::Exp, FuncTag::Log, FuncTag::Tanh, FuncTag::Sqrt,
                      FuncTag::Min, FuncTag::Max, FuncTag::Abs})
      x.func_names[static_cast<int>(t)] = func_name(t);
    x.format_number = format_shortest;
    return x;
  }();
  return d;
}

namespace {

// Precedence levels: Sum 1, Product 2, Power 3, atoms 4.
int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Sum: return 1;
    case NodeKind::Product: return 2;
    case NodeKind::Power: return 3;
    default: return 4;
  }
}

void print_rec(const Expr& e, const Dialect& d, int min_prec, std::string& out);

void print_paren(const Expr& e, const Dialect& d, int min_prec,
                 std::string& out) {
  bool need = precedence(e.node()) < min_prec;
  if (need) out += '(';
  print_rec(e, d, need ? 0 : min_prec, out);
  if (need) out += ')';
}

// Splits off a leading negative constant factor; used to render "a - b".
bool is_negated_product(const Expr& e, Expr& positive) {
  const Node& n = e.node();
  if (n.kind != NodeKind::Product) return false;
  if (!n.children[0].is_constant()) return false;
  double c = n.children[0].constant_value();
  if (c >= 0.0) return false;
  std::vector<Expr> rest(n.children.begin() + 1, n.children.end());
  if (c != -1.0) rest.insert(rest.begin(), Expr(-c));
  positive = product(std::move(rest));
  return true;
}

void print_rec(const Expr& e, const Dialect& d, int min_prec,
               std::string& out) {
  (void)min_prec;
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant: {
      double v = n.value;
      if (v < 0.0) {
        out += '(';
        out += d.format_number(v);
        out += ')';
      } else {
        out += d.format_number(v);
      }
      return;
    }
    case NodeKind::Symbol:
      out += n.sym->name;
      return;
    case NodeKind::Sum: {
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Expr& c = n.children[i];
        Expr positive;
        if (i > 0 && is_negated_product(c, positive)) {
          out += " - ";
          print_paren(positive, d, 2, out);
        } else if (i > 0 && c.is_constant() && c.constant_value() < 0.0) {
          out += " - ";
          out += d.format_number(-c.constant_value());
        } else {
          if (i > 0) out += " + ";
          print_paren(c, d, 2, out);
        }
      }
      return;
    }
    case NodeKind::Product: {
      // Factors with an exact -1 exponent render as divisions.
      std::vector<Expr> num, den;
      for (const auto& c : n.children) {
        const Node& cn = c.node();
        if (cn.kind == NodeKind::Power && cn.children[1].is_constant() &&
            cn.children[1].constant_value() == -1.0) {
          den.push_back(cn.children[0]);
        } else {
          num.push_back(c);
        }
      }
      if (num.empty()) num.push_back(Expr(1.0));
      for (std::size_t i = 0; i < num.size(); ++i) {
        if (i > 0) out += "*";
        print_paren(num[i], d, 3, out);
      }
      for (const auto& c : den) {
        out += "/";
        print_paren(c, d, 4, out);
      }
      return;
    }
    case NodeKind::Power: {
      print_paren(n.children[0], d, 4, out);
      out += d.power_op;
      print_paren(n.children[1], d, 4, out);
      return;
    }
    case NodeKind::Func: {
      auto it = d.func_names.find(static_cast<int>(n.tag));
      if (it == d.func_names.end())
        throw UnsupportedTag(func_name(n.tag));
      out += it->second;
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i > 0) out += ", ";
        print_rec(n.children[i], d, 0, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e, const Dialect& d) {
  std::string out;
  print_rec(e, d, 0, out);
  return out;
}

namespace {

class Parser {
public:
  Parser(std::string_view text, const SymbolResolver& resolve)
      : text_(text), resolve_(resolve) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("trailing input at offset " + std::to_string(pos_));
    return e;
  }

private:
  std::string_view text_;
  const SymbolResolver& resolve_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool eat_power() {
    skip_ws();
    if (text_.substr(pos_).starts_with("**")) {
      pos_ += 2;
      return true;
    }
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '+') {
        ++pos_;
        e = e + parse_term();
      } else if (pos_ < text_.size() && text_[pos_] == '-') {
        ++pos_;
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      skip_ws();
      // '*' must not be the first char of '**'.
      if (pos_ < text_.size() && text_[pos_] == '*' &&
          !(pos_ + 1 < text_.size() && text_[pos_ + 1] == '*')) {
        ++pos_;
        e = e * parse_factor();
      } else if (pos_ < text_.size() && text_[pos_] == '/') {
        ++pos_;
        e = e / parse_factor();
      } else {
        return e;
      }
    }
  }

  Expr parse_factor() {
    if (eat('-')) return -parse_factor();
    Expr base = parse_atom();
    if (eat_power()) return pow(base, parse_factor());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!eat(')')) throw ParseError("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc())
      throw ParseError("bad number at offset " + std::to_string(pos_));
    pos_ = static_cast<std::size_t>(p - text_.data());
    return Expr(v);
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '%';
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    // Instance suffix "[...]" is part of the name.
    if (pos_ < text_.size() && text_[pos_] == '[') {
      while (pos_ < text_.size() && text_[pos_] != ']') ++pos_;
      if (pos_ == text_.size()) throw ParseError("unterminated '['");
      ++pos_;
    }
    std::string_view name = text_.substr(start, pos_ - start);

    static const std::unordered_map<std::string_view, FuncTag> kFuncs = {
        {"exp", FuncTag::Exp},   {"log", FuncTag::Log},
        {"tanh", FuncTag::Tanh}, {"sqrt", FuncTag::Sqrt},
        {"min", FuncTag::Min},   {"max", FuncTag::Max},
        {"abs", FuncTag::Abs}};
    auto fit = kFuncs.find(name);
    if (fit != kFuncs.end() && peek() == '(') {
      eat('(');
      std::vector<Expr> args;
      args.push_back(parse_sum());
      while (eat(',')) args.push_back(parse_sum());
      if (!eat(')')) throw ParseError("expected ')' after function arguments");
      return func(fit->second, std::move(args));
    }
    SymbolRef s = resolve_(name);
    if (!s) throw ParseError("unknown symbol: " + std::string(name));
    return Expr(s);
  }
};

}  // namespace

Expr parse_expr(std::string_view text, const SymbolResolver& resolve) {
  return Parser(text, resolve).parse();
}

}  // namespace enopt
