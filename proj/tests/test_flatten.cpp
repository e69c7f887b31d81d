#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "enopt/flatten.hpp"

using namespace enopt;

namespace {

struct Toy {
  SystemPtr sys;
  SymbolRef d, x, price;
};

// 1 design var, 1 op var, 1 second-stage capacity constraint.
Toy make_toy() {
  auto c = std::make_shared<ComponentModel>("C");
  Toy t;
  t.d = c->make_design_variable("size", 0.0, 10.0);
  t.x = c->make_operational_variable("x", 0.0, 10.0);
  t.price = c->make_parameter("price", std::nullopt, /*indexed=*/true);
  c->add_constraint("cap", Expr(t.x), Relation::Le, Expr(t.d));
  t.sys = std::make_shared<SystemModel>("S");
  t.sys->add_component(c);
  return t;
}

ProblemSpec make_toy_problem(Toy& t) {
  ScenarioSet sc{{{"s1", 0.5}, {"s2", 0.5}}};
  TimeGrid g;
  g.set_uniform("s1", {"t1", "t2", "t3"}, 3.0);
  g.set_uniform("s2", {"t1", "t2", "t3"}, 3.0);
  auto p = create_problem(t.sys, Expr(t.d), Expr(t.price) * Expr(t.x), sc, g);
  p.set_data(t.price, "s1", 2.0);
  p.set_data(t.price, "s2", 4.0);
  return p;
}

}  // namespace

TEST_CASE("toy flattens to 7 variables and 6 replicated constraints") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);
  CHECK(m.variables.size() == 7);
  CHECK(m.constraints.size() == 6);
  CHECK(m.variables[0].name == "S.C.size");
  CHECK(m.variables[1].name == "S.C.x[s1,t1]");
  CHECK(m.constraints[0].name == "S.C.cap[s1,t1]");
  for (const auto& row : m.constraints) CHECK(row.linear);
  CHECK(m.linear());
}

TEST_CASE("parameter data lands in the replicated rows and objective") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);
  // objective: size + sum over (s,t) of w * delta * price * x
  // s1: 0.5 * 1.0 * 2.0 = 1.0 per point, s2: 0.5 * 1.0 * 4.0 = 2.0
  std::map<std::uint64_t, double> coefs;
  double c0 = 0.0;
  REQUIRE(affine_decompose(m.objective, coefs, c0));
  CHECK(c0 == 0.0);
  CHECK(coefs.at(m.variables[0].sym->id) == 1.0);
  CHECK(coefs.at(m.find_variable("S.C.x[s1,t2]")->sym->id) ==
        doctest::Approx(1.0));
  CHECK(coefs.at(m.find_variable("S.C.x[s2,t3]")->sym->id) ==
        doctest::Approx(2.0));
}

TEST_CASE("zero-weight scenario constrains but never reaches the objective") {
  Toy t = make_toy();
  ScenarioSet sc{{{"s1", 1.0}, {"peak", 0.0}}};
  TimeGrid g;
  g.set_uniform("s1", {"t1"}, 1.0);
  g.set("peak", {{"p", 1.0}});
  auto p = create_problem(t.sys, Expr(t.d), Expr(t.price) * Expr(t.x), sc, g);
  p.set_data(t.price, 3.0);
  FlatModel m = flatten(p);

  const FlatVariable* peak_x = m.find_variable("S.C.x[peak,p]");
  REQUIRE(peak_x != nullptr);
  CHECK(!contains_symbol(m.objective, peak_x->sym->id));
  bool peak_row = false;
  for (const auto& row : m.constraints)
    if (row.scenario == "peak") peak_row = true;
  CHECK(peak_row);
}

TEST_CASE("scenario separability: no row mixes two scenarios") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);
  std::map<std::uint64_t, std::string> scenario_of;
  for (const auto& inst : m.instances)
    scenario_of[m.find_variable(inst.name)->sym->id] = inst.scenario;
  for (const auto& row : m.constraints) {
    std::set<std::string> seen;
    for (const auto& [id, sym] : collect_symbols(row.lhs - row.rhs)) {
      auto it = scenario_of.find(id);
      if (it != scenario_of.end() && !it->second.empty())
        seen.insert(it->second);
    }
    CHECK(seen.size() <= 1);
    if (!seen.empty()) CHECK(*seen.begin() == row.scenario);
  }
}

TEST_CASE("flatten is pure and parallel matches serial") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatOptions ser;
  ser.parallel = false;
  std::string a = emit_canonical_lp(flatten(p));
  std::string b = emit_canonical_lp(flatten(p));
  std::string c = emit_canonical_lp(flatten(p, ser));
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("canonical lp round-trips byte-identically") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);
  std::string text = emit_canonical_lp(m);
  FlatModel back = parse_canonical_lp(text);
  CHECK(emit_canonical_lp(back) == text);
  CHECK(back.variables.size() == m.variables.size());
  CHECK(back.constraints.size() == m.constraints.size());
}

TEST_CASE("canonical lp parser rejects malformed documents") {
  CHECK_THROWS_AS(parse_canonical_lp("minimize\n obj: + 1 x\n"),
                  MalformedLine);  // no end
  CHECK_THROWS_AS(parse_canonical_lp("garbage\nend\n"), MalformedLine);
  CHECK_THROWS_AS(
      parse_canonical_lp("minimize\n obj: + 1 zz\nsubject to\nbounds\nend\n"),
      UnknownVariable);
}

TEST_CASE("nonlinear models refuse canonical lp but emit expression listings") {
  auto c = std::make_shared<ComponentModel>("C");
  auto d = c->make_design_variable("size", 0.0, 10.0);
  auto ci = c->make_design_variable("C_I", 0.0, 1e4);
  c->add_constraint("inv", Expr(ci), Relation::Eq,
                    Expr(100.0) * pow(Expr(d), Expr(0.8)));
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s", 1.0}}};
  TimeGrid g;
  g.set_uniform("s", {"t"}, 1.0);
  auto p = create_problem(sys, Expr(ci), Expr(0.0), sc, g);
  FlatModel m = flatten(p);
  CHECK(!m.linear());
  CHECK_THROWS_AS(emit_canonical_lp(m), NonlinearModel);
  std::string listing = emit_expr_listing(m);
  CHECK(listing.find("S.C.inv:") != std::string::npos);
  CHECK(listing.find("**") != std::string::npos);
  CHECK(emit_expr_listing(m) == listing);  // deterministic
}

TEST_CASE("targeted linearization turns the investment curve linear") {
  auto c = std::make_shared<ComponentModel>("C");
  auto d = c->make_design_variable("size", 0.0, 2.0);
  auto ci = c->make_design_variable("C_I", 0.0, 1e4);
  c->add_constraint("inv", Expr(ci), Relation::Eq,
                    Expr(100.0) * pow(Expr(d), Expr(0.8)));
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s", 1.0}}};
  TimeGrid g;
  g.set_uniform("s", {"t"}, 1.0);
  auto p = create_problem(sys, Expr(ci), Expr(0.0), sc, g);

  FlatOptions opt;
  opt.linearize.targets.push_back(
      {"S.C.inv", {{"S.C.size", {0.0, 0.5, 1.0, 1.5, 2.0}}}});
  FlatModel m = flatten(p, opt);
  CHECK(m.linear());
  std::string lp = emit_canonical_lp(m);
  CHECK(lp.find("lin.S.C.inv.y") != std::string::npos);
  // Surrogate bounds span the sampled cost values.
  const FlatVariable* y = m.find_variable("lin.S.C.inv.y");
  REQUIRE(y != nullptr);
  // values of -100*size^0.8 over the grid: [-174.11, 0]
  CHECK(y->lo == doctest::Approx(-100.0 * std::pow(2.0, 0.8)));
  CHECK(y->hi == 0.0);

  // Wrong grid dimension: the target stays nonlinear.
  FlatOptions bad;
  bad.linearize.targets.push_back(
      {"S.C.inv", {{"S.C.C_I", {0.0, 1e4}}}});
  CHECK_THROWS_AS(flatten(p, bad), NonlinearAfterLinearize);

  FlatOptions missing;
  missing.linearize.targets.push_back({"S.C.nope", {{"S.C.size", {0.0, 1.0}}}});
  CHECK_THROWS_AS(flatten(p, missing), UnknownId);
}

TEST_CASE("discretize adds one state link per (state, scenario, point)") {
  auto c = std::make_shared<ComponentModel>("TES");
  auto in = c->make_operational_variable("in", 0.0, 5.0);
  auto e = c->make_operational_variable("E", 0.0, 100.0);
  c->declare_state(e, Expr(in), 0.0);
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s1", 1.0}, {"s2", 1.0}}};
  TimeGrid g;
  g.set_uniform("s1", {"t1", "t2"}, 2.0);
  g.set_uniform("s2", {"t1", "t2"}, 2.0);
  auto p = create_problem(sys, Expr(0.0), Expr(0.0), sc, g);

  FlatModel with = flatten(p);
  FlatOptions nod;
  nod.discretize = false;
  FlatModel without = flatten(p, nod);
  CHECK(with.constraints.size() == without.constraints.size() + 4);
  int links = 0;
  for (const auto& row : with.constraints)
    if (row.name.find("#link") != std::string::npos) {
      ++links;
      CHECK(!row.scenario.empty());
    }
  CHECK(links == 4);
}

TEST_CASE("flat objective matches direct evaluation at a fixed point") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);

  std::map<std::string, double> point;
  point["S.C.size"] = 7.0;
  double direct = 7.0;  // design objective
  for (const auto& [sid, w] : p.scenarios().entries)
    for (const auto& [tp, delta] : p.grid().points(sid)) {
      double x = 3.0;
      point["S.C.x[" + sid + "," + tp + "]"] = x;
      double price = sid == "s1" ? 2.0 : 4.0;
      direct += w * delta * price * x;
    }
  CHECK(std::abs(evaluate_objective(m, point) - direct) <= 1e-10);
}

TEST_CASE("solution files round-trip and write back") {
  Toy t = make_toy();
  auto p = make_toy_problem(t);
  FlatModel m = flatten(p);

  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.objective = 4.5;
  for (const auto& v : m.variables) sol.values[v.name] = 1.25;
  std::string text = write_solution(m, sol);

  std::istringstream in(text);
  Solution back = parse_solution(m, in);
  CHECK(back.status == SolveStatus::Optimal);
  CHECK(back.objective == 4.5);
  for (const auto& v : m.variables)
    CHECK(back.values.at(v.name) == 1.25);

  write_back(p, m, back);
  CHECK(*p.get_design(t.d) == 1.25);
  CHECK(*p.get_operation(t.x, "s2", "t3") == 1.25);

  // missing instance
  std::istringstream partial("S.C.size 1\n");
  CHECK_THROWS_AS(parse_solution(m, partial), MalformedLine);
  std::istringstream unknown("who 1\n");
  CHECK_THROWS_AS(parse_solution(m, unknown), UnknownVariable);
}

TEST_CASE("flatten refuses invalid problems") {
  Toy t = make_toy();
  ScenarioSet sc{{{"s1", 1.0}}};
  TimeGrid g;
  g.set_uniform("s1", {"t1"}, 1.0);
  auto p = create_problem(t.sys, Expr(t.d), Expr(t.price) * Expr(t.x), sc, g);
  // price has no data
  CHECK_THROWS_AS(flatten(p), ValidationFailed);
}

TEST_CASE("unbounded variables default to +/-1e9 in the flat model") {
  auto c = std::make_shared<ComponentModel>("C");
  c->make_operational_variable("free");
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s", 1.0}}};
  TimeGrid g;
  g.set_uniform("s", {"t"}, 1.0);
  auto p = create_problem(sys, Expr(0.0), Expr(0.0), sc, g);
  FlatModel m = flatten(p);
  REQUIRE(m.variables.size() == 1);
  CHECK(m.variables[0].lo == -1e9);
  CHECK(m.variables[0].hi == 1e9);
}
