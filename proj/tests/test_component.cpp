#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enopt/component.hpp"

using namespace enopt;

TEST_CASE("parameters carry qualified names and defaults") {
  ComponentModel b("B");
  auto eta = b.make_parameter("eta", 0.9);
  CHECK(eta->name == "B.eta");
  CHECK(b.default_data().at(eta->id) == 0.9);

  auto price = b.make_parameter("price");
  CHECK(b.default_data().count(price->id) == 0);

  CHECK_THROWS_AS(b.make_parameter("eta"), DuplicateName);
}

TEST_CASE("design variables") {
  ComponentModel c("HP");
  auto e_nom = c.make_design_variable("E_nom", 0.0, 400.0, VarDomain::Real, 100.0);
  CHECK(e_nom->kind == SymbolKind::DesignVariable);
  CHECK(*e_nom->hi == 400.0);

  auto build = c.make_design_variable("build", 0.0, 1.0, VarDomain::Binary, 0.0);
  CHECK(build->domain == VarDomain::Binary);

  CHECK_THROWS_AS(c.make_design_variable("bad", 5.0, 1.0), BadBounds);
}

TEST_CASE("operational variables") {
  ComponentModel c("B");
  auto q = c.make_operational_variable("Qdot_out", 0.0);
  CHECK(q->kind == SymbolKind::OperationalVariable);
  auto on = c.make_operational_variable("on", 0.0, 1.0, VarDomain::Binary);
  CHECK(on->domain == VarDomain::Binary);
  CHECK_THROWS_AS(c.make_operational_variable("on"), DuplicateName);
}

TEST_CASE("constraints classify stage automatically") {
  ComponentModel c("B");
  auto eta = c.make_parameter("eta", 0.9);
  auto e_in = c.make_operational_variable("E_in", 0.0);
  auto e_out = c.make_operational_variable("E_out", 0.0);
  auto e_nom = c.make_design_variable("E_nom", 0.0, 400.0);
  auto c_i = c.make_design_variable("C_I", 0.0, 1e6);

  const auto& io =
      c.add_constraint("io", Expr(e_out), Relation::Eq, Expr(eta) * Expr(e_in));
  CHECK(io.stage == StageClass::SecondStage);

  const auto& inv = c.add_constraint("inv", Expr(c_i), Relation::Eq,
                                     Expr(100.0) * pow(Expr(e_nom), Expr(0.8)));
  CHECK(inv.stage == StageClass::FirstStage);

  auto b = c.make_design_variable("b", 0.0, 1.0, VarDomain::Binary);
  const auto& cap = c.add_constraint("cap", Expr(e_out), Relation::Le,
                                     Expr(b) * Expr(400.0));
  CHECK(cap.stage == StageClass::SecondStage);

  CHECK_THROWS_AS(c.add_constraint("io", Expr(e_out), Relation::Eq, Expr(0.0)),
                  DuplicateName);
}

TEST_CASE("stored expressions") {
  ComponentModel c("B");
  auto e_nom = c.make_design_variable("E_nom", 0.0, 400.0);
  c.add_expression("investment_costs", Expr(100.0) * pow(Expr(e_nom), Expr(0.8)));
  CHECK(c.has_expression("investment_costs"));
  CHECK_THROWS_AS(c.get_expression("nope"), UnknownId);
  CHECK_THROWS_AS(
      c.add_expression("investment_costs", Expr(0.0)), DuplicateName);
}

TEST_CASE("declare_state creates derivative and equality") {
  ComponentModel tes("TES");
  auto e_in = tes.make_operational_variable("E_in", 0.0);
  auto e_out = tes.make_operational_variable("E_out", 0.0);
  auto e = tes.make_operational_variable("E", 0.0, 100.0);
  Expr rhs = Expr(0.9) * Expr(e_in) - Expr(e_out) / Expr(0.95) - Expr(e) / Expr(50.0);
  const auto& sd = tes.declare_state(e, rhs, 0.0);
  CHECK(sd.derivative->name == "TES.E_dot");
  CHECK(sd.initial->kind == SymbolKind::Parameter);
  CHECK(tes.default_data().at(sd.initial->id) == 0.0);

  // Exactly one equality derivative = rhs exists.
  int count = 0;
  for (const auto& con : tes.constraints())
    if (con.rel == Relation::Eq && equal(con.lhs, Expr(sd.derivative)) &&
        equal(con.rhs, rhs))
      ++count;
  CHECK(count == 1);

  CHECK_THROWS_AS(tes.declare_state(e, rhs, 0.0), AlreadyState);

  ComponentModel other("X");
  auto foreign = other.make_operational_variable("y");
  CHECK_THROWS_AS(tes.declare_state(foreign, rhs, 0.0), ForeignSymbol);
}

TEST_CASE("make_state equals the two-call sequence structurally") {
  ComponentModel a("A");
  auto in_a = a.make_operational_variable("in", 0.0);
  const auto& sa = a.make_state("E", Expr(in_a), 1.0, 0.0, 10.0);

  ComponentModel b("A2");
  auto in_b = b.make_operational_variable("in", 0.0);
  auto eb = b.make_operational_variable("E", 0.0, 10.0);
  const auto& sb = b.declare_state(eb, Expr(in_b), 1.0);

  CHECK(sa.state->lo == sb.state->lo);
  CHECK(sa.state->hi == sb.state->hi);
  CHECK(a.constraints().size() == b.constraints().size());
  for (std::size_t i = 0; i < a.constraints().size(); ++i) {
    CHECK(a.constraints()[i].rel == b.constraints()[i].rel);
  }
}

TEST_CASE("connectors and polarity constraints") {
  ComponentModel c("B");
  auto e_out = c.make_operational_variable("E_out", 0.0);
  std::size_t before = c.constraints().size();
  c.add_connector("out", -Expr(e_out), Polarity::Output);
  REQUIRE(c.constraints().size() == before + 1);
  const auto& pc = c.constraints().back();
  CHECK(pc.rel == Relation::Le);
  CHECK(pc.auto_generated);

  c.add_connector("charge", Expr(e_out), Polarity::Bidirectional);
  CHECK(c.constraints().size() == before + 1);  // no sign constraint

  CHECK_THROWS_AS(c.add_connector("out", Expr(e_out), Polarity::Input),
                  DuplicateName);
}

TEST_CASE("no orphan symbols: every symbol carries the component prefix") {
  ComponentModel c("CHP");
  c.make_parameter("p", 1.0);
  c.make_design_variable("x");
  c.make_operational_variable("y");
  c.make_state("E", Expr(c.find_symbol("CHP.y")), 0.0);
  for (const auto* v :
       {&c.parameters(), &c.design_vars(), &c.operational_vars()})
    for (const auto& s : *v) CHECK(s->name.rfind("CHP.", 0) == 0);
}

TEST_CASE("frozen components reject mutation") {
  ComponentModel c("B");
  c.make_parameter("p");
  c.freeze();
  CHECK_THROWS_AS(c.make_parameter("q"), FrozenModel);
}
