#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enopt/system.hpp"

using namespace enopt;

namespace {

ComponentPtr make_unit(const std::string& label) {
  auto c = std::make_shared<ComponentModel>(label);
  auto out = c->make_operational_variable("flow", -100.0, 100.0);
  c->add_connector("port", Expr(out), Polarity::Bidirectional);
  return c;
}

}  // namespace

TEST_CASE("connect creates one balance constraint per connection") {
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(make_unit("A"));
  sys->add_component(make_unit("B"));
  sys->add_component(make_unit("C"));
  std::size_t before = sys->constraints().size();
  const auto& bal = sys->connect("heat", {"A.port", "B.port", "C.port"});
  CHECK(sys->constraints().size() == before + 1);
  CHECK(bal.rel == Relation::Eq);
  CHECK(bal.auto_generated);

  // Sum of the three connector expressions equals zero.
  Bindings b;
  b.set(sys->resolve_symbol("S.A.flow"), 2.0);
  b.set(sys->resolve_symbol("S.B.flow"), -1.5);
  b.set(sys->resolve_symbol("S.C.flow"), -0.5);
  CHECK(evaluate(bal.lhs, b) == doctest::Approx(0.0));

  CHECK(sys->connections().size() == 1);
  CHECK_THROWS_AS(sys->connect("again", {"A.port"}), AlreadyConnected);
  CHECK_THROWS_AS(sys->connect("bad", {"Z.port"}), UnknownConnector);
}

TEST_CASE("single-connector connection forces the quantity to zero") {
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(make_unit("A"));
  const auto& bal = sys->connect("solo", {"A.port"});
  Bindings b;
  b.set(sys->resolve_symbol("S.A.flow"), 3.0);
  CHECK(evaluate(bal.lhs, b) == 3.0);
  CHECK(bal.rel == Relation::Eq);
}

TEST_CASE("nested subsystems chain name prefixes") {
  auto hp = std::make_shared<ComponentModel>("HP");
  hp->make_operational_variable("Qdot", 0.0);
  auto link = std::make_shared<SystemModel>("L");
  link->add_component(hp);
  CHECK(hp->find_symbol("L.HP.Qdot") != nullptr);

  auto cg = std::make_shared<SystemModel>("CG40");
  cg->add_component(link);
  CHECK(hp->find_symbol("CG40.L.HP.Qdot") != nullptr);
  CHECK(cg->resolve_symbol("CG40.L.HP.Qdot") != nullptr);
}

TEST_CASE("expose_connector makes member connectors addressable") {
  auto unit = make_unit("HP");
  auto link = std::make_shared<SystemModel>("L");
  link->add_component(unit);
  link->expose_connector("HP.port", "heat_out");

  auto top = std::make_shared<SystemModel>("T");
  top->add_component(link);
  top->add_component(make_unit("DEM"));
  const auto& bal = top->connect("heat", {"L.heat_out", "DEM.port"});
  Bindings b;
  b.set(top->resolve_symbol("T.L.HP.flow"), 5.0);
  b.set(top->resolve_symbol("T.DEM.flow"), -5.0);
  CHECK(evaluate(bal.lhs, b) == 0.0);

  CHECK_THROWS_AS(link->expose_connector("HP.port", "heat_out"), DuplicateName);
}

TEST_CASE("exposing an already-connected connector fails") {
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(make_unit("A"));
  sys->connect("bus", {"A.port"});
  CHECK_THROWS_AS(sys->expose_connector("A.port", "x"), AlreadyConnected);
}

TEST_CASE("aggregate_component_expressions sums recursively") {
  auto a = std::make_shared<ComponentModel>("A");
  a->add_expression("investment_costs", Expr(3.0));
  auto b = std::make_shared<ComponentModel>("B");
  b->add_expression("investment_costs", Expr(5.0));
  auto sub = std::make_shared<SystemModel>("Sub");
  sub->add_component(b);
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(a);
  sys->add_component(sub);

  Expr agg = sys->aggregate_component_expressions("investment_costs");
  CHECK(evaluate(agg, {}) == 8.0);

  Expr none = sys->aggregate_component_expressions("absent");
  CHECK(none.is_constant());
  CHECK(none.constant_value() == 0.0);
}

TEST_CASE("aggregation is linear in member evaluations") {
  auto a = std::make_shared<ComponentModel>("A");
  auto xa = a->make_operational_variable("x");
  a->add_expression("cost", Expr(2.0) * Expr(xa));
  auto b = std::make_shared<ComponentModel>("B");
  auto xb = b->make_operational_variable("x");
  b->add_expression("cost", Expr(3.0) * Expr(xb) + Expr(1.0));
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(a);
  sys->add_component(b);
  Expr agg = sys->aggregate_component_expressions("cost");
  Bindings bind = {{xa, 1.5}, {xb, -2.0}};
  CHECK(evaluate(agg, bind) ==
        evaluate(a->get_expression("cost"), bind) +
            evaluate(b->get_expression("cost"), bind));
}

TEST_CASE("freeze_all enforces global name uniqueness") {
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(make_unit("A"));
  sys->add_component(make_unit("B"));
  sys->freeze_all();
  CHECK(sys->frozen());
  CHECK_THROWS_AS(sys->connect("bus", {"A.port"}), FrozenModel);
}

TEST_CASE("serialization round-trips byte-identically") {
  auto conv = std::make_shared<ComponentModel>("B");
  auto eta = conv->make_parameter("eta", 0.9);
  auto e_in = conv->make_operational_variable("E_in", 0.0, 1000.0);
  auto e_out = conv->make_operational_variable("E_out", 0.0, 1000.0);
  auto e_nom = conv->make_design_variable("E_nom", 0.0, 400.0, VarDomain::Real, 100.0);
  conv->add_constraint("io", Expr(e_out), Relation::Eq, Expr(eta) * Expr(e_in));
  conv->add_constraint("cap", Expr(e_out), Relation::Le, Expr(e_nom));
  conv->add_expression("investment_costs",
                       Expr(100.0) * pow(Expr(e_nom), Expr(0.8)));
  conv->add_connector("out", -Expr(e_out), Polarity::Output);
  conv->add_connector("in", Expr(e_in), Polarity::Input);

  auto tes = std::make_shared<ComponentModel>("TES");
  auto c_in = tes->make_operational_variable("in", 0.0, 100.0);
  auto c_out = tes->make_operational_variable("out", 0.0, 100.0);
  tes->make_state("E", Expr(0.95) * Expr(c_in) - Expr(c_out), 0.0, 0.0, 200.0);
  tes->add_connector("port", Expr(c_out) - Expr(c_in), Polarity::Bidirectional);

  auto dem = std::make_shared<ComponentModel>("DEM");
  auto load = dem->make_parameter("load", 50.0, /*indexed=*/true);
  dem->add_connector("in", -Expr(load), Polarity::Bidirectional);

  auto sys = std::make_shared<SystemModel>("IES");
  sys->add_component(conv);
  sys->add_component(tes);
  sys->add_component(dem);
  sys->connect("heat", {"B.out", "TES.port", "DEM.in"});

  std::string text = serialize_system(*sys);
  SystemPtr back = parse_system(text);
  std::string text2 = serialize_system(*back);
  CHECK(text == text2);

  // The reparsed system has the same constraint count and balance structure.
  CHECK(back->all_constraints().size() == sys->all_constraints().size());
  CHECK(back->connections().size() == 1);
}

TEST_CASE("nested system serialization round-trips") {
  auto hp = make_unit("HP");
  auto link = std::make_shared<SystemModel>("L");
  link->add_component(hp);
  link->expose_connector("HP.port", "heat");
  auto top = std::make_shared<SystemModel>("T");
  top->add_component(link);
  top->add_component(make_unit("DEM"));
  top->connect("bus", {"L.heat", "DEM.port"});

  std::string text = serialize_system(*top);
  std::string text2 = serialize_system(*parse_system(text));
  CHECK(text == text2);
}
