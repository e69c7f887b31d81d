#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enopt/algorithms.hpp"

using namespace enopt;

namespace {

// Single design variable x in [0,1], trivial scenario structure.
struct Line {
  SystemPtr sys;
  SymbolRef x;
  ProblemSpec problem() {
    ScenarioSet sc{{{"s", 1.0}}};
    TimeGrid g;
    g.set_uniform("s", {"t"}, 1.0);
    return create_problem(sys, Expr(0.0), Expr(0.0), sc, g);
  }
};

Line make_line() {
  auto c = std::make_shared<ComponentModel>("C");
  Line l;
  l.x = c->make_design_variable("x", 0.0, 1.0);
  l.sys = std::make_shared<SystemModel>("S");
  l.sys->add_component(c);
  return l;
}

}  // namespace

TEST_CASE("toy bi-objective: analytic frontier endpoints plus midpoint") {
  Line l = make_line();
  auto p = l.problem();
  auto front = epsilon_constraint_pareto(p, Expr(l.x), Expr(1.0) - Expr(l.x), 3);
  REQUIRE(front.size() == 3);
  // ordered by eps over obj_b: (1,0), (0.5,0.5), (0,1)
  CHECK(front[0].objective_a == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(front[0].objective_b == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(front[1].objective_a == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(front[2].objective_a == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(front[2].objective_b == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(front[0].design.at("S.C.x") == doctest::Approx(1.0));
}

TEST_CASE("n_points = 2 returns exactly the two lexicographic optima") {
  Line l = make_line();
  auto p = l.problem();
  auto front = epsilon_constraint_pareto(p, Expr(l.x), Expr(1.0) - Expr(l.x), 2);
  REQUIRE(front.size() == 2);
  CHECK(front[0].objective_a == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(front[1].objective_a == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("degenerate equal objectives collapse to one point") {
  Line l = make_line();
  auto p = l.problem();
  auto front = epsilon_constraint_pareto(p, Expr(l.x), Expr(l.x), 4);
  CHECK(front.size() == 1);
  CHECK(front[0].objective_a == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("frontier is mutually non-dominated and monotone") {
  // two design vars with a coupling budget: a = x, b = 2 - x - y with y <= x
  auto c = std::make_shared<ComponentModel>("C");
  auto x = c->make_design_variable("x", 0.0, 1.0);
  auto y = c->make_design_variable("y", 0.0, 1.0);
  c->add_constraint("couple", Expr(y), Relation::Le, Expr(x));
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s", 1.0}}};
  TimeGrid g;
  g.set_uniform("s", {"t"}, 1.0);
  auto p = create_problem(sys, Expr(0.0), Expr(0.0), sc, g);

  auto front = epsilon_constraint_pareto(
      p, Expr(x), Expr(2.0) - Expr(x) - Expr(y), 6);
  REQUIRE(front.size() >= 2);
  for (std::size_t i = 0; i < front.size(); ++i)
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (i == j) continue;
      bool dominates = front[j].objective_a <= front[i].objective_a + 1e-9 &&
                       front[j].objective_b <= front[i].objective_b + 1e-9 &&
                       (front[j].objective_a < front[i].objective_a - 1e-9 ||
                        front[j].objective_b < front[i].objective_b - 1e-9);
      CHECK(!dominates);
    }
  for (std::size_t i = 1; i < front.size(); ++i) {
    CHECK(front[i].objective_a <= front[i - 1].objective_a + 1e-9);
    CHECK(front[i].objective_b >= front[i - 1].objective_b - 1e-9);
  }

  std::string csv = pareto_csv(front);
  CHECK(csv.rfind("objective_a,objective_b,S.C.x,S.C.y", 0) == 0);
}

TEST_CASE("pareto rejects n_points < 2") {
  Line l = make_line();
  auto p = l.problem();
  CHECK_THROWS_AS(epsilon_constraint_pareto(p, Expr(l.x), -Expr(l.x), 1),
                  BadParams);
}

TEST_CASE("kmeans symmetric pair: centers 0 and 10, weights one half") {
  std::vector<std::vector<double>> pts = {{0.0}, {0.0}, {10.0}, {10.0}};
  ClusterResult r = kmeans_cluster(pts, 2, 42);
  REQUIRE(r.centers.size() == 2);
  std::vector<double> cs = {r.centers[0][0], r.centers[1][0]};
  std::sort(cs.begin(), cs.end());
  CHECK(cs[0] == 0.0);
  CHECK(cs[1] == 10.0);
  CHECK(r.weights[0] == 0.5);
  CHECK(r.weights[1] == 0.5);
  CHECK(r.sse == 0.0);
}

TEST_CASE("k equal to number of distinct points gives zero SSE") {
  std::vector<std::vector<double>> pts = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 0.0}};
  ClusterResult r = kmeans_cluster(pts, 3, 1);
  CHECK(r.sse == 0.0);
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  CHECK(std::abs(wsum - 1.0) <= 1e-12);
}

TEST_CASE("kmeans invariants on synthetic 2-D demand/temperature data") {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 40; ++i) {
    double t = static_cast<double>(i % 20);
    pts.push_back({5.0 + t, 100.0 - 3.0 * t + (i % 3)});
  }
  ClusterResult r = kmeans_cluster(pts, 3, 7);

  // weights sum to one
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  CHECK(std::abs(wsum - 1.0) <= 1e-12);

  // SSE monotone per Lloyd step
  for (std::size_t i = 1; i < r.sse_trace.size(); ++i)
    CHECK(r.sse_trace[i] <= r.sse_trace[i - 1] + 1e-12);

  // SSE matches an independent recomputation at the returned centers
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = 1e300;
    for (const auto& c : r.centers) {
      double d0 = pts[i][0] - c[0], d1 = pts[i][1] - c[1];
      best = std::min(best, d0 * d0 + d1 * d1);
    }
    sse += best;
  }
  CHECK(r.sse == doctest::Approx(sse).epsilon(1e-12));

  // deterministic, and parallel assignment matches the serial reference
  ClusterResult r2 = kmeans_cluster(pts, 3, 7);
  ClusterResult r3 = kmeans_cluster(pts, 3, 7, 100, false, 0, false);
  CHECK(r.centers == r2.centers);
  CHECK(r.centers == r3.centers);
  CHECK(r.assignment == r3.assignment);

  std::string csv = cluster_csv(r);
  CHECK(csv.rfind("feature0,feature1,weight", 0) == 0);
}

TEST_CASE("kmeans keep_max pins the maximum-demand point") {
  std::vector<std::vector<double>> pts = {{1.0}, {2.0}, {3.0}, {50.0}};
  ClusterResult r = kmeans_cluster(pts, 2, 0, 100, /*keep_max=*/true);
  CHECK(r.centers[0][0] == 50.0);
}

TEST_CASE("kmeans rejects bad k") {
  std::vector<std::vector<double>> pts = {{0.0}, {0.0}, {1.0}};
  CHECK_THROWS_AS(kmeans_cluster(pts, 0, 0), BadK);
  CHECK_THROWS_AS(kmeans_cluster(pts, 3, 0), BadK);  // only 2 distinct
}

TEST_CASE("fix_and_correct pins binaries and installs the initial point") {
  auto c = std::make_shared<ComponentModel>("C");
  auto build = c->make_design_variable("build", 0.0, 1.0, VarDomain::Binary);
  auto size = c->make_design_variable("size", 0.0, 10.0);
  auto out = c->make_operational_variable("out", 0.0, 10.0);
  c->add_constraint("cap", Expr(size), Relation::Le, Expr(10.0) * Expr(build));
  c->add_constraint("use", Expr(out), Relation::Le, Expr(size));
  c->add_constraint("min_out", Expr(out), Relation::Ge, Expr(3.0));
  auto sys = std::make_shared<SystemModel>("S");
  sys->add_component(c);
  ScenarioSet sc{{{"s", 1.0}}};
  TimeGrid g;
  g.set_uniform("s", {"t"}, 1.0);
  auto p = create_problem(sys, Expr(5.0) * Expr(build) + Expr(size), Expr(out),
                          sc, g);

  FlatModel m = flatten(p);
  Solution sol = solve_milp(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.values.at("S.C.build") == 1.0);

  FlatModel fixed = fix_and_correct(p, m, sol);
  const FlatVariable* b = fixed.find_variable("S.C.build");
  REQUIRE(b != nullptr);
  CHECK(b->lo == 1.0);
  CHECK(b->hi == 1.0);
  CHECK(*p.get_design(build) == 1.0);
  CHECK(*p.get_operation(out, "s", "t") == doctest::Approx(3.0));

  // the pinned model is feasible at the MILP point
  CHECK(check_feasibility(fixed, sol.values).pass(1e-8));

  // missing binary value
  Solution hollow = sol;
  hollow.values.erase("S.C.build");
  CHECK_THROWS_AS(fix_and_correct(p, m, hollow), MissingBinaryValue);

  CHECK_THROWS_AS(pin_binary(m, "S.C.size", 1.0), BadParams);
  CHECK_THROWS_AS(pin_binary(m, "S.C.nope", 1.0), UnknownVariable);
  FlatModel pinned = pin_binary(m, "S.C.build", 0.0);
  CHECK(pinned.find_variable("S.C.build")->hi == 0.0);
}
