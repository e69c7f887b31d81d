// Benchmarks the OpenMP kernels against their serial reference
// implementations: bulk expression evaluation, scenario replication during
// flattening, and the k-means assignment step. Each kernel is checked for
// agreement before timing.

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <vector>

#include "enopt/algorithms.hpp"
#include "enopt/library.hpp"

using namespace enopt;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms) {
  std::cout << name << ": serial " << serial_ms << " ms, parallel "
            << parallel_ms << " ms, speedup "
            << (parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0) << "x\n";
}

void bench_evaluate_many() {
  SymbolRef x = make_symbol("bench.x", SymbolKind::OperationalVariable);
  SymbolRef y = make_symbol("bench.y", SymbolKind::OperationalVariable);
  Expr e(0.0);
  for (int i = 1; i <= 40; ++i)
    e = e + tanh(Expr(x) * Expr(0.1 * i) + Expr(y)) *
                pow(Expr(y) + Expr(2.0), Expr(0.5)) +
        Expr(x) / (Expr(y) + Expr(3.0 + i));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Bindings> bs(20000);
  for (auto& b : bs) {
    b.set(x, u(rng));
    b.set(y, u(rng));
  }

  auto t0 = Clock::now();
  auto serial = evaluate_many(e, bs, false);
  double ts = ms_since(t0);
  t0 = Clock::now();
  auto parallel = evaluate_many(e, bs, true);
  double tp = ms_since(t0);

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial.size(); ++i)
    max_diff = std::max(max_diff, std::abs(serial[i] - parallel[i]));
  if (max_diff > 0.0) {
    std::cerr << "evaluate_many mismatch: " << max_diff << "\n";
    std::exit(1);
  }
  report("evaluate_many (20k points)", ts, tp);
}

void bench_flatten() {
  // many-scenario conversion + storage system
  auto sys = std::make_shared<SystemModel>("S");
  ConversionSpec cv;
  cv.c_ref = 100.0;
  cv.m = 0.8;
  cv.eta = 0.9;
  cv.e_nom_hi = 10.0;
  sys->add_component(conversion_component("B", cv));
  StorageSpec st;
  st.cap_hi = 20.0;
  sys->add_component(storage_component("ST", st));
  SymbolRef dem = sys->make_parameter("dem", std::nullopt, true);
  sys->connect("heat", {"B.out", "ST.port"});
  sys->add_constraint("meet", Expr(sys->resolve_symbol("S.B.E_out")),
                      Relation::Ge, Expr(dem));

  ScenarioSet sc;
  TimeGrid grid;
  std::vector<std::string> labels;
  for (int t = 0; t < 24; ++t) labels.push_back("t" + std::to_string(t));
  for (int s = 0; s < 64; ++s) {
    std::string id = "s" + std::to_string(s);
    sc.entries.push_back({id, 1.0 / 64.0});
    grid.set_uniform(id, labels, 24.0);
  }
  auto p = create_problem(sys, Expr(0.0),
                          Expr(sys->resolve_symbol("S.B.E_in")), sc, grid);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 9.0);
  for (const auto& [id, w] : sc.entries)
    for (const auto& l : labels) p.set_data(dem, id, l, u(rng));

  FlatOptions serial_opt, parallel_opt;
  serial_opt.parallel = false;
  parallel_opt.parallel = true;

  auto t0 = Clock::now();
  FlatModel ms = flatten(p, serial_opt);
  double ts = ms_since(t0);
  t0 = Clock::now();
  FlatModel mp = flatten(p, parallel_opt);
  double tp = ms_since(t0);

  if (emit_expr_listing(ms) != emit_expr_listing(mp)) {
    std::cerr << "flatten mismatch between serial and parallel\n";
    std::exit(1);
  }
  report("flatten (64 scenarios x 24 steps)", ts, tp);
}

void bench_kmeans() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> pts(200000, std::vector<double>(4));
  for (auto& p : pts)
    for (double& v : p) v = n(rng);

  auto t0 = Clock::now();
  ClusterResult rs = kmeans_cluster(pts, 11, 5, 25, false, 0, false);
  double ts = ms_since(t0);
  t0 = Clock::now();
  ClusterResult rp = kmeans_cluster(pts, 11, 5, 25, false, 0, true);
  double tp = ms_since(t0);

  if (rs.centers != rp.centers || rs.assignment != rp.assignment) {
    std::cerr << "kmeans mismatch between serial and parallel\n";
    std::exit(1);
  }
  report("kmeans (200k x 4, k=11)", ts, tp);
}

}  // namespace

int main() {
  bench_evaluate_many();
  bench_flatten();
  bench_kmeans();
  return 0;
}
