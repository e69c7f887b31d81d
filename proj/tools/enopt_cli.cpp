// enopt command-line front end. One subcommand per workflow stage:
//   build    write the system description of a bundled model
//   flatten  deterministic equivalent, canonical LP or expression listing
//   solve    flatten and solve with the built-in LP/MILP solvers
//   pareto   bi-objective epsilon-constraint sweep
//   cluster  k-means scenario aggregation of a numeric CSV
//   check    feasibility of a solution file against the (nonlinear) model
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible, 1 internal.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "enopt/algorithms.hpp"
#include "enopt/library.hpp"

namespace fs = std::filesystem;
using namespace enopt;

namespace {

struct RunConfig {
  std::string model;
  std::string data;        // CSV overriding/extending bundled data
  std::string out = "out";
  bool quiet = false;
  std::uint64_t seed = 1;
  bool discretize = true;
  std::string gridfile;    // linearization targets; bundled default when empty
  bool no_linearize = false;
  std::string method = "cc";
  double rel_gap = 1e-6;
  std::size_t points = 8;
  std::size_t k = 4;
  bool keep_max = false;
  std::string solution;
  bool nonlinear = false;
};

void say(const RunConfig& cfg, const std::string& line) {
  if (!cfg.quiet) std::cout << line << "\n";
}

std::string write_artifact(const RunConfig& cfg, const std::string& name,
                           const std::string& content) {
  fs::create_directories(cfg.out);
  fs::path p = fs::path(cfg.out) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ParseError("cannot write " + p.string());
  f << content;
  std::cout << p.string() << "\n";
  return p.string();
}

BundledModel load_model(const RunConfig& cfg) {
  BundledModel bm = make_bundled(cfg.model, cfg.seed);
  if (!cfg.data.empty()) load_data_csv_file(bm.problem, cfg.data);
  return bm;
}

FlatOptions flat_options(const RunConfig& cfg, const BundledModel& bm) {
  FlatOptions fo;
  fo.discretize = cfg.discretize;
  fo.method = cfg.method == "mc" ? LinearizeMethod::MultipleChoice
                                 : LinearizeMethod::ConvexCombination;
  if (!cfg.no_linearize) {
    fo.linearize =
        cfg.gridfile.empty() ? bm.grids : parse_grid_spec_file(cfg.gridfile);
  }
  return fo;
}

Solution solve_flat(const FlatModel& m, const RunConfig& cfg) {
  SolverOptions so;
  so.rel_gap = cfg.rel_gap;
  bool discrete = false;
  for (const auto& v : m.variables) discrete |= v.domain != VarDomain::Real;
  return discrete ? solve_milp(m, so) : solve_lp(m, so);
}

int cmd_build(const RunConfig& cfg) {
  BundledModel bm = load_model(cfg);
  std::ostringstream os;
  os << serialize_system(*bm.system) << "\n" << bm.problem.summary();
  write_artifact(cfg, cfg.model + ".system.txt", os.str());
  return 0;
}

int cmd_flatten(const RunConfig& cfg) {
  BundledModel bm = load_model(cfg);
  FlatModel m = flatten(bm.problem, flat_options(cfg, bm));
  say(cfg, "variables: " + std::to_string(m.variables.size()) +
               ", constraints: " + std::to_string(m.constraints.size()) +
               ", linear: " + (m.linear() ? "yes" : "no"));
  if (m.linear())
    write_artifact(cfg, cfg.model + ".lp", emit_canonical_lp(m));
  else
    write_artifact(cfg, cfg.model + ".listing.txt", emit_expr_listing(m));
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  BundledModel bm = load_model(cfg);
  FlatModel m = flatten(bm.problem, flat_options(cfg, bm));
  Solution sol = solve_flat(m, cfg);
  say(cfg, std::string("status: ") + status_text(sol.status));
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Feasible)
    return 3;
  say(cfg, "objective: " + format_shortest(sol.objective));
  write_artifact(cfg, cfg.model + ".sol", write_solution(m, sol));
  return 0;
}

int cmd_pareto(const RunConfig& cfg) {
  BundledModel bm = load_model(cfg);
  auto front = epsilon_constraint_pareto(bm.problem, bm.objective_a,
                                         bm.objective_b, cfg.points,
                                         flat_options(cfg, bm));
  if (front.empty()) return 3;
  say(cfg, "frontier points: " + std::to_string(front.size()));
  write_artifact(cfg, cfg.model + ".pareto.csv", pareto_csv(front));
  return 0;
}

int cmd_cluster(const RunConfig& cfg) {
  std::ifstream f(cfg.data);
  if (!f) throw ParseError("cannot open " + cfg.data);
  std::vector<std::vector<double>> pts;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;  // header or label line
        break;
      }
    }
    if (!numeric || row.empty()) continue;
    bool all_zero = true;
    for (double v : row) all_zero &= v == 0.0;
    if (all_zero) continue;  // zero-demand rows carry no information
    pts.push_back(std::move(row));
  }
  if (pts.empty()) throw BadParams("no numeric rows in " + cfg.data);
  ClusterResult r = kmeans_cluster(pts, cfg.k, cfg.seed, 100, cfg.keep_max);
  say(cfg, "sse: " + format_shortest(r.sse));
  write_artifact(cfg, "clusters.csv", cluster_csv(r));
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  BundledModel bm = load_model(cfg);
  RunConfig mod = cfg;
  if (cfg.nonlinear) mod.no_linearize = true;  // verify on the original model
  FlatModel m = flatten(bm.problem, flat_options(mod, bm));

  std::ifstream f(cfg.solution);
  if (!f) throw ParseError("cannot open " + cfg.solution);
  std::map<std::string, double> point;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    double value;
    if (ls >> name >> value) point[name] = value;
  }

  FeasibilityReport rep = check_feasibility(m, point);
  std::ostringstream os;
  os << "max_violation " << format_shortest(rep.max_violation) << "\n";
  os << "objective " << format_shortest(rep.objective) << "\n";
  for (const auto& e : rep.entries)
    if (std::abs(e.violation) > 1e-8)
      os << e.name << " " << format_shortest(e.violation) << "\n";
  write_artifact(cfg, cfg.model + ".check.txt", os.str());
  say(cfg, rep.pass(1e-8) ? "feasible" : "infeasible");
  return rep.pass(1e-8) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"component-oriented energy system optimization"};
  app.set_config("--config");
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", cfg.model, "bundled model id")
        ->required()
        ->check(CLI::IsMember(bundled_model_ids()));
    c->add_option("--data", cfg.data, "data CSV (scenario,timepoint,parameter,value)");
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--out", cfg.out, "output directory");
    c->add_flag("--quiet", cfg.quiet, "emit only artifact paths");
    c->add_option("--seed", cfg.seed, "random seed");
  };
  auto add_flatten = [&](CLI::App* c) {
    c->add_flag("--discretize,!--no-discretize", cfg.discretize,
                "apply implicit Euler to states");
    c->add_option("--linearize", cfg.gridfile, "grid-spec file for piecewise "
                                               "linearization");
    c->add_flag("--no-linearize", cfg.no_linearize,
                "skip linearization even when the model bundles grids");
    c->add_option("--method", cfg.method, "linearization method")
        ->check(CLI::IsMember({"cc", "mc"}));
  };

  CLI::App* build = app.add_subcommand("build", "write the system description");
  add_model(build);
  add_common(build);

  CLI::App* flat = app.add_subcommand("flatten", "emit the deterministic "
                                                 "equivalent");
  add_model(flat);
  add_common(flat);
  add_flatten(flat);

  CLI::App* solve = app.add_subcommand("solve", "flatten and optimize");
  add_model(solve);
  add_common(solve);
  add_flatten(solve);
  solve->add_option("--rel-gap", cfg.rel_gap, "MILP relative gap");

  CLI::App* pareto = app.add_subcommand("pareto", "epsilon-constraint sweep");
  add_model(pareto);
  add_common(pareto);
  add_flatten(pareto);
  pareto->add_option("--points", cfg.points, "number of epsilon points");
  pareto->add_option("--rel-gap", cfg.rel_gap, "MILP relative gap");

  CLI::App* cluster = app.add_subcommand("cluster", "k-means aggregation of "
                                                    "a numeric CSV");
  cluster->add_option("--data", cfg.data, "points CSV")->required();
  cluster->add_option("--k", cfg.k, "number of clusters")->required();
  cluster->add_flag("--keep-max", cfg.keep_max,
                    "pin the maximum-demand point as a center");
  add_common(cluster);

  CLI::App* check = app.add_subcommand("check", "verify a solution file");
  add_model(check);
  add_common(check);
  add_flatten(check);
  check->add_option("--solution", cfg.solution, "solution file")->required();
  check->add_flag("--nonlinear", cfg.nonlinear,
                  "check against the model without linearization");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return cmd_build(cfg);
    if (flat->parsed()) return cmd_flatten(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (pareto->parsed()) return cmd_pareto(cfg);
    if (cluster->parsed()) return cmd_cluster(cfg);
    if (check->parsed()) return cmd_check(cfg);
  } catch (const BadParams& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BadK& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
