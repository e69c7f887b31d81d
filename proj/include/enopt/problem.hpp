#pragma once

// Two-stage problem container: scenario set with weights, per-scenario time
// grids, parameter data tables, objective terms and design/operation views.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enopt/system.hpp"

namespace enopt {

struct ScenarioSet {
  // Ordered (scenario id, weight). Weights are nonnegative and need not sum
  // to one; zero-weight scenarios stay in the constraint set.
  std::vector<std::pair<std::string, double>> entries;
};

class TimeGrid {
public:
  using Point = std::pair<std::string, double>;  // (timepoint label, step length)

  void set(const std::string& scenario, std::vector<Point> points);
  // Uniform form: N equal steps covering `horizon`.
  void set_uniform(const std::string& scenario,
                   const std::vector<std::string>& labels, double horizon);

  const std::vector<Point>& points(const std::string& scenario) const;
  bool has(const std::string& scenario) const {
    return points_.count(scenario) != 0;
  }
  double horizon(const std::string& scenario) const;

private:
  std::map<std::string, std::vector<Point>> points_;
};

// Parameter values: scalar, per-scenario, or per-(scenario, timepoint);
// narrower shapes broadcast.
struct DataValue {
  std::optional<double> scalar;
  std::map<std::string, double> per_scenario;
  std::map<std::pair<std::string, std::string>, double> per_point;

  std::optional<double> lookup(const std::string& s,
                               const std::string& t) const;
  bool empty() const {
    return !scalar && per_scenario.empty() && per_point.empty();
  }
};

struct ValidationReport {
  std::vector<std::string> errors;    // missing data, bad grids, no scenarios
  std::vector<std::string> warnings;  // unbounded variables (defaulted later)
  bool ok() const { return errors.empty(); }
};

// One variable instance of the deterministic equivalent: a design variable,
// or an operational variable at a (scenario, timepoint).
struct Instance {
  SymbolRef base;
  std::string scenario;   // empty for design instances
  std::string timepoint;  // empty for design instances
  std::string name;       // "qualified.name" or "qualified.name[s,t]"
};

// URL-safe %XX escaping of user labels embedded in instance names.
std::string escape_index_label(const std::string& s);

std::string instance_name(const SymbolRef& base, const std::string& scenario,
                          const std::string& timepoint);

class ProblemSpec {
public:
  ProblemSpec(SystemPtr system, Expr design_obj, Expr operation_obj,
              ScenarioSet scenarios, TimeGrid grid);

  const SystemModel& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  const Expr& design_objective() const { return design_obj_; }
  const Expr& operation_objective() const { return operation_obj_; }
  const ScenarioSet& scenarios() const { return scenarios_; }
  const TimeGrid& grid() const { return grid_; }

  // Data access. Setting per-scenario or per-point values for a design-stage
  // use is caught at flatten; shape checks here are per symbol kind.
  void set_data(const SymbolRef& param, double scalar);
  void set_data(const SymbolRef& param, const std::string& scenario, double v);
  void set_data(const SymbolRef& param, const std::string& scenario,
                const std::string& timepoint, double v);
  const DataValue* find_data(std::uint64_t id) const;

  void set_design(const SymbolRef& var, double v);
  std::optional<double> get_design(const SymbolRef& var) const;
  const std::map<std::uint64_t, double>& design_values() const {
    return design_values_;
  }

  void set_operation(const SymbolRef& var, const std::string& scenario,
                     const std::string& timepoint, double v);
  std::optional<double> get_operation(const SymbolRef& var,
                                      const std::string& scenario,
                                      const std::string& timepoint) const;
  const std::map<std::tuple<std::uint64_t, std::string, std::string>, double>&
  operation_values() const {
    return operation_values_;
  }

  // Copy of this problem with replaced objective terms; shares the system,
  // scenarios, grid and data.
  ProblemSpec with_objectives(Expr design_obj, Expr operation_obj) const;

  ValidationReport validate() const;

  // Indexed symbol universe: one instance per design variable plus one per
  // (operational variable, scenario, timepoint). Throws ValidationFailed.
  std::vector<Instance> instantiate_symbols() const;

  const std::vector<SymbolRef>& parameters() const { return parameters_; }
  const std::vector<SymbolRef>& design_vars() const { return design_vars_; }
  const std::vector<SymbolRef>& operational_vars() const {
    return operational_vars_;
  }
  SymbolRef find_symbol(const std::string& name) const;

  std::size_t total_timepoints() const;

  // Plain-text summary (sizes, scenarios, data coverage).
  std::string summary() const;

private:
  SystemPtr system_;
  Expr design_obj_, operation_obj_;
  ScenarioSet scenarios_;
  TimeGrid grid_;
  std::map<std::uint64_t, DataValue> data_;
  std::map<std::uint64_t, double> design_values_;
  std::map<std::tuple<std::uint64_t, std::string, std::string>, double>
      operation_values_;
  std::vector<SymbolRef> parameters_, design_vars_, operational_vars_;
};

// create_problem per the system workflow: validates objective stages and
// freezes the system.
ProblemSpec create_problem(SystemPtr sys, Expr design_obj, Expr operation_obj,
                           ScenarioSet scenarios, TimeGrid grid);

// CSV ingestion, header "scenario,timepoint,parameter,value"; empty scenario
// and timepoint fields denote scalar rows.
void load_data_csv(ProblemSpec& p, std::istream& in);
void load_data_csv_file(ProblemSpec& p, const std::string& path);

}  // namespace enopt
