#include "enopt/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace enopt {

void TimeGrid::set(const std::string& scenario, std::vector<Point> points) {
  for (const auto& [label, delta] : points)
    if (delta < 0.0)
      throw MissingStep(scenario + "." + label + ": negative step length");
  points_[scenario] = std::move(points);
}

void TimeGrid::set_uniform(const std::string& scenario,
                           const std::vector<std::string>& labels,
                           double horizon) {
  if (labels.empty()) throw MissingStep(scenario + ": no time points");
  double delta = horizon / static_cast<double>(labels.size());
  std::vector<Point> pts;
  pts.reserve(labels.size());
  for (const auto& l : labels) pts.emplace_back(l, delta);
  points_[scenario] = std::move(pts);
}

const std::vector<TimeGrid::Point>& TimeGrid::points(
    const std::string& scenario) const {
  auto it = points_.find(scenario);
  if (it == points_.end()) throw MissingStep("no time grid for " + scenario);
  return it->second;
}

double TimeGrid::horizon(const std::string& scenario) const {
  double t = 0.0;
  for (const auto& [label, delta] : points(scenario)) t += delta;
  return t;
}

std::optional<double> DataValue::lookup(const std::string& s,
                                        const std::string& t) const {
  auto pit = per_point.find({s, t});
  if (pit != per_point.end()) return pit->second;
  auto sit = per_scenario.find(s);
  if (sit != per_scenario.end()) return sit->second;
  return scalar;
}

std::string escape_index_label(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                c == '-' || c == '.';
    if (safe) {
      out += c;
    } else {
      out += '%';
      out += hex[(static_cast<unsigned char>(c) >> 4) & 0xF];
      out += hex[static_cast<unsigned char>(c) & 0xF];
    }
  }
  return out;
}

std::string instance_name(const SymbolRef& base, const std::string& scenario,
                          const std::string& timepoint) {
  if (scenario.empty()) return base->name;
  return base->name + "[" + escape_index_label(scenario) + "," +
         escape_index_label(timepoint) + "]";
}

ProblemSpec::ProblemSpec(SystemPtr system, Expr design_obj, Expr operation_obj,
                         ScenarioSet scenarios, TimeGrid grid)
    : system_(std::move(system)),
      design_obj_(std::move(design_obj)),
      operation_obj_(std::move(operation_obj)),
      scenarios_(std::move(scenarios)),
      grid_(std::move(grid)) {
  if (!system_) throw Error("null system");
  for (const auto& [sid, w] : scenarios_.entries)
    if (w < 0.0) throw Error("negative scenario weight for " + sid);
  system_->all_symbols(parameters_, design_vars_, operational_vars_);
  // Component defaults seed the data table as scalars.
  for (const auto& [id, v] : system_->all_default_data())
    data_[id].scalar = v;
}

void ProblemSpec::set_data(const SymbolRef& param, double scalar) {
  if (param->kind != SymbolKind::Parameter)
    throw UnknownSymbol(param->name + " is not a parameter");
  data_[param->id].scalar = scalar;
}

void ProblemSpec::set_data(const SymbolRef& param, const std::string& scenario,
                           double v) {
  if (param->kind != SymbolKind::Parameter)
    throw UnknownSymbol(param->name + " is not a parameter");
  data_[param->id].per_scenario[scenario] = v;
}

void ProblemSpec::set_data(const SymbolRef& param, const std::string& scenario,
                           const std::string& timepoint, double v) {
  if (param->kind != SymbolKind::Parameter)
    throw UnknownSymbol(param->name + " is not a parameter");
  data_[param->id].per_point[{scenario, timepoint}] = v;
}

const DataValue* ProblemSpec::find_data(std::uint64_t id) const {
  auto it = data_.find(id);
  return it == data_.end() ? nullptr : &it->second;
}

void ProblemSpec::set_design(const SymbolRef& var, double v) {
  if (var->kind != SymbolKind::DesignVariable)
    throw ShapeMismatch(var->name + " is not a design variable");
  design_values_[var->id] = v;
}

std::optional<double> ProblemSpec::get_design(const SymbolRef& var) const {
  auto it = design_values_.find(var->id);
  if (it == design_values_.end()) return std::nullopt;
  return it->second;
}

void ProblemSpec::set_operation(const SymbolRef& var,
                                const std::string& scenario,
                                const std::string& timepoint, double v) {
  if (var->kind != SymbolKind::OperationalVariable)
    throw ShapeMismatch(var->name + " is not an operational variable");
  operation_values_[{var->id, scenario, timepoint}] = v;
}

std::optional<double> ProblemSpec::get_operation(
    const SymbolRef& var, const std::string& scenario,
    const std::string& timepoint) const {
  auto it = operation_values_.find({var->id, scenario, timepoint});
  if (it == operation_values_.end()) return std::nullopt;
  return it->second;
}

std::size_t ProblemSpec::total_timepoints() const {
  std::size_t n = 0;
  for (const auto& [sid, w] : scenarios_.entries)
    n += grid_.points(sid).size();
  return n;
}

SymbolRef ProblemSpec::find_symbol(const std::string& name) const {
  return system_->resolve_symbol(name);
}

ProblemSpec ProblemSpec::with_objectives(Expr design_obj,
                                         Expr operation_obj) const {
  if (classify_stage(design_obj) != StageClass::FirstStage)
    throw StageMismatch("design objective contains operational symbols");
  ProblemSpec copy = *this;
  copy.design_obj_ = std::move(design_obj);
  copy.operation_obj_ = std::move(operation_obj);
  return copy;
}

ValidationReport ProblemSpec::validate() const {
  ValidationReport r;
  if (scenarios_.entries.empty()) r.errors.push_back("no scenarios defined");
  std::set<std::string> seen;
  for (const auto& [sid, w] : scenarios_.entries) {
    if (!seen.insert(sid).second)
      r.errors.push_back("duplicate scenario id: " + sid);
    if (!grid_.has(sid)) r.errors.push_back("no time grid for scenario " + sid);
  }

  // Parameters used anywhere must resolve for every (s, t).
  std::map<std::uint64_t, SymbolRef> used;
  collect_symbols(design_obj_, used);
  collect_symbols(operation_obj_, used);
  for (const auto& c : system_->all_constraints()) {
    collect_symbols(c.lhs, used);
    collect_symbols(c.rhs, used);
  }
  for (const auto& sd : system_->all_states()) used.emplace(sd.initial->id, sd.initial);

  for (const auto& [id, sym] : used) {
    if (sym->kind != SymbolKind::Parameter) continue;
    const DataValue* dv = find_data(id);
    for (const auto& [sid, w] : scenarios_.entries) {
      if (!grid_.has(sid)) continue;
      for (const auto& [t, delta] : grid_.points(sid)) {
        if (!dv || !dv->lookup(sid, t))
          r.errors.push_back("missing datum: " + sym->name + " at (" + sid +
                             "," + t + ")");
      }
    }
  }

  // States need an initial value.
  for (const auto& sd : system_->all_states()) {
    const DataValue* dv = find_data(sd.initial->id);
    if (!dv || (!dv->scalar && dv->per_scenario.empty()))
      r.errors.push_back("state without initial value: " + sd.state->name);
  }

  // Unbounded variables are defaulted at flatten time, with a warning here.
  auto warn_unbounded = [&](const std::vector<SymbolRef>& vars) {
    for (const auto& v : vars)
      if (!v->lo || !v->hi)
        r.warnings.push_back("unbounded variable (defaults to [-1e9, 1e9]): " +
                             v->name);
  };
  warn_unbounded(design_vars_);
  warn_unbounded(operational_vars_);
  return r;
}

std::vector<Instance> ProblemSpec::instantiate_symbols() const {
  ValidationReport r = validate();
  if (!r.ok()) {
    std::string msg = "validation failed:";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ValidationFailed(msg);
  }
  std::vector<Instance> out;
  for (const auto& v : design_vars_)
    out.push_back({v, "", "", instance_name(v, "", "")});
  for (const auto& v : operational_vars_)
    for (const auto& [sid, w] : scenarios_.entries)
      for (const auto& [t, delta] : grid_.points(sid))
        out.push_back({v, sid, t, instance_name(v, sid, t)});
  return out;
}

std::string ProblemSpec::summary() const {
  std::ostringstream os;
  os << "problem over system " << system_->label() << "\n";
  os << "  design variables:      " << design_vars_.size() << "\n";
  os << "  operational variables: " << operational_vars_.size() << "\n";
  os << "  parameters:            " << parameters_.size() << "\n";
  os << "  constraints:           " << system_->all_constraints().size() << "\n";
  os << "  states:                " << system_->all_states().size() << "\n";
  os << "  scenarios:\n";
  for (const auto& [sid, w] : scenarios_.entries) {
    os << "    " << sid << " weight " << format_shortest(w);
    if (grid_.has(sid))
      os << " (" << grid_.points(sid).size() << " time points, horizon "
         << format_shortest(grid_.horizon(sid)) << ")";
    os << "\n";
  }
  ValidationReport r = validate();
  os << "  validation: " << (r.ok() ? "ok" : "FAILED") << " ("
     << r.errors.size() << " errors, " << r.warnings.size() << " warnings)\n";
  for (const auto& e : r.errors) os << "    error: " << e << "\n";
  for (const auto& w : r.warnings) os << "    warning: " << w << "\n";
  return os.str();
}

ProblemSpec create_problem(SystemPtr sys, Expr design_obj, Expr operation_obj,
                           ScenarioSet scenarios, TimeGrid grid) {
  if (classify_stage(design_obj) != StageClass::FirstStage)
    throw StageMismatch("design objective contains operational symbols");
  if (!sys->frozen()) sys->freeze_all();
  return ProblemSpec(std::move(sys), std::move(design_obj),
                     std::move(operation_obj), std::move(scenarios),
                     std::move(grid));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void load_data_csv(ProblemSpec& p, std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw MalformedLine("empty data file");
  auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"scenario", "timepoint", "parameter",
                                         "value"})
    throw MalformedLine("expected header scenario,timepoint,parameter,value");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4)
      throw MalformedLine("line " + std::to_string(lineno) +
                          ": expected 4 fields");
    SymbolRef sym = p.find_symbol(f[2]);
    if (!sym) throw UnknownSymbol(f[2]);
    double v = std::stod(f[3]);
    if (f[0].empty() && f[1].empty())
      p.set_data(sym, v);
    else if (f[1].empty())
      p.set_data(sym, f[0], v);
    else
      p.set_data(sym, f[0], f[1], v);
  }
}

void load_data_csv_file(ProblemSpec& p, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file: " + path);
  load_data_csv(p, in);
}

}  // namespace enopt
