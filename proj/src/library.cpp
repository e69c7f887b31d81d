#include "enopt/library.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "enopt/transform.hpp"

namespace enopt {

namespace {

constexpr double kFlowHi = 1e6;

}  // namespace

// ---------------------------------------------------------------------------

ComponentPtr conversion_component(const std::string& name,
                                  const ConversionSpec& spec) {
  if (spec.c_ref <= 0.0) throw BadParams("c_ref must be positive");
  if (spec.m <= 0.0 || spec.m > 1.0) throw BadParams("m must be in (0, 1]");
  if (spec.min_partload < 0.0 || spec.min_partload >= 1.0)
    throw BadParams("min_partload must be in [0, 1)");
  if (!(spec.e_nom_hi > spec.e_nom_lo) || spec.e_nom_lo < 0.0)
    throw BadParams("bad nominal size bounds");
  if (!spec.eta_builder && spec.eta <= 0.0)
    throw BadParams("eta must be positive");

  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef e_nom =
      c->make_design_variable("E_nom", spec.e_nom_lo, spec.e_nom_hi);
  double ci_hi = spec.c_ref * std::pow(spec.e_nom_hi, spec.m);
  SymbolRef ci = c->make_design_variable("C_I", 0.0, ci_hi);
  SymbolRef on =
      c->make_operational_variable("on", 0.0, 1.0, VarDomain::Binary);
  SymbolRef e_in = c->make_operational_variable("E_in", 0.0, kFlowHi);
  SymbolRef e_out = c->make_operational_variable("E_out", 0.0, spec.e_nom_hi);
  SymbolRef price = c->make_parameter("price_in", 0.0, /*indexed=*/true);

  Expr eta = spec.eta_builder ? spec.eta_builder(*c) : Expr(spec.eta);

  c->add_constraint("inv", Expr(ci), Relation::Eq,
                    Expr(spec.c_ref) * pow(Expr(e_nom), Expr(spec.m)));
  c->add_constraint("conversion", Expr(e_out), Relation::Eq, eta * Expr(e_in));
  c->add_constraint("partload_ub", Expr(e_out), Relation::Le,
                    Expr(e_nom) * Expr(on));
  c->add_constraint("partload_lb",
                    Expr(spec.min_partload) * Expr(e_nom) * Expr(on),
                    Relation::Le, Expr(e_out));

  c->add_connector("in", Expr(e_in), Polarity::Input);
  c->add_connector("out", -Expr(e_out), Polarity::Output);
  c->add_expression("investment_costs", Expr(ci));
  c->add_expression("variable_costs", Expr(price) * Expr(e_in));
  return c;
}

// ---------------------------------------------------------------------------

ComponentPtr storage_component(const std::string& name,
                               const StorageSpec& spec) {
  if (spec.eta_in <= 0.0 || spec.eta_in > 1.0 || spec.eta_out <= 0.0 ||
      spec.eta_out > 1.0)
    throw BadParams("efficiencies must be in (0, 1]");
  if (!(spec.tau > 0.0)) throw BadParams("tau must be positive or infinite");
  if (!(spec.cap_hi > spec.cap_lo) || spec.cap_lo < 0.0)
    throw BadParams("bad capacity bounds");

  double rate_hi = spec.rate_hi.value_or(spec.cap_hi);
  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef cap = c->make_design_variable("capacity", spec.cap_lo, spec.cap_hi);
  SymbolRef e_in = c->make_operational_variable("E_in", 0.0, rate_hi);
  SymbolRef e_out = c->make_operational_variable("E_out", 0.0, rate_hi);
  SymbolRef e = c->make_operational_variable("E", 0.0, spec.cap_hi);
  SymbolRef e_init = c->make_parameter("E_init", spec.e_init);

  Expr rhs = Expr(spec.eta_in) * Expr(e_in) - Expr(e_out) / Expr(spec.eta_out);
  if (std::isfinite(spec.tau)) rhs = rhs - Expr(e) / Expr(spec.tau);
  c->declare_state(e, rhs, e_init);

  c->add_constraint("cap", Expr(e), Relation::Le, Expr(cap));

  Expr invest = Expr(spec.c_spec) * Expr(cap);
  if (spec.with_build) {
    SymbolRef build =
        c->make_design_variable("build", 0.0, 1.0, VarDomain::Binary);
    c->add_constraint("cap_build", Expr(cap), Relation::Le,
                      Expr(spec.cap_hi) * Expr(build));
    invest = invest + Expr(spec.c_fix) * Expr(build);
  }
  c->add_expression("investment_costs", invest);
  c->add_connector("port", Expr(e_in) - Expr(e_out), Polarity::Bidirectional);
  return c;
}

// ---------------------------------------------------------------------------

ComponentPtr thermal_zone(const std::string& name, double rho, double volume,
                          double cp, std::optional<double> t_lo,
                          std::optional<double> t_hi, double t_init) {
  if (rho <= 0.0 || volume <= 0.0 || cp <= 0.0)
    throw BadParams("zone parameters must be positive");
  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef q = c->make_operational_variable("Qdot", -kFlowHi, kFlowHi);
  SymbolRef t = c->make_operational_variable("T", t_lo, t_hi);
  SymbolRef t_init_p = c->make_parameter("T_init", t_init);
  c->declare_state(t, Expr(q) / Expr(rho * volume * cp), t_init_p);
  c->add_connector("heat", Expr(q), Polarity::Bidirectional);
  c->add_connector("T", Expr(t), Polarity::Bidirectional);
  return c;
}

ComponentPtr heat_transfer(const std::string& name, double u, double area) {
  if (u <= 0.0 || area <= 0.0)
    throw BadParams("transfer parameters must be positive");
  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef t_a = c->make_operational_variable("T_A", 0.0, 1000.0);
  SymbolRef t_b = c->make_operational_variable("T_B", 0.0, 1000.0);
  Expr q = Expr(u * area) * (Expr(t_a) - Expr(t_b));
  c->add_expression("Q", q);
  c->add_connector("T_A", -Expr(t_a), Polarity::Bidirectional);
  c->add_connector("T_B", -Expr(t_b), Polarity::Bidirectional);
  c->add_connector("heat_A", q, Polarity::Bidirectional);
  c->add_connector("heat_B", -q, Polarity::Bidirectional);
  return c;
}

// ---------------------------------------------------------------------------

ComponentPtr carnot_heat_pump(const std::string& name, const CarnotSpec& spec) {
  if (spec.eta_cop <= 0.0 || spec.eta_cop > 1.0)
    throw BadParams("eta_cop must be in (0, 1]");
  if (spec.q_max <= 0.0 || spec.cp <= 0.0)
    throw BadParams("q_max and cp must be positive");

  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef build =
      c->make_design_variable("build", 0.0, 1.0, VarDomain::Binary);
  SymbolRef q = c->make_operational_variable("Qdot", 0.0, spec.q_max);
  SymbolRef p = c->make_operational_variable("P", 0.0, spec.q_max);
  SymbolRef m_eva = c->make_operational_variable("mdot_eva", 0.0, 1000.0);
  SymbolRef m_con = c->make_operational_variable("mdot_con", 0.0, 1000.0);
  SymbolRef t_fl_eva = c->make_operational_variable("T_fl_eva", 250.0, 420.0);
  SymbolRef t_re_eva = c->make_operational_variable("T_re_eva", 250.0, 420.0);
  SymbolRef t_fl_con = c->make_operational_variable("T_fl_con", 250.0, 420.0);
  SymbolRef t_re_con = c->make_operational_variable("T_re_con", 250.0, 420.0);

  c->add_constraint("cap", Expr(q), Relation::Le,
                    Expr(spec.q_max) * Expr(build));
  c->add_constraint("carnot",
                    Expr(p) * Expr(t_re_con) * Expr(spec.eta_cop),
                    Relation::Eq,
                    Expr(q) * (Expr(t_re_con) - Expr(t_re_eva)));
  c->add_constraint(
      "energy_balance",
      Expr(m_eva) * Expr(spec.cp) * (Expr(t_fl_eva) - Expr(t_re_eva)) + Expr(p),
      Relation::Eq,
      Expr(m_con) * Expr(spec.cp) * (Expr(t_re_con) - Expr(t_fl_con)));

  c->add_connector("heat_out", -Expr(q), Polarity::Output);
  c->add_connector("heat_in", Expr(q) - Expr(p), Polarity::Input);
  c->add_connector("power", Expr(p), Polarity::Input);
  c->add_expression("investment_costs",
                    Expr(spec.c_spec * spec.q_max) * Expr(build));
  return c;
}

// ---------------------------------------------------------------------------

ComponentPtr pipe_network(const std::string& name,
                          const PipeNetworkSpec& spec) {
  if (spec.segments.empty()) throw BadParams("network needs segments");
  for (const auto& s : spec.segments)
    if (s.length <= 0.0) throw BadParams("segment lengths must be positive");
  if (spec.u_nw <= 0.0 || spec.cp <= 0.0)
    throw BadParams("u_nw and cp must be positive");

  auto c = std::make_shared<ComponentModel>(name);
  double l_total = 0.0;
  std::vector<SymbolRef> builds;
  Expr length_sum(0.0), invest(0.0);
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    SymbolRef b = c->make_design_variable("seg" + std::to_string(i), 0.0, 1.0,
                                          VarDomain::Binary);
    builds.push_back(b);
    length_sum = length_sum + Expr(spec.segments[i].length) * Expr(b);
    invest = invest + Expr(spec.segments[i].cost) * Expr(b);
    l_total += spec.segments[i].length;
  }
  SymbolRef l_nw = c->make_design_variable("l_NW", 0.0, l_total);
  c->add_constraint("network_length", Expr(l_nw), Relation::Eq, length_sum);

  SymbolRef mdot = c->make_operational_variable("mdot", 0.0, 1000.0);
  SymbolRef t_fl = c->make_operational_variable("T_fl", 0.0, 120.0);
  SymbolRef t_re = c->make_operational_variable("T_re", 0.0, 120.0);
  SymbolRef dt_fl = c->make_operational_variable("dT_fl", 0.0, 50.0);
  SymbolRef dt_re = c->make_operational_variable("dT_re", 0.0, 50.0);
  Expr mcp = Expr(spec.cp * 1000.0) * Expr(mdot);  // W/K from kJ/(kg K)

  c->add_constraint("thloss_fl", mcp * Expr(dt_fl), Relation::Eq,
                    Expr(spec.u_nw) * Expr(l_nw) *
                        (Expr(t_fl) - Expr(spec.t_gr)));
  c->add_constraint("thloss_re", mcp * Expr(dt_re), Relation::Eq,
                    Expr(spec.u_nw) * Expr(l_nw) *
                        (Expr(t_re) + Expr(dt_re) - Expr(spec.t_gr)));
  c->add_constraint("flow_temp", Expr(t_fl), Relation::Eq,
                    Expr(t_re) + Expr(15.0));

  SymbolRef q_center = c->make_operational_variable("Q_center", 0.0, kFlowHi);
  c->add_connector("center", Expr(q_center), Polarity::Input);

  Expr delivered(0.0);
  for (const auto& consumer : spec.consumers) {
    SymbolRef use = c->make_design_variable("use_" + consumer.name, 0.0, 1.0,
                                            VarDomain::Binary);
    for (std::size_t idx : consumer.segments) {
      if (idx >= builds.size()) throw BadParams("bad segment index");
      c->add_constraint("gate_" + consumer.name + "_" + std::to_string(idx),
                        Expr(use), Relation::Le, Expr(builds[idx]));
    }
    SymbolRef q = c->make_operational_variable("Q_" + consumer.name, 0.0,
                                               spec.q_big);
    c->add_constraint("cap_" + consumer.name, Expr(q), Relation::Le,
                      Expr(spec.q_big) * Expr(use));
    c->add_connector("to_" + consumer.name, -Expr(q), Polarity::Output);
    delivered = delivered + Expr(q);
  }
  // center supply covers deliveries plus thermal losses of both pipes
  c->add_constraint("heat_balance", Expr(q_center), Relation::Eq,
                    delivered + mcp * (Expr(dt_fl) + Expr(dt_re)));

  c->add_expression("investment_costs", invest);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct SideView {
  bool enthalpy = false;
  Expr flow;
  std::optional<Expr> in, out;
};

SideView read_side(const std::string& name, const char* which,
                   const HeSide& s) {
  bool e_used = s.mdot || s.h_in || s.h_out;
  bool t_used = s.mcp || s.T_in || s.T_out;
  std::string tag = name + " " + which + " side";
  if (e_used && t_used)
    throw OverdeterminedSide(tag + " mixes enthalpy and temperature forms");
  if (!e_used && !t_used) throw BadParams(tag + " has no quantities");
  SideView v;
  v.enthalpy = e_used;
  const std::optional<Expr>& flow = e_used ? s.mdot : s.mcp;
  if (!flow) throw BadParams(tag + " lacks a flow");
  v.flow = *flow;
  v.in = e_used ? s.h_in : s.T_in;
  v.out = e_used ? s.h_out : s.T_out;
  if (!v.in && !v.out) throw BadParams(tag + " lacks both endpoint values");
  return v;
}

Expr side_duty(const SideView& v, bool hot, const Expr& in, const Expr& out) {
  return hot ? v.flow * (in - out) : v.flow * (out - in);
}

}  // namespace

ComponentPtr heat_exchanger(const std::string& name, const HeSide& hot,
                            const HeSide& cold, bool reduced) {
  SideView h = read_side(name, "hot", hot);
  SideView c = read_side(name, "cold", cold);
  int h_missing = (h.in ? 0 : 1) + (h.out ? 0 : 1);
  int c_missing = (c.in ? 0 : 1) + (c.out ? 0 : 1);
  if (h_missing + c_missing >= 2)
    throw UnderdeterminedBothSides(name + ": more than one free quantity");

  auto comp = std::make_shared<ComponentModel>(name);
  if (h_missing + c_missing == 0) {
    Expr qh = side_duty(h, true, *h.in, *h.out);
    Expr qc = side_duty(c, false, *c.in, *c.out);
    comp->add_expression("Q", qh);
    Expr diff = qh - qc;
    if (!(diff.is_constant() && std::abs(diff.constant_value()) <= 1e-12))
      comp->add_constraint("EB", qh, Relation::Eq, qc);
    comp->add_connector("hot", qh, Polarity::Bidirectional);
    comp->add_connector("cold", -qc, Polarity::Bidirectional);
    return comp;
  }

  // Exactly one free quantity: isolate it from Qh = Qc.
  SideView& free_side = h_missing ? h : c;
  bool free_hot = h_missing != 0;
  bool free_is_out = !free_side.out;
  std::string slot =
      std::string(free_hot ? "hot" : "cold") + (free_is_out ? "_out" : "_in");
  Expr known_duty = free_hot ? side_duty(c, false, *c.in, *c.out)
                             : side_duty(h, true, *h.in, *h.out);

  if (reduced) {
    SymbolRef u = make_symbol(name + ".__free", SymbolKind::OperationalVariable);
    Expr in = free_side.in ? *free_side.in : Expr(u);
    Expr out = free_side.out ? *free_side.out : Expr(u);
    Expr free_duty = side_duty(free_side, free_hot, in, out);
    Expr resolved = free_hot ? solve_linear(free_duty, known_duty, u)
                             : solve_linear(known_duty, free_duty, u);
    comp->add_expression(slot, resolved);
    comp->add_expression("Q", known_duty);
    comp->add_connector("hot", known_duty, Polarity::Bidirectional);
    comp->add_connector("cold", -known_duty, Polarity::Bidirectional);
    return comp;
  }

  SymbolRef v = comp->make_operational_variable(
      slot, 0.0, free_side.enthalpy ? 1e4 : 1000.0);
  Expr in = free_side.in ? *free_side.in : Expr(v);
  Expr out = free_side.out ? *free_side.out : Expr(v);
  Expr free_duty = side_duty(free_side, free_hot, in, out);
  if (free_hot)
    comp->add_constraint("EB", free_duty, Relation::Eq, known_duty);
  else
    comp->add_constraint("EB", known_duty, Relation::Eq, free_duty);
  comp->add_expression("Q", known_duty);
  comp->add_connector("hot", known_duty, Polarity::Bidirectional);
  comp->add_connector("cold", -known_duty, Polarity::Bidirectional);
  return comp;
}

// ---------------------------------------------------------------------------

ComponentPtr pump_turbine(const std::string& name, FlowMachine kind,
                          double eta_is, Expr mdot, Expr h_in, Expr h_is_out) {
  if (eta_is <= 0.0 || eta_is > 1.0)
    throw BadParams("eta_is must be in (0, 1]");
  auto c = std::make_shared<ComponentModel>(name);
  Expr p, h_out;
  if (kind == FlowMachine::Pump) {
    p = mdot * (h_is_out - h_in) / Expr(eta_is);
    h_out = h_in + (h_is_out - h_in) / Expr(eta_is);
  } else {
    p = mdot * (h_in - h_is_out) * Expr(eta_is);
    h_out = h_in - (h_in - h_is_out) * Expr(eta_is);
  }
  c->add_expression("P", p);
  c->add_expression("h_out", h_out);
  c->add_connector("power", kind == FlowMachine::Pump ? p : -p,
                   Polarity::Bidirectional);
  return c;
}

ComponentPtr pump_turbine(const std::string& name, FlowMachine kind,
                          double eta_is) {
  if (eta_is <= 0.0 || eta_is > 1.0)
    throw BadParams("eta_is must be in (0, 1]");
  auto tmp = std::make_shared<ComponentModel>(name);
  SymbolRef mdot = tmp->make_operational_variable("mdot", 0.0, 1e4);
  SymbolRef h_in = tmp->make_operational_variable("h_in", 0.0, 5000.0);
  SymbolRef h_is = tmp->make_operational_variable("h_is_out", 0.0, 5000.0);
  Expr p, h_out;
  if (kind == FlowMachine::Pump) {
    p = Expr(mdot) * (Expr(h_is) - Expr(h_in)) / Expr(eta_is);
    h_out = Expr(h_in) + (Expr(h_is) - Expr(h_in)) / Expr(eta_is);
  } else {
    p = Expr(mdot) * (Expr(h_in) - Expr(h_is)) * Expr(eta_is);
    h_out = Expr(h_in) - (Expr(h_in) - Expr(h_is)) * Expr(eta_is);
  }
  tmp->add_expression("P", p);
  tmp->add_expression("h_out", h_out);
  tmp->add_connector("power", kind == FlowMachine::Pump ? p : -p,
                     Polarity::Bidirectional);
  return tmp;
}

// ---------------------------------------------------------------------------

ComponentPtr cooling_system(const std::string& name, const CoolingSpec& spec,
                            Expr q, Expr t_sat) {
  if (spec.dp_fan <= 0.0) throw BadParams("dp_fan must be positive");
  if (spec.eta_fan <= 0.0 || spec.eta_fan > 1.0)
    throw BadParams("eta_fan must be in (0, 1]");
  if (spec.cp_air <= 0.0 || spec.rho_air <= 0.0)
    throw BadParams("air properties must be positive");
  if (spec.smooth && spec.eps <= 0.0) throw BadParams("eps must be positive");

  auto c = std::make_shared<ComponentModel>(name);
  Expr denom_raw = t_sat - Expr(spec.dt_min) - Expr(spec.t_cw_in);
  Expr guard = spec.smooth ? smooth_max(Expr(1e-5), denom_raw, spec.eps)
                           : max(Expr(1e-5), denom_raw);
  Expr mcp_cw = q / guard;
  Expr p_cs = mcp_cw * Expr(spec.dp_fan) /
              Expr(spec.cp_air * spec.rho_air * spec.eta_fan);
  c->add_expression("mcp_cw", mcp_cw);
  c->add_expression("mcp_air", mcp_cw);
  c->add_expression("P_CS", p_cs);
  c->add_connector("power", p_cs, Polarity::Bidirectional);
  return c;
}

ComponentPtr cooling_system(const std::string& name, const CoolingSpec& spec) {
  if (spec.dp_fan <= 0.0) throw BadParams("dp_fan must be positive");
  if (spec.eta_fan <= 0.0 || spec.eta_fan > 1.0)
    throw BadParams("eta_fan must be in (0, 1]");
  if (spec.cp_air <= 0.0 || spec.rho_air <= 0.0)
    throw BadParams("air properties must be positive");
  if (spec.smooth && spec.eps <= 0.0) throw BadParams("eps must be positive");

  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef q = c->make_operational_variable("Q", 0.0, 1e9);
  SymbolRef t_sat = c->make_operational_variable("T_sat", 250.0, 450.0);
  Expr denom_raw = Expr(t_sat) - Expr(spec.dt_min) - Expr(spec.t_cw_in);
  Expr guard = spec.smooth ? smooth_max(Expr(1e-5), denom_raw, spec.eps)
                           : max(Expr(1e-5), denom_raw);
  Expr mcp_cw = Expr(q) / guard;
  Expr p_cs = mcp_cw * Expr(spec.dp_fan) /
              Expr(spec.cp_air * spec.rho_air * spec.eta_fan);
  c->add_expression("mcp_cw", mcp_cw);
  c->add_expression("mcp_air", mcp_cw);
  c->add_expression("P_CS", p_cs);
  c->add_connector("power", p_cs, Polarity::Bidirectional);
  return c;
}

// ---------------------------------------------------------------------------

AnnSurrogate ann_surrogate(const AnnWeights& w,
                           const std::vector<Expr>& inputs) {
  std::size_t n_in = inputs.size();
  if (n_in == 0) throw ShapeMismatch("ann needs at least one input");
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ShapeMismatch(what);
  };
  check(w.w1.size() == 6 && w.b1.size() == 6, "first hidden layer must be 6");
  for (const auto& row : w.w1)
    check(row.size() == n_in, "w1 row width must equal input count");
  check(w.w2.size() == 6 && w.b2.size() == 6, "second hidden layer must be 6");
  for (const auto& row : w.w2) check(row.size() == 6, "w2 rows must be 6 wide");
  check(w.w3.size() == 1 && w.b3.size() == 1, "output layer must be 1");
  check(w.w3[0].size() == 6, "w3 row must be 6 wide");

  std::vector<Expr> layer1;
  layer1.reserve(6);
  for (std::size_t j = 0; j < 6; ++j) {
    Expr z(w.b1[j]);
    for (std::size_t i = 0; i < n_in; ++i)
      z = z + Expr(w.w1[j][i]) * inputs[i];
    layer1.push_back(tanh(z));
  }
  std::vector<Expr> layer2;
  layer2.reserve(6);
  for (std::size_t j = 0; j < 6; ++j) {
    Expr z(w.b2[j]);
    for (std::size_t i = 0; i < 6; ++i) z = z + Expr(w.w2[j][i]) * layer1[i];
    layer2.push_back(tanh(z));
  }
  Expr out(w.b3[0]);
  for (std::size_t i = 0; i < 6; ++i) out = out + Expr(w.w3[0][i]) * layer2[i];
  return {inputs, out};
}

AnnWeights random_ann_weights(std::size_t n_in, std::uint64_t seed,
                              double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  auto mat = [&](std::size_t rows, std::size_t cols) {
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
    for (auto& row : m)
      for (double& v : row) v = dist(rng);
    return m;
  };
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
  };
  AnnWeights w;
  w.w1 = mat(6, n_in);
  w.b1 = vec(6);
  w.w2 = mat(6, 6);
  w.b2 = vec(6);
  w.w3 = mat(1, 6);
  w.b3 = vec(1);
  return w;
}

AnnWeights parse_ann_weights(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto read_layer = [&](std::vector<std::vector<double>>& w,
                        std::vector<double>& b) {
    std::string kw;
    std::size_t rows = 0, cols = 0;
    if (!(in >> kw >> rows >> cols) || kw != "layer")
      throw ParseError("expected 'layer <rows> <cols>'");
    w.assign(rows, std::vector<double>(cols));
    for (auto& row : w)
      for (double& v : row)
        if (!(in >> v)) throw ParseError("short weight row");
    b.assign(rows, 0.0);
    for (double& v : b)
      if (!(in >> v)) throw ParseError("short bias row");
  };
  AnnWeights w;
  read_layer(w.w1, w.b1);
  read_layer(w.w2, w.b2);
  read_layer(w.w3, w.b3);
  if (w.w1.size() != 6 || w.w2.size() != 6 || w.w3.size() != 1 ||
      (!w.w2.empty() && w.w2[0].size() != 6) ||
      (!w.w3.empty() && w.w3[0].size() != 6))
    throw ShapeMismatch("weight file is not a n->6->6->1 network");
  return w;
}

AnnWeights parse_ann_weights_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_ann_weights(os.str());
}

std::string write_ann_weights(const AnnWeights& w) {
  std::ostringstream os;
  auto layer = [&](const std::vector<std::vector<double>>& m,
                   const std::vector<double>& b) {
    os << "layer " << m.size() << " " << (m.empty() ? 0 : m[0].size()) << "\n";
    for (const auto& row : m) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? " " : "") << format_shortest(row[i]);
      os << "\n";
    }
    for (std::size_t i = 0; i < b.size(); ++i)
      os << (i ? " " : "") << format_shortest(b[i]);
    os << "\n";
  };
  layer(w.w1, w.b1);
  layer(w.w2, w.b2);
  layer(w.w3, w.b3);
  return os.str();
}

// ---------------------------------------------------------------------------

double heating_curve(double t_amb, double t_fl_max, double t_fl_min) {
  double t = std::min(std::max(t_amb, -12.0), 20.0);
  return t_fl_max + (t + 12.0) / 32.0 * (t_fl_min - t_fl_max);
}

// ---------------------------------------------------------------------------
// Bundled models.

namespace {

// Grid source with an indexed price and a specific emission factor.
ComponentPtr make_source(const std::string& name, double price, double co2,
                         double hi) {
  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef p = c->make_parameter("price", price, /*indexed=*/true);
  SymbolRef supply = c->make_operational_variable("supply", 0.0, hi);
  c->add_connector("out", -Expr(supply), Polarity::Output);
  c->add_expression("variable_costs", Expr(p) * Expr(supply));
  c->add_expression("emissions", Expr(co2) * Expr(supply));
  return c;
}

ComponentPtr make_demand(const std::string& name) {
  auto c = std::make_shared<ComponentModel>(name);
  SymbolRef q = c->make_parameter("Q_dem", std::nullopt, /*indexed=*/true);
  c->add_connector("in", Expr(q), Polarity::Bidirectional);
  return c;
}

}  // namespace

BundledModel make_mini_ies() {
  auto sys = std::make_shared<SystemModel>("IES");

  ConversionSpec boiler;
  boiler.c_ref = 100.0;
  boiler.m = 0.8;
  boiler.eta = 0.9;
  boiler.e_nom_lo = 0.0;
  boiler.e_nom_hi = 10.0;
  boiler.min_partload = 0.2;
  sys->add_component(conversion_component("B", boiler));

  ConversionSpec hp;
  hp.c_ref = 500.0;  // linear cost, 500 per kW
  hp.m = 1.0;
  hp.eta = 3.0;  // COP
  hp.e_nom_lo = 0.0;
  hp.e_nom_hi = 10.0;
  hp.min_partload = 0.0;
  sys->add_component(conversion_component("HP", hp));

  StorageSpec tes;
  tes.eta_in = 0.95;
  tes.eta_out = 0.95;
  tes.cap_lo = 0.0;
  tes.cap_hi = 20.0;
  tes.with_build = true;
  tes.c_spec = 30.0;
  tes.c_fix = 500.0;
  sys->add_component(storage_component("TES", tes));

  sys->add_component(make_source("GG", 0.06, 0.2, 1000.0));
  sys->add_component(make_source("PG", 0.18, 0.4, 1000.0));
  sys->add_component(make_demand("DEM"));

  sys->connect("heat", {"B.out", "HP.out", "TES.port", "DEM.in"});
  sys->connect("gas", {"GG.out", "B.in"});
  sys->connect("power", {"PG.out", "HP.in"});

  Expr invest = sys->aggregate_component_expressions("investment_costs");
  Expr varc = sys->aggregate_component_expressions("variable_costs");
  Expr emis = sys->aggregate_component_expressions("emissions");

  ScenarioSet sc{{{"winter", 0.5}, {"summer", 0.5}}};
  TimeGrid grid;
  grid.set_uniform("winter", {"t1", "t2"}, 2.0);
  grid.set_uniform("summer", {"t1", "t2"}, 2.0);

  Expr annuity(0.1);
  BundledModel m{sys,
                 create_problem(sys, annuity * invest, varc, sc, grid),
                 {},
                 annuity * invest + varc,
                 emis};

  SymbolRef dem = sys->resolve_symbol("IES.DEM.Q_dem");
  m.problem.set_data(dem, "winter", "t1", 8.0);
  m.problem.set_data(dem, "winter", "t2", 6.0);
  m.problem.set_data(dem, "summer", "t1", 3.0);
  m.problem.set_data(dem, "summer", "t2", 2.0);

  m.grids.targets = {
      {"IES.B.inv", {{"IES.B.E_nom", {0.0, 2.5, 5.0, 7.5, 10.0}}}},
      {"IES.B.partload_ub",
       {{"IES.B.E_nom", {0.0, 10.0}}, {"IES.B.on", {0.0, 1.0}}}},
      {"IES.B.partload_lb",
       {{"IES.B.E_nom", {0.0, 10.0}}, {"IES.B.on", {0.0, 1.0}}}},
      {"IES.HP.partload_ub",
       {{"IES.HP.E_nom", {0.0, 10.0}}, {"IES.HP.on", {0.0, 1.0}}}},
  };
  return m;
}

BundledModel make_building_dr() {
  auto sys = std::make_shared<SystemModel>("BLD");

  sys->add_component(
      thermal_zone("AIR", 1.2, 300.0, 1000.0, 292.0, 299.0, 295.0));
  sys->add_component(
      thermal_zone("CORE", 2400.0, 10.0, 880.0, 288.0, 308.0, 295.0));
  sys->add_component(heat_transfer("HTCA", 2.0, 30.0));   // core -> air
  sys->add_component(heat_transfer("HTAW", 0.5, 50.0));   // air -> ambient
  sys->add_component(make_source("PG", 0.18, 0.4, 20000.0));

  // direct electric heaters with COP 3 heat pumps
  for (const char* h : {"HA", "HC"}) {
    auto heater = std::make_shared<ComponentModel>(h);
    SymbolRef q = heater->make_operational_variable("Q", 0.0, 8000.0);
    heater->add_connector("out", -Expr(q), Polarity::Output);
    heater->add_connector("in", Expr(q) / Expr(3.0), Polarity::Input);
    sys->add_component(heater);
  }

  SymbolRef t_amb = sys->make_parameter("T_amb", std::nullopt, true);

  sys->connect("power", {"PG.out", "HA.in", "HC.in"});
  sys->connect("air_heat", {"HA.out", "AIR.heat", "HTCA.heat_B", "HTAW.heat_A"});
  sys->connect("core_heat", {"HC.out", "CORE.heat", "HTCA.heat_A"});

  SymbolRef t_air = sys->resolve_symbol("BLD.AIR.T");
  SymbolRef t_core = sys->resolve_symbol("BLD.CORE.T");
  sys->add_constraint("ca_hot", Expr(sys->resolve_symbol("BLD.HTCA.T_A")),
                      Relation::Eq, Expr(t_core));
  sys->add_constraint("ca_cold", Expr(sys->resolve_symbol("BLD.HTCA.T_B")),
                      Relation::Eq, Expr(t_air));
  sys->add_constraint("aw_hot", Expr(sys->resolve_symbol("BLD.HTAW.T_A")),
                      Relation::Eq, Expr(t_air));
  sys->add_constraint("aw_cold", Expr(sys->resolve_symbol("BLD.HTAW.T_B")),
                      Relation::Eq, Expr(t_amb));

  Expr varc = sys->aggregate_component_expressions("variable_costs");
  Expr emis = sys->aggregate_component_expressions("emissions");

  ScenarioSet sc{{{"day", 1.0}}};
  TimeGrid grid;
  grid.set_uniform("day", {"t0", "t1", "t2", "t3", "t4", "t5"}, 86400.0);

  BundledModel m{sys, create_problem(sys, Expr(0.0), varc, sc, grid),
                 {}, varc, emis};

  const double amb[6] = {278.0, 276.0, 280.0, 285.0, 283.0, 279.0};
  const double price[6] = {0.12, 0.10, 0.25, 0.30, 0.22, 0.14};
  SymbolRef pg_price = sys->resolve_symbol("BLD.PG.price");
  for (int i = 0; i < 6; ++i) {
    std::string t = "t" + std::to_string(i);
    m.problem.set_data(t_amb, "day", t, amb[i]);
    m.problem.set_data(pg_price, "day", t, price[i]);
  }
  return m;
}

BundledModel make_dh_network() {
  auto sys = std::make_shared<SystemModel>("DHN");

  PipeNetworkSpec nw;
  nw.segments = {{200.0, 20000.0}, {300.0, 30000.0},
                 {250.0, 25000.0}, {150.0, 15000.0}};
  nw.u_nw = 0.035;
  nw.t_gr = 8.0;
  nw.cp = 4.18;
  nw.consumers = {{"CG1", {0, 1}}, {"CG2", {0, 2, 3}}};
  sys->add_component(pipe_network("NW", nw));

  CarnotSpec hp;  // defaults: eta_cop 0.6, q_max 400 kW, 500 per kW
  sys->add_component(carnot_heat_pump("HP", hp));
  sys->add_component(make_source("WH", 0.0, 0.0, 1000.0));
  sys->add_component(make_source("PG", 0.18, 0.4, 1000.0));
  sys->add_component(make_demand("CG1"));
  sys->add_component(make_demand("CG2"));

  // consumer flow-temperature requirements from the heating curves
  SymbolRef fl1 = sys->make_parameter("T_fl_req_CG1", std::nullopt, true);
  SymbolRef fl2 = sys->make_parameter("T_fl_req_CG2", std::nullopt, true);

  sys->connect("center", {"HP.heat_out", "NW.center"});
  sys->connect("waste_heat", {"WH.out", "HP.heat_in"});
  sys->connect("power", {"PG.out", "HP.power"});
  sys->connect("cg1", {"NW.to_CG1", "CG1.in"});
  sys->connect("cg2", {"NW.to_CG2", "CG2.in"});

  SymbolRef t_fl = sys->resolve_symbol("DHN.NW.T_fl");
  SymbolRef dt_fl = sys->resolve_symbol("DHN.NW.dT_fl");
  sys->add_constraint("fl_req_CG1", Expr(t_fl) - Expr(dt_fl), Relation::Ge,
                      Expr(fl1));
  sys->add_constraint("fl_req_CG2", Expr(t_fl) - Expr(dt_fl), Relation::Ge,
                      Expr(fl2));
  // condenser water is network water (Celsius -> Kelvin)
  sys->add_constraint("hp_con_re",
                      Expr(sys->resolve_symbol("DHN.HP.T_re_con")),
                      Relation::Eq, Expr(t_fl) + Expr(273.15));
  sys->add_constraint("hp_con_fl",
                      Expr(sys->resolve_symbol("DHN.HP.T_fl_con")),
                      Relation::Eq,
                      Expr(sys->resolve_symbol("DHN.NW.T_re")) + Expr(273.15));

  Expr invest = sys->aggregate_component_expressions("investment_costs");
  Expr varc = sys->aggregate_component_expressions("variable_costs");
  Expr emis = sys->aggregate_component_expressions("emissions");

  ScenarioSet sc{{{"winter", 0.6}, {"summer", 0.4}}};
  TimeGrid grid;
  grid.set_uniform("winter", {"t1", "t2"}, 2.0);
  grid.set_uniform("summer", {"t1", "t2"}, 2.0);

  Expr annuity(0.08);
  BundledModel m{sys, create_problem(sys, annuity * invest, varc, sc, grid),
                 {}, annuity * invest + varc, emis};

  SymbolRef d1 = sys->resolve_symbol("DHN.CG1.Q_dem");
  SymbolRef d2 = sys->resolve_symbol("DHN.CG2.Q_dem");
  const double amb_w = -5.0, amb_s = 15.0;
  struct Row {
    const char* s;
    const char* t;
    double amb, q1, q2;
  };
  const Row rows[] = {{"winter", "t1", amb_w, 300.0, 180.0},
                      {"winter", "t2", amb_w, 250.0, 150.0},
                      {"summer", "t1", amb_s, 60.0, 40.0},
                      {"summer", "t2", amb_s, 40.0, 25.0}};
  for (const Row& r : rows) {
    m.problem.set_data(d1, r.s, r.t, r.q1);
    m.problem.set_data(d2, r.s, r.t, r.q2);
    m.problem.set_data(fl1, r.s, r.t, heating_curve(r.amb, 40.0, 35.0));
    m.problem.set_data(fl2, r.s, r.t, heating_curve(r.amb, 70.0, 55.0));
  }
  return m;
}

BundledModel make_orc(std::uint64_t ann_seed) {
  auto sys = std::make_shared<SystemModel>("ORC");

  // five decisions, everything else is an expression of them
  Expr mdot(sys->make_operational_variable("mdot", 50.0, 500.0));
  Expr p1(sys->make_operational_variable("p1", 1.0, 5.0));
  Expr p2(sys->make_operational_variable("p2", 5.0, 40.0));
  Expr h2r(sys->make_operational_variable("h2r", 200.0, 800.0));
  Expr h6is(sys->make_operational_variable("h6is", 300.0, 900.0));

  SymbolRef mcp_gb = sys->make_parameter("mcp_gb", 500.0);  // brine kW/K

  // property surrogates (stubs standing in for trained networks)
  AnnWeights w_h_liq = random_ann_weights(2, ann_seed + 1);
  AnnWeights w_t_liq = random_ann_weights(2, ann_seed + 2);
  AnnWeights w_h_sat_liq = random_ann_weights(1, ann_seed + 3);
  AnnWeights w_s_sat_liq = random_ann_weights(1, ann_seed + 4);
  AnnWeights w_t_sat = random_ann_weights(1, ann_seed + 5);
  AnnWeights w_h_sat_vap = random_ann_weights(1, ann_seed + 6);
  AnnWeights w_s_vap = random_ann_weights(2, ann_seed + 7);
  AnnWeights w_t_vap = random_ann_weights(2, ann_seed + 8);
  auto h_liq = [&](Expr p, Expr s) {
    return ann_surrogate(w_h_liq, {p, s}).output * Expr(100.0) + Expr(300.0);
  };
  auto t_liq = [&](Expr p, Expr h) {
    return ann_surrogate(w_t_liq, {p, h * Expr(0.01)}).output * Expr(50.0) +
           Expr(320.0);
  };
  auto h_sat_liq = [&](Expr p) {
    return ann_surrogate(w_h_sat_liq, {p}).output * Expr(100.0) + Expr(320.0);
  };
  auto s_sat_liq = [&](Expr p) {
    return ann_surrogate(w_s_sat_liq, {p}).output + Expr(1.5);
  };
  auto t_sat = [&](Expr p) {
    return ann_surrogate(w_t_sat, {p}).output * Expr(40.0) + Expr(330.0);
  };
  auto h_sat_vap = [&](Expr p) {
    return ann_surrogate(w_h_sat_vap, {p}).output * Expr(100.0) + Expr(600.0);
  };
  auto s_vap = [&](Expr p, Expr h) {
    return ann_surrogate(w_s_vap, {p, h * Expr(0.01)}).output + Expr(2.2);
  };
  auto t_vap = [&](Expr p, Expr h) {
    return ann_surrogate(w_t_vap, {p, h * Expr(0.01)}).output * Expr(60.0) +
           Expr(360.0);
  };

  // state chain
  Expr h1 = h_sat_liq(p1);
  Expr s1 = s_sat_liq(p1);
  Expr h2is = h_liq(p2, s1);
  auto pump = pump_turbine("P", FlowMachine::Pump, 0.8, mdot, h1, h2is);
  Expr p_p = pump->get_expression("P");
  Expr h2 = pump->get_expression("h_out");
  Expr t2 = t_liq(p2, h2);
  Expr t2r = t_liq(p2, h2r);
  Expr h3 = h_sat_liq(p2);
  Expr h4 = h_sat_vap(p2);
  Expr t_ev = t_sat(p2);

  Expr mcp_gb_e(mcp_gb);
  auto eco = heat_exchanger(
      "ECO", {std::nullopt, std::nullopt, std::nullopt, mcp_gb_e, std::nullopt,
              Expr(357.0)},
      {mdot, h2r, h3, std::nullopt, std::nullopt, std::nullopt});
  Expr t_gb_b = eco->get_expression("hot_in");
  auto eva = heat_exchanger(
      "EVA", {std::nullopt, std::nullopt, std::nullopt, mcp_gb_e, std::nullopt,
              t_gb_b},
      {mdot, h3, h4, std::nullopt, std::nullopt, std::nullopt});
  Expr t_gb_a = eva->get_expression("hot_in");
  auto sup = heat_exchanger(
      "SUP", {std::nullopt, std::nullopt, std::nullopt, mcp_gb_e, Expr(408.0),
              t_gb_a},
      {mdot, h4, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
  Expr h5 = sup->get_expression("cold_out");
  Expr t5 = t_vap(p2, h5);
  Expr s5 = s_vap(p2, h5);

  auto turbine = pump_turbine("T", FlowMachine::Turbine, 0.88, mdot, h5, h6is);
  Expr p_t = turbine->get_expression("P");
  Expr h6 = turbine->get_expression("h_out");
  Expr t6 = t_vap(p1, h6);

  auto rec = heat_exchanger(
      "REC",
      {mdot, h6, std::nullopt, std::nullopt, std::nullopt, std::nullopt},
      {mdot, h2, h2r, std::nullopt, std::nullopt, std::nullopt});
  Expr h6r = rec->get_expression("hot_out");
  Expr t6r = t_vap(p1, h6r);

  CoolingSpec cs_spec;  // default fan parameters, smooth max guard
  auto cs = cooling_system("CS", cs_spec, mdot * (h_sat_vap(p1) - h1) *
                                              Expr(1000.0),
                           t_sat(p1));
  Expr mcp_cw = cs->get_expression("mcp_cw");
  Expr p_cs = cs->get_expression("P_CS") / Expr(1000.0);  // back to kW

  auto con = heat_exchanger(
      "CON", {mdot, h6r, h1, std::nullopt, std::nullopt, std::nullopt},
      {std::nullopt, std::nullopt, std::nullopt, mcp_cw / Expr(1000.0),
       Expr(288.0), std::nullopt});
  Expr t_cw_out = con->get_expression("cold_out");

  for (auto& comp : {pump, turbine, eco, eva, sup, rec, con, cs})
    sys->add_component(comp);

  // the 32-row reduced-space constraint set
  sys->add_constraint("isentropic", s_vap(p1, h6is), Relation::Eq, s5);
  sys->add_constraint("pressure_order", p2, Relation::Ge, p1 + Expr(1.0));
  sys->add_constraint("pump_rise", h2is, Relation::Ge, h1);
  sys->add_constraint("preheat_order", h2r, Relation::Ge, h2);
  sys->add_constraint("subcool_margin", h3, Relation::Ge, h2r);
  sys->add_constraint("superheat_margin", h5, Relation::Ge, h4);
  sys->add_constraint("expansion_order", h5, Relation::Ge, h6is);
  sys->add_constraint("rec_vapor_margin", h6r, Relation::Ge, h_sat_vap(p1));
  sys->add_constraint("net_power", p_t, Relation::Ge, p_p + p_cs);
  sys->add_constraint("condenser_pinch", t_sat(p1), Relation::Ge,
                      Expr(288.0 + 10.0 + 1e-3));
  sys->add_constraint("eco_pinch_in", Expr(357.0) - t2r, Relation::Ge,
                      Expr(10.0));
  sys->add_constraint("eco_pinch_out", t_gb_b - t_ev, Relation::Ge,
                      Expr(10.0));
  sys->add_constraint("eva_pinch", t_gb_a - t_ev, Relation::Ge, Expr(10.0));
  sys->add_constraint("sup_pinch", Expr(408.0) - t5, Relation::Ge, Expr(10.0));
  sys->add_constraint("rec_pinch_hot", t6 - t2r, Relation::Ge, Expr(5.0));
  sys->add_constraint("rec_pinch_cold", t6r - t2, Relation::Ge, Expr(5.0));
  sys->add_constraint("con_pinch", t6r - t_cw_out, Relation::Ge, Expr(5.0));
  const double fracs[3] = {0.25, 0.5, 0.75};
  for (int i = 0; i < 3; ++i) {
    Expr f(fracs[i]);
    std::string n = std::to_string(i + 1);
    sys->add_constraint("eco_profile_" + n,
                        Expr(357.0) + f * (t_gb_b - Expr(357.0)) -
                            t_liq(p2, h2r + f * (h3 - h2r)),
                        Relation::Ge, Expr(10.0));
    sys->add_constraint("sup_profile_" + n,
                        t_gb_a + f * (Expr(408.0) - t_gb_a) -
                            t_vap(p2, h4 + f * (h5 - h4)),
                        Relation::Ge, Expr(10.0));
    sys->add_constraint("con_profile_" + n,
                        t_vap(p1, h1 + f * (h6r - h1)) -
                            (Expr(288.0) + f * (t_cw_out - Expr(288.0))),
                        Relation::Ge, Expr(2.0));
  }
  sys->add_constraint("rec_profile_1",
                      t_vap(p1, h6r + Expr(1.0 / 3.0) * (h6 - h6r)) -
                          t_liq(p2, h2 + Expr(1.0 / 3.0) * (h2r - h2)),
                      Relation::Ge, Expr(5.0));
  sys->add_constraint("rec_profile_2",
                      t_vap(p1, h6r + Expr(2.0 / 3.0) * (h6 - h6r)) -
                          t_liq(p2, h2 + Expr(2.0 / 3.0) * (h2r - h2)),
                      Relation::Ge, Expr(5.0));
  sys->add_constraint("turbine_power_cap", p_t, Relation::Le, Expr(20000.0));
  sys->add_constraint("pump_power_cap", p_p, Relation::Le, Expr(2000.0));
  sys->add_constraint("cooling_power_cap", p_cs, Relation::Le, Expr(2000.0));
  sys->add_constraint("cw_outlet_cap", t_cw_out, Relation::Le, Expr(313.0));

  Expr p_net = p_t - p_p - p_cs;
  ScenarioSet sc{{{"nominal", 1.0}}};
  TimeGrid grid;
  grid.set_uniform("nominal", {"t0"}, 1.0);

  BundledModel m{sys, create_problem(sys, Expr(0.0), -p_net, sc, grid),
                 {}, -p_net, p_cs};
  return m;
}

std::vector<std::string> bundled_model_ids() {
  return {"mini-ies", "building-dr", "dh-network", "orc"};
}

BundledModel make_bundled(const std::string& id, std::uint64_t seed) {
  if (id == "mini-ies") return make_mini_ies();
  if (id == "building-dr") return make_building_dr();
  if (id == "dh-network") return make_dh_network();
  if (id == "orc") return make_orc(seed);
  throw BadParams("unknown bundled model: " + id);
}

}  // namespace enopt
