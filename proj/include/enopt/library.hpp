#pragma once

// Reusable component builders for integrated-energy-system models: generic
// conversion and storage units, building thermal zones, district-heating
// network pieces, and the reduced-space process components (heat exchangers,
// pump/turbine, cooling system, ANN property surrogates). Builders are pure
// constructors and thread-safe.
//
// Sign conventions for connectors: an Input connector expression is the
// amount drawn from a bus (>= 0 enforced), an Output connector expression is
// the negated amount supplied. Temperature ports are Bidirectional; a zone
// exposes +T and an exchanger exposes -T, so connecting the two equates them.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "enopt/flatten.hpp"

namespace enopt {

// ---------------------------------------------------------------------------
// Generic conversion unit: nonlinear investment cost C_I = c_ref * E_nom^m,
// conversion E_out = eta * E_in, and binary part-load gating
//   min_partload * E_nom * on <= E_out <= E_nom * on.
// Stored expressions: "investment_costs" (= C_I) and "variable_costs"
// (= price_in * E_in with the component's own indexed "price_in" parameter,
// default 0).
struct ConversionSpec {
  double c_ref = 1.0;   // reference investment cost, > 0
  double m = 1.0;       // cost exponent, in (0, 1]
  double eta = 1.0;     // base efficiency, > 0 (COP-style values > 1 allowed)
  // Variable base efficiency: when set, called with the fresh component so
  // the efficiency may reference its own symbols; overrides `eta`.
  std::function<Expr(ComponentModel&)> eta_builder;
  double e_nom_lo = 0.0, e_nom_hi = 1.0;
  double min_partload = 0.0;  // fraction of nominal output, in [0, 1)
};

ComponentPtr conversion_component(const std::string& name,
                                  const ConversionSpec& spec);

// ---------------------------------------------------------------------------
// Generic storage: state E with
//   dE/dt = eta_in * E_in - E_out / eta_out - E / tau,
// E <= capacity, optional build binary gating the capacity. tau may be
// infinity (no self-discharge). Initial charge is the "E_init" parameter.
struct StorageSpec {
  double eta_in = 1.0, eta_out = 1.0;  // in (0, 1]
  double tau = std::numeric_limits<double>::infinity();  // > 0 or inf
  double cap_lo = 0.0, cap_hi = 1.0;
  std::optional<double> rate_hi;  // charge/discharge bound; default cap_hi
  bool with_build = false;
  double c_spec = 0.0, c_fix = 0.0;  // investment_costs = c_spec*cap (+ c_fix*build)
  double e_init = 0.0;
};

ComponentPtr storage_component(const std::string& name, const StorageSpec& spec);

// ---------------------------------------------------------------------------
// Zero-dimensional thermal zone: state T with
//   rho * V * cp * dT/dt = Qdot_net,
// where Qdot_net is the net heat drawn through the "heat" connector.
// Connector "T" exposes the zone temperature (+T).
ComponentPtr thermal_zone(const std::string& name, double rho, double volume,
                          double cp, std::optional<double> t_lo = std::nullopt,
                          std::optional<double> t_hi = std::nullopt,
                          double t_init = 293.15);

// Heat transfer between two temperature ports: Qdot = U*A*(T_A - T_B), kept
// as the stored expression "Q" (reduced space, no flow variable). Connectors:
// "T_A"/"T_B" (expose -T), "heat_A" (draws Q from the A-side bus) and
// "heat_B" (supplies Q to the B-side bus).
ComponentPtr heat_transfer(const std::string& name, double u, double area);

// ---------------------------------------------------------------------------
// Carnot-efficiency heat pump:
//   Qdot <= build * q_max
//   P * T_re_con * eta_cop = Qdot * (T_re_con - T_re_eva)
//   mdot_eva*cp*(T_fl_eva - T_re_eva) + P = mdot_con*cp*(T_re_con - T_fl_con)
// Stored "investment_costs" = c_spec * q_max * build.
struct CarnotSpec {
  double eta_cop = 0.6;  // efficiency relative to Carnot, in (0, 1]
  double q_max = 400.0;  // maximum nominal size (kW)
  double cp = 4.18;      // water heat capacity (kJ/kgK)
  double c_spec = 500.0; // specific investment cost
};

ComponentPtr carnot_heat_pump(const std::string& name, const CarnotSpec& spec);

// ---------------------------------------------------------------------------
// Aggregated pipe network with per-segment build decisions:
//   l_NW = sum_s b_s * l_s
//   mcp * dT_fl = U_NW * l_NW * (T_fl - T_gr)
//   mcp * dT_re = U_NW * l_NW * (T_re + dT_re - T_gr)
// plus the operational identity T_fl = T_re + 15. Consumers are gated by
// their required segments (use_<name> <= b_s) and capped by a big-M on the
// use binary. Stored "investment_costs" = sum_s b_s * cost_s.
struct PipeSegment {
  double length = 0.0;  // m
  double cost = 0.0;
};

struct PipeConsumer {
  std::string name;
  std::vector<std::size_t> segments;  // indices of required segments
};

struct PipeNetworkSpec {
  std::vector<PipeSegment> segments;
  double u_nw = 0.035;  // W/(m K)
  double t_gr = 8.0;    // ground temperature
  double cp = 4.18;
  double q_big = 1e6;   // consumer big-M
  std::vector<PipeConsumer> consumers;
};

ComponentPtr pipe_network(const std::string& name, const PipeNetworkSpec& spec);

// ---------------------------------------------------------------------------
// Heat exchanger with an automatic reduced-space reformulation of the energy
// balance Qh = Qc. A side is declared either via mass flow and specific
// enthalpies or via heat-capacity flow and temperatures; mixing both forms
// on one side throws OverdeterminedSide. Leaving the outlet of exactly one
// side unset makes the builder isolate it symbolically; the result is stored
// as expression "hot_out" / "cold_out" and no constraint is emitted. Both
// outlets unset throws UnderdeterminedBothSides. When both sides are fully
// determined the balance is kept as constraint "EB" unless it folds away.
struct HeSide {
  // enthalpy form (working fluid)
  std::optional<Expr> mdot, h_in, h_out;
  // temperature form (water / brine)
  std::optional<Expr> mcp, T_in, T_out;
};

ComponentPtr heat_exchanger(const std::string& name, const HeSide& hot,
                            const HeSide& cold, bool reduced = true);

// ---------------------------------------------------------------------------
// Pump / turbine with constant isentropic efficiency. Reduced space: the
// power and the real outlet enthalpy are stored expressions,
//   pump:    "P" = mdot * (h_is_out - h_in) / eta_is
//   turbine: "P" = mdot * (h_in - h_is_out) * eta_is
//   "h_out" = h_in +/- the efficiency-scaled enthalpy difference.
enum class FlowMachine { Pump, Turbine };

ComponentPtr pump_turbine(const std::string& name, FlowMachine kind,
                          double eta_is, Expr mdot, Expr h_in, Expr h_is_out);
// Convenience overload creating own operational variables mdot, h_in,
// h_is_out.
ComponentPtr pump_turbine(const std::string& name, FlowMachine kind,
                          double eta_is);

// ---------------------------------------------------------------------------
// Fan-based cooling system. From the condenser duty Q and the saturation
// temperature T_sat, the pinch assumption gives
//   mcp_cw = Q / max(1e-5, T_sat - dT_min - T_cw_in)
// (smooth_max with `eps` when smooth is set), and with mcp_air = mcp_cw
//   P_CS = mcp_air * dp_fan / (cp_air * rho_air * eta_fan).
// All three are stored expressions.
struct CoolingSpec {
  double dp_fan = 170.0;   // Pa
  double eta_fan = 0.65;
  double cp_air = 1000.0;  // J/(kg K)
  double rho_air = 1.2;    // kg/m^3
  double dt_min = 10.0;    // pinch temperature difference (K)
  double t_cw_in = 288.0;  // cooling water inlet (K)
  bool smooth = true;
  double eps = 1e-4;
};

ComponentPtr cooling_system(const std::string& name, const CoolingSpec& spec,
                            Expr q, Expr t_sat);
ComponentPtr cooling_system(const std::string& name, const CoolingSpec& spec);

// ---------------------------------------------------------------------------
// Feedforward property surrogate, fixed shape n_in -> 6 -> 6 -> 1 with tanh
// hidden activations and a linear output.
struct AnnWeights {
  std::vector<std::vector<double>> w1, w2, w3;  // [6][n_in], [6][6], [1][6]
  std::vector<double> b1, b2, b3;               // [6], [6], [1]
};

struct AnnSurrogate {
  std::vector<Expr> inputs;
  Expr output;  // closed-form expression
};

AnnSurrogate ann_surrogate(const AnnWeights& w, const std::vector<Expr>& inputs);

AnnWeights random_ann_weights(std::size_t n_in, std::uint64_t seed,
                              double scale = 0.5);

// Weight file: three "layer <rows> <cols>" blocks, each followed by `rows`
// lines of `cols` weights and one line of `rows` biases.
AnnWeights parse_ann_weights(std::string_view text);
AnnWeights parse_ann_weights_file(const std::string& path);
std::string write_ann_weights(const AnnWeights& w);

// ---------------------------------------------------------------------------
// Linear heating curve through (-12 C, t_fl_max) and (20 C, t_fl_min),
// clamped outside [-12, 20] C.
double heating_curve(double t_amb, double t_fl_max, double t_fl_min);

// ---------------------------------------------------------------------------
// Bundled example models for the CLI and tests.
struct BundledModel {
  SystemPtr system;
  ProblemSpec problem;
  GridSpec grids;       // default linearization targets (may be empty)
  Expr objective_a;     // bi-objective pair for Pareto sweeps
  Expr objective_b;
};

BundledModel make_mini_ies();
BundledModel make_building_dr();
BundledModel make_dh_network();
BundledModel make_orc(std::uint64_t ann_seed = 1);

std::vector<std::string> bundled_model_ids();
// BadParams on unknown id.
BundledModel make_bundled(const std::string& id, std::uint64_t seed = 1);

}  // namespace enopt
