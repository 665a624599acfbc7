#pragma once

#include "spectral/model.hpp"
#include "spectral/polybasis.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spectral::vpp {

/// Which family of inputs a lumped forecast error perturbs.
enum class GermRole {
    load,             // baseline demand, multiplicative
    solar,            // PV availability, multiplicative
    temperature,      // outdoor temperature, additive [K]
    ev_demand,        // daily EV energy, multiplicative
    day_ahead,        // day-ahead price, additive (also moves imbalance prices)
    capacity,         // reserve-capacity prices up and down, additive
    activation_up,    // upward activation price, additive
    activation_down,  // downward activation price, additive
};

std::string_view to_string(GermRole role);
GermRole parse_germ_role(std::string_view name);

struct GermSpec {
    GermRole role;
    std::string name;
    Distribution distribution;
};

/// The eight lumped forecast errors of the desk instance.
std::vector<GermSpec> default_uncertainty();

struct Line {
    std::size_t from = 0;  // parent bus, closer to the substation
    std::size_t to = 0;
    double r = 0.0;        // per unit on base_power
    double x = 0.0;
    double rating = 0.0;   // MW
};

struct Network {
    std::size_t buses = 1;  // bus 0 is the substation
    double base_power = 1.0;  // MVA
    double v_min = 0.95;
    double v_max = 1.05;
    std::vector<Line> lines;
};

struct Prices {
    std::vector<double> day_ahead;        // per step, currency/MWh
    std::vector<double> capacity_up;      // per reserve block, currency/MW/h
    std::vector<double> capacity_down;
    std::vector<double> activation_up;    // per step, currency/MWh
    std::vector<double> activation_down;
    double activation_share_up = 0.25;    // expected activated share of an activation bid
    double activation_share_down = 0.25;
    double imbalance_spread = 0.25;       // surplus paid (1 - s) DAM, deficit charged (1 + s) DAM
    double tariff = 206.5;                // currency/MWh withdrawn by end customers
};

struct Market {
    double day_ahead_limit = 1.0;   // |DAM schedule| per step, MW
    double prequalified_up = 0.0;   // MW
    double prequalified_down = 0.0;
};

struct BaseLoad {
    std::vector<double> profile;             // MW per step
    std::map<std::size_t, double> shares;    // bus -> share, sums to one
    double reactive_ratio = 0.3;             // Q / P
};

struct Battery {
    std::size_t bus = 1;
    double power = 0.0;      // MW
    double energy_min = 0.0; // MWh
    double energy_max = 0.0;
    double initial = 0.0;
    double charge_efficiency = 1.0;
    double discharge_efficiency = 1.0;
    double wear_cost = 0.0;  // currency/MWh throughput
};

struct PvPlant {
    std::size_t bus = 1;
    std::vector<double> availability;  // MW per step
};

/// Lumped first-order building model with an electric heat pump.
struct HeatPump {
    std::size_t bus = 1;
    double power = 0.0;           // MW electric
    double cop = 3.0;
    double time_constant = 20.0;  // h
    double resistance = 90.0;     // K/MW thermal
    double comfort_min = 20.0;
    double comfort_max = 23.0;
    double initial = 21.5;
    std::vector<double> outdoor;  // degC per step
    double reactive_ratio = 0.3;
};

/// Shiftable daily charging demand of a lumped EV fleet.
struct EvFleet {
    std::size_t bus = 1;
    double power = 0.0;              // MW
    double energy = 0.0;             // MWh per horizon
    double efficiency = 1.0;
    std::vector<double> plugged_in;  // share of chargers available per step, [0, 1]
    double reactive_ratio = 0.0;
};

struct InstanceConfig {
    std::string name = "vpp";
    std::size_t horizon = 24;
    double step_hours = 1.0;
    std::size_t reserve_block_steps = 4;
    Prices prices;
    Market market;
    Network network;
    BaseLoad load;
    Battery battery;
    std::optional<PvPlant> pv;
    std::optional<HeatPump> heat_pump;
    std::optional<EvFleet> ev;
    std::vector<GermSpec> uncertainty;
    /// Multiplies every germ's spread about its mean; 0 replaces germs by their means.
    double uncertainty_scale = 1.0;

    std::size_t reserve_blocks() const { return (horizon + reserve_block_steps - 1) / reserve_block_steps; }
    /// Throws InputError naming the first violated invariant.
    void validate() const;
};

/// Desk instance: 24 hourly steps, 4 h reserve blocks, 5-bus feeder, battery,
/// PV, heat pump, EV fleet and the eight default germs.
InstanceConfig desk_instance();
/// Battery-only two-step arbitrage with a hand-solvable optimum.
InstanceConfig micro_arbitrage();

InstanceConfig parse_config(const std::string& json_text);
InstanceConfig load_config(const std::filesystem::path& path);
std::string to_json(const InstanceConfig& config);

/**
 * Two-stage model. First stage: "dam" (export-positive schedule per step),
 * "cap_up" and "cap_dn" (reserve capacity per block). Second stage per step:
 * battery charge/discharge/state of charge, PV output, heat-pump power and
 * indoor temperature, EV charging, activation bids up/down and imbalance
 * surplus/deficit. Line flows and squared voltages of the radial feeder are
 * substituted (lossless LinDistFlow) so the network appears as inequalities.
 */
StochModel build_instance(const InstanceConfig& config);

/// Hours represented by one step of every first-stage block (for comparisons).
std::map<std::string, double> decision_weights(const InstanceConfig& config);

} // namespace spectral::vpp
