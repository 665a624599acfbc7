#include "spectral/vpp.hpp"

#include "spectral/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace spectral::vpp {

namespace {

using Json = nlohmann::ordered_json;

constexpr GermRole kRoles[] = {GermRole::load,      GermRole::solar,    GermRole::temperature,
                               GermRole::ev_demand, GermRole::day_ahead, GermRole::capacity,
                               GermRole::activation_up, GermRole::activation_down};

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError("vpp config: " + message);
}

void require_length(const std::vector<double>& v, std::size_t n, const std::string& what) {
    require(v.size() == n, what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
    for (double x : v) require(std::isfinite(x), what + " contains a non-finite value");
}

std::string indexed(const std::string& name, std::size_t i) {
    return name + "[" + std::to_string(i) + "]";
}

std::string indexed(const std::string& name, std::size_t i, std::size_t j) {
    return name + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

bool has_variable(const Expression& e) {
    return std::any_of(e.monomials().begin(), e.monomials().end(), [](const Monomial& m) {
        return !m.vars.empty() && m.coef != 0.0;
    });
}

/// Germ (or its frozen mean) standing in for one input family.
class Inputs {
public:
    Inputs(StochModel& model, const InstanceConfig& config) {
        for (const auto& g : config.uncertainty) {
            const auto& d = g.distribution;
            if (config.uncertainty_scale == 0.0) {
                fixed_[g.role] = d.mean();
                continue;
            }
            Distribution scaled = d;
            if (config.uncertainty_scale != 1.0) {
                const double k = config.uncertainty_scale;
                const auto& p = d.parameters();
                if (d.kind() == DistributionKind::normal) {
                    scaled = Distribution::normal(p[0], k * p[1]);
                } else if (d.kind() == DistributionKind::uniform) {
                    const double mid = 0.5 * (p[0] + p[1]), half = 0.5 * (p[1] - p[0]);
                    scaled = Distribution::uniform(mid - k * half, mid + k * half);
                } else {
                    throw InputError("vpp config: uncertainty_scale only applies to normal and uniform germs");
                }
            }
            germ_[g.role] = model.add_germ(g.name, scaled);
        }
    }

    /// base * (1 + xi)
    Expression relative(GermRole role, double base) const {
        if (auto it = germ_.find(role); it != germ_.end()) return Expression(base) + base * Expression(it->second);
        return Expression(base * (1.0 + fixed(role)));
    }

    /// base + xi
    Expression shifted(GermRole role, double base) const {
        if (auto it = germ_.find(role); it != germ_.end()) return Expression(base) + Expression(it->second);
        return Expression(base + fixed(role));
    }

private:
    double fixed(GermRole role) const {
        auto it = fixed_.find(role);
        return it == fixed_.end() ? 0.0 : it->second;
    }

    std::map<GermRole, GermRef> germ_;
    std::map<GermRole, double> fixed_;
};

Json to_json(const GermSpec& g) {
    return Json{{"role", to_string(g.role)},
                {"name", g.name},
                {"distribution", to_string(g.distribution.kind())},
                {"parameters", g.distribution.parameters()}};
}

template <class T>
T get(const Json& j, const char* key, const T& fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->template get<T>();
}

template <class T>
T need(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(std::string("vpp config: missing field '") + key + "'");
    return it->template get<T>();
}

} // namespace

std::string_view to_string(GermRole role) {
    switch (role) {
    case GermRole::load: return "load";
    case GermRole::solar: return "solar";
    case GermRole::temperature: return "temperature";
    case GermRole::ev_demand: return "ev_demand";
    case GermRole::day_ahead: return "day_ahead";
    case GermRole::capacity: return "capacity";
    case GermRole::activation_up: return "activation_up";
    case GermRole::activation_down: return "activation_down";
    }
    return "?";
}

GermRole parse_germ_role(std::string_view name) {
    for (auto r : kRoles) {
        if (to_string(r) == name) return r;
    }
    throw InputError("vpp config: unknown germ role '" + std::string(name) + "'");
}

std::vector<GermSpec> default_uncertainty() {
    // uniform with mean 10% and sd 5.77%: [0.1 - sqrt(3) sd, 0.1 + sqrt(3) sd] = [0, 0.2]
    const double ev_half = std::sqrt(3.0) * 0.0577;
    return {
        {GermRole::load, "xi_L", Distribution::normal(0.0, 0.1075)},
        {GermRole::solar, "xi_G", Distribution::normal(0.0, 0.0815)},
        {GermRole::temperature, "xi_T", Distribution::normal(0.0, 1.5)},
        {GermRole::ev_demand, "xi_EV", Distribution::uniform(0.10 - ev_half, 0.10 + ev_half)},
        {GermRole::day_ahead, "xi_DAM", Distribution::normal(0.0, 4.28)},
        {GermRole::capacity, "xi_RCM", Distribution::normal(0.0, 3.30)},
        {GermRole::activation_up, "xi_RAM_up", Distribution::normal(0.0, 32.08)},
        {GermRole::activation_down, "xi_RAM_dn", Distribution::normal(0.0, 21.25)},
    };
}

void InstanceConfig::validate() const {
    const std::size_t T = horizon;
    require(T >= 1, "horizon must be at least one step");
    require(step_hours > 0.0 && std::isfinite(step_hours), "step_hours must be positive");
    require(reserve_block_steps >= 1, "reserve_block_steps must be at least one");
    const std::size_t B = reserve_blocks();

    require_length(prices.day_ahead, T, "prices.day_ahead");
    require_length(prices.activation_up, T, "prices.activation_up");
    require_length(prices.activation_down, T, "prices.activation_down");
    require_length(prices.capacity_up, B, "prices.capacity_up");
    require_length(prices.capacity_down, B, "prices.capacity_down");
    require(prices.activation_share_up >= 0.0 && prices.activation_share_up <= 1.0,
            "activation_share_up must lie in [0, 1]");
    require(prices.activation_share_down >= 0.0 && prices.activation_share_down <= 1.0,
            "activation_share_down must lie in [0, 1]");
    require(prices.imbalance_spread >= 0.0 && prices.imbalance_spread < 1.0, "imbalance_spread must lie in [0, 1)");
    require(prices.tariff >= 0.0 && std::isfinite(prices.tariff), "tariff must be non-negative");

    require(market.day_ahead_limit > 0.0, "market.day_ahead_limit must be positive");
    require(market.prequalified_up >= 0.0 && market.prequalified_down >= 0.0,
            "prequalified capacities must be non-negative");

    require(network.buses >= 1, "network needs at least the substation bus");
    require(network.base_power > 0.0, "network.base_power must be positive");
    require(network.v_min > 0.0 && network.v_min < 1.0 && network.v_max > 1.0, "voltage band must contain 1 p.u.");
    require(network.lines.size() + 1 == network.buses, "a radial network with n buses has n - 1 lines");
    std::vector<bool> connected(network.buses, false);
    connected[0] = true;
    for (std::size_t i = 0; i < network.lines.size(); ++i) {
        const auto& l = network.lines[i];
        const std::string what = "line " + std::to_string(i);
        require(l.from < network.buses && l.to < network.buses, what + " references an unknown bus");
        require(connected[l.from], what + " starts at a bus not yet connected to the substation");
        require(!connected[l.to], what + " closes a loop");
        require(l.r >= 0.0 && l.x >= 0.0, what + " has a negative impedance");
        require(l.rating > 0.0, what + " needs a positive rating");
        connected[l.to] = true;
    }
    auto bus_ok = [&](std::size_t b, const std::string& what) {
        require(b >= 1 && b < network.buses, what + " must sit on a non-substation bus");
    };

    require_length(load.profile, T, "load.profile");
    for (double v : load.profile) require(v >= 0.0, "load.profile must be non-negative");
    double share = 0.0;
    for (const auto& [b, s] : load.shares) {
        bus_ok(b, "load share");
        require(s >= 0.0, "load shares must be non-negative");
        share += s;
    }
    require(std::abs(share - 1.0) <= 1e-9, "load shares must sum to one");

    bus_ok(battery.bus, "battery");
    require(battery.power > 0.0, "battery.power must be positive");
    require(battery.energy_max > 0.0, "battery.energy_max must be positive");
    require(battery.energy_min >= 0.0 && battery.energy_min < battery.energy_max,
            "battery energy band must be non-empty");
    require(battery.initial >= battery.energy_min && battery.initial <= battery.energy_max,
            "battery.initial must lie in the energy band");
    require(battery.charge_efficiency > 0.0 && battery.charge_efficiency <= 1.0,
            "battery.charge_efficiency must lie in (0, 1]");
    require(battery.discharge_efficiency > 0.0 && battery.discharge_efficiency <= 1.0,
            "battery.discharge_efficiency must lie in (0, 1]");
    require(battery.wear_cost >= 0.0, "battery.wear_cost must be non-negative");

    if (pv) {
        bus_ok(pv->bus, "pv");
        require_length(pv->availability, T, "pv.availability");
        for (double v : pv->availability) require(v >= 0.0, "pv.availability must be non-negative");
    }
    if (heat_pump) {
        const auto& h = *heat_pump;
        bus_ok(h.bus, "heat_pump");
        require(h.power > 0.0 && h.cop > 0.0 && h.time_constant > 0.0 && h.resistance > 0.0,
                "heat_pump power, cop, time_constant and resistance must be positive");
        require(h.comfort_min < h.comfort_max, "heat_pump comfort band must be non-empty");
        require(h.initial >= h.comfort_min && h.initial <= h.comfort_max, "heat_pump.initial must lie in the band");
        require_length(h.outdoor, T, "heat_pump.outdoor");
    }
    if (ev) {
        bus_ok(ev->bus, "ev");
        require(ev->power > 0.0, "ev.power must be positive");
        require(ev->energy >= 0.0, "ev.energy must be non-negative");
        require(ev->efficiency > 0.0 && ev->efficiency <= 1.0, "ev.efficiency must lie in (0, 1]");
        require_length(ev->plugged_in, T, "ev.plugged_in");
        for (double v : ev->plugged_in) require(v >= 0.0 && v <= 1.0, "ev.plugged_in must lie in [0, 1]");
    }

    require(uncertainty_scale >= 0.0 && std::isfinite(uncertainty_scale), "uncertainty_scale must be non-negative");
    for (std::size_t i = 0; i < uncertainty.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            require(uncertainty[i].role != uncertainty[j].role,
                    "role '" + std::string(to_string(uncertainty[i].role)) + "' is perturbed twice");
        }
    }
}

InstanceConfig desk_instance() {
    InstanceConfig c;
    c.name = "desk";
    c.horizon = 24;
    c.step_hours = 1.0;
    c.reserve_block_steps = 4;

    // March weekday shapes; EUR and CHF are treated at par
    c.prices.day_ahead = {78, 74, 71, 70, 72, 80, 95, 110, 105, 92, 80, 70,
                          62, 58, 60, 68, 80, 98, 120, 125, 110, 98, 90, 82};
    c.prices.capacity_up = {6, 5, 8, 9, 12, 10};
    c.prices.capacity_down = {5, 5, 4, 4, 6, 7};
    for (double p : c.prices.day_ahead) {
        c.prices.activation_up.push_back(p + 40.0);
        c.prices.activation_down.push_back(p - 40.0);
    }
    c.prices.activation_share_up = 0.2;
    c.prices.activation_share_down = 0.2;
    c.prices.imbalance_spread = 0.25;
    c.prices.tariff = 206.5;

    c.market.day_ahead_limit = 0.6;
    c.market.prequalified_up = 0.15;
    c.market.prequalified_down = 0.15;

    c.network.buses = 5;
    c.network.base_power = 1.0;
    c.network.v_min = 0.95;
    c.network.v_max = 1.05;
    c.network.lines = {{0, 1, 0.02, 0.01, 0.6}, {1, 2, 0.08, 0.03, 0.45}, {2, 3, 0.12, 0.04, 0.3},
                       {1, 4, 0.10, 0.04, 0.3}};

    const double shape[] = {0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.62, 0.78, 0.75, 0.65, 0.60, 0.62,
                            0.64, 0.60, 0.58, 0.60, 0.70, 0.88, 1.00, 0.97, 0.88, 0.75, 0.62, 0.52};
    for (double s : shape) c.load.profile.push_back(0.083 * s);
    c.load.shares = {{1, 0.3}, {2, 0.2}, {3, 0.25}, {4, 0.25}};
    c.load.reactive_ratio = 0.3;

    c.battery.bus = 2;
    c.battery.power = 0.305;
    c.battery.energy_max = 0.7625;  // 2.5 h
    c.battery.energy_min = 0.07625;
    c.battery.initial = 0.38125;
    c.battery.charge_efficiency = 0.95;
    c.battery.discharge_efficiency = 0.95;
    c.battery.wear_cost = 4.0;

    const double solar[] = {0, 0, 0, 0, 0, 0, 0.01, 0.06, 0.16, 0.30, 0.43, 0.53,
                            0.57, 0.55, 0.47, 0.35, 0.20, 0.07, 0.01, 0, 0, 0, 0, 0};
    PvPlant pv;
    pv.bus = 3;
    for (double s : solar) pv.availability.push_back(0.375 * s);
    c.pv = pv;

    HeatPump hp;
    hp.bus = 4;
    hp.power = 0.147;
    hp.cop = 3.0;
    hp.time_constant = 20.0;
    hp.resistance = 90.0;
    hp.comfort_min = 20.0;
    hp.comfort_max = 23.0;
    hp.initial = 21.5;
    hp.outdoor = {3.0, 2.5, 2.0, 1.8, 1.5, 1.5, 2.0, 3.0, 4.5, 6.0, 7.5, 9.0,
                  10.0, 10.5, 10.5, 10.0, 9.0, 7.5, 6.5, 5.5, 5.0, 4.5, 4.0, 3.5};
    hp.reactive_ratio = 0.3;
    c.heat_pump = hp;

    EvFleet ev;
    ev.bus = 3;
    ev.power = 0.066;
    ev.energy = 0.376;
    ev.efficiency = 0.92;
    for (std::size_t t = 0; t < 24; ++t) ev.plugged_in.push_back(t < 7 || t >= 18 ? 1.0 : 0.2);
    c.ev = ev;

    c.uncertainty = default_uncertainty();
    c.uncertainty_scale = 1.0;
    return c;
}

InstanceConfig micro_arbitrage() {
    InstanceConfig c;
    c.name = "micro";
    c.horizon = 2;
    c.step_hours = 1.0;
    c.reserve_block_steps = 2;
    c.prices.day_ahead = {20.0, 100.0};
    c.prices.capacity_up = {0.0};
    c.prices.capacity_down = {0.0};
    c.prices.activation_up = {0.0, 0.0};
    c.prices.activation_down = {1000.0, 1000.0};
    c.prices.tariff = 0.0;
    c.market.day_ahead_limit = 2.0;
    c.market.prequalified_up = 0.0;
    c.market.prequalified_down = 0.0;
    c.network.buses = 2;
    c.network.lines = {{0, 1, 0.001, 0.001, 5.0}};
    c.load.profile = {0.0, 0.0};
    c.load.shares = {{1, 1.0}};
    c.battery.bus = 1;
    c.battery.power = 1.0;
    c.battery.energy_min = 0.0;
    c.battery.energy_max = 1.0;
    c.battery.initial = 0.0;
    c.battery.charge_efficiency = 0.9;
    c.battery.discharge_efficiency = 0.9;
    return c;
}

StochModel build_instance(const InstanceConfig& config) {
    config.validate();
    const std::size_t T = config.horizon;
    const std::size_t B = config.reserve_blocks();
    const double dt = config.step_hours;
    const auto& pr = config.prices;
    const auto& net = config.network;

    StochModel m;
    Inputs in(m, config);

    auto dam = m.add_variable("dam", Stage::first, {T});
    auto cap_up = m.add_variable("cap_up", Stage::first, {B});
    auto cap_dn = m.add_variable("cap_dn", Stage::first, {B});

    auto charge = m.add_variable("charge", Stage::second, {T});
    auto discharge = m.add_variable("discharge", Stage::second, {T});
    auto soc = m.add_variable("soc", Stage::second, {T});
    std::optional<VarBlock> pv, hp, temp, ev;
    if (config.pv) pv = m.add_variable("pv", Stage::second, {T});
    if (config.heat_pump) {
        hp = m.add_variable("hp", Stage::second, {T});
        temp = m.add_variable("temp", Stage::second, {T});
    }
    if (config.ev) ev = m.add_variable("ev", Stage::second, {T});
    auto act_up = m.add_variable("act_up", Stage::second, {T});
    auto act_dn = m.add_variable("act_dn", Stage::second, {T});
    auto surplus = m.add_variable("surplus", Stage::second, {T});
    auto deficit = m.add_variable("deficit", Stage::second, {T});

    auto le = [&](const Expression& e, const std::string& name) { m.add_constraint(e, Sense::less_equal, {}, name); };
    auto eq = [&](const Expression& e, const std::string& name) { m.add_constraint(e, Sense::equal, {}, name); };

    for (std::size_t b = 0; b < B; ++b) {
        le(-Expression(cap_up[b]), indexed("cap_up_min", b));
        le(Expression(cap_up[b]) - config.market.prequalified_up, indexed("cap_up_max", b));
        le(-Expression(cap_dn[b]), indexed("cap_dn_min", b));
        le(Expression(cap_dn[b]) - config.market.prequalified_down, indexed("cap_dn_max", b));
    }

    // children of every bus, for subtree sums
    std::vector<std::vector<std::size_t>> below(net.buses);
    for (std::size_t i = net.lines.size(); i-- > 0;) {
        const auto& l = net.lines[i];
        below[l.to].insert(below[l.to].begin(), l.to);
        below[l.from].insert(below[l.from].end(), below[l.to].begin(), below[l.to].end());
    }

    Expression cost;
    const double decay = config.heat_pump ? std::exp(-dt / config.heat_pump->time_constant) : 0.0;
    Expression ev_energy;

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t blk = t / config.reserve_block_steps;
        le(Expression(dam[t]) - config.market.day_ahead_limit, indexed("dam_max", t));
        le(-Expression(dam[t]) - config.market.day_ahead_limit, indexed("dam_min", t));

        std::vector<Expression> inject(net.buses), reactive(net.buses);
        Expression customer;  // energy billed at the tariff
        for (const auto& [bus, share] : config.load.shares) {
            Expression l = in.relative(GermRole::load, share * config.load.profile[t]);
            inject[bus] -= l;
            reactive[bus] += config.load.reactive_ratio * l;
            customer += l;
        }

        // battery
        const auto& bat = config.battery;
        inject[bat.bus] += Expression(discharge[t]) - Expression(charge[t]);
        Expression prev = t == 0 ? Expression(bat.initial) : Expression(soc[t - 1]);
        eq(Expression(soc[t]) - prev - bat.charge_efficiency * dt * Expression(charge[t]) +
               (dt / bat.discharge_efficiency) * Expression(discharge[t]),
           indexed("soc_balance", t));
        le(-Expression(charge[t]), indexed("charge_min", t));
        le(Expression(charge[t]) - bat.power, indexed("charge_max", t));
        le(-Expression(discharge[t]), indexed("discharge_min", t));
        le(Expression(discharge[t]) - bat.power, indexed("discharge_max", t));
        le(Expression(soc[t]) - bat.energy_max, indexed("soc_max", t));
        le(bat.energy_min - Expression(soc[t]), indexed("soc_min", t));
        cost += bat.wear_cost * dt * (Expression(charge[t]) + Expression(discharge[t]));

        if (pv) {
            inject[config.pv->bus] += Expression((*pv)[t]);
            le(-Expression((*pv)[t]), indexed("pv_min", t));
            le(Expression((*pv)[t]) - in.relative(GermRole::solar, config.pv->availability[t]), indexed("pv_max", t));
        }

        if (hp) {
            const auto& h = *config.heat_pump;
            inject[h.bus] -= Expression((*hp)[t]);
            reactive[h.bus] += h.reactive_ratio * Expression((*hp)[t]);
            customer += Expression((*hp)[t]);
            le(-Expression((*hp)[t]), indexed("hp_min", t));
            le(Expression((*hp)[t]) - h.power, indexed("hp_max", t));
            Expression before = t == 0 ? Expression(h.initial) : Expression((*temp)[t - 1]);
            eq(Expression((*temp)[t]) - decay * before - (1.0 - decay) * in.shifted(GermRole::temperature, h.outdoor[t]) -
                   (1.0 - decay) * h.resistance * h.cop * Expression((*hp)[t]),
               indexed("temp_balance", t));
            le(Expression((*temp)[t]) - h.comfort_max, indexed("comfort_max", t));
            le(h.comfort_min - Expression((*temp)[t]), indexed("comfort_min", t));
        }

        if (ev) {
            const auto& e = *config.ev;
            inject[e.bus] -= Expression((*ev)[t]);
            reactive[e.bus] += e.reactive_ratio * Expression((*ev)[t]);
            customer += Expression((*ev)[t]);
            le(-Expression((*ev)[t]), indexed("ev_min", t));
            le(Expression((*ev)[t]) - e.power * e.plugged_in[t], indexed("ev_max", t));
            ev_energy += e.efficiency * dt * Expression((*ev)[t]);
        }

        // market coupling: schedule + activated reserve + imbalance = physical export
        Expression exchange;
        for (const auto& i : inject) exchange += i;
        eq(Expression(dam[t]) + pr.activation_share_up * Expression(act_up[t]) -
               pr.activation_share_down * Expression(act_dn[t]) + Expression(surplus[t]) - Expression(deficit[t]) -
               exchange,
           indexed("coupling", t));
        le(Expression(act_up[t]) - config.market.prequalified_up, indexed("act_up_max", t));
        le(Expression(cap_up[blk]) - Expression(act_up[t]), indexed("act_up_offer", t));
        le(Expression(act_dn[t]) - config.market.prequalified_down, indexed("act_dn_max", t));
        le(Expression(cap_dn[blk]) - Expression(act_dn[t]), indexed("act_dn_offer", t));
        le(-Expression(surplus[t]), indexed("surplus_min", t));
        le(-Expression(deficit[t]), indexed("deficit_min", t));

        // lossless LinDistFlow on the radial tree, flows in the load direction
        std::vector<Expression> u(net.buses);
        u[0] = Expression(1.0);
        for (std::size_t li = 0; li < net.lines.size(); ++li) {
            const auto& l = net.lines[li];
            Expression p, q;
            for (auto k : below[l.to]) {
                p -= inject[k];
                q += reactive[k];
            }
            u[l.to] = u[l.from] - (2.0 / net.base_power) * (l.r * p + l.x * q);
            Expression hi = p - l.rating, lo = -p - l.rating;
            Expression vhi = u[l.to] - net.v_max * net.v_max, vlo = net.v_min * net.v_min - u[l.to];
            if (!has_variable(p)) continue;  // nothing controllable downstream
            le(hi, indexed("flow_max", li, t));
            le(lo, indexed("flow_min", li, t));
            le(vhi, indexed("volt_max", l.to, t));
            le(vlo, indexed("volt_min", l.to, t));
        }

        const Expression dam_price = in.shifted(GermRole::day_ahead, pr.day_ahead[t]);
        cost -= dt * dam_price * Expression(dam[t]);
        cost -= dt * (1.0 - pr.imbalance_spread) * dam_price * Expression(surplus[t]);
        cost += dt * (1.0 + pr.imbalance_spread) * dam_price * Expression(deficit[t]);
        cost -= dt * pr.activation_share_up * in.shifted(GermRole::activation_up, pr.activation_up[t]) *
                Expression(act_up[t]);
        cost += dt * pr.activation_share_down * in.shifted(GermRole::activation_down, pr.activation_down[t]) *
                Expression(act_dn[t]);
        cost += dt * pr.tariff * customer;
    }

    le(config.battery.initial - Expression(soc[T - 1]), "soc_terminal");
    if (ev) eq(ev_energy - in.relative(GermRole::ev_demand, config.ev->energy), "ev_energy");

    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t steps = std::min(config.reserve_block_steps, T - b * config.reserve_block_steps);
        const double hours = static_cast<double>(steps) * dt;
        cost -= hours * in.shifted(GermRole::capacity, pr.capacity_up[b]) * Expression(cap_up[b]);
        cost -= hours * in.shifted(GermRole::capacity, pr.capacity_down[b]) * Expression(cap_dn[b]);
    }

    m.set_objective(cost);
    m.finalize();
    return m;
}

std::map<std::string, double> decision_weights(const InstanceConfig& config) {
    const double block = static_cast<double>(config.reserve_block_steps) * config.step_hours;
    return {{"dam", config.step_hours}, {"cap_up", block}, {"cap_dn", block}};
}

std::string to_json(const InstanceConfig& c) {
    Json j;
    j["format"] = "spectral-vpp 1";
    j["name"] = c.name;
    j["horizon"] = c.horizon;
    j["step_hours"] = c.step_hours;
    j["reserve_block_steps"] = c.reserve_block_steps;
    j["prices"] = Json{{"day_ahead", c.prices.day_ahead},
                       {"capacity_up", c.prices.capacity_up},
                       {"capacity_down", c.prices.capacity_down},
                       {"activation_up", c.prices.activation_up},
                       {"activation_down", c.prices.activation_down},
                       {"activation_share_up", c.prices.activation_share_up},
                       {"activation_share_down", c.prices.activation_share_down},
                       {"imbalance_spread", c.prices.imbalance_spread},
                       {"tariff", c.prices.tariff}};
    j["market"] = Json{{"day_ahead_limit", c.market.day_ahead_limit},
                       {"prequalified_up", c.market.prequalified_up},
                       {"prequalified_down", c.market.prequalified_down}};
    Json lines = Json::array();
    for (const auto& l : c.network.lines) {
        lines.push_back(Json{{"from", l.from}, {"to", l.to}, {"r", l.r}, {"x", l.x}, {"rating", l.rating}});
    }
    j["network"] = Json{{"buses", c.network.buses},
                        {"base_power", c.network.base_power},
                        {"v_min", c.network.v_min},
                        {"v_max", c.network.v_max},
                        {"lines", lines}};
    Json shares = Json::array();
    for (const auto& [bus, s] : c.load.shares) shares.push_back(Json{{"bus", bus}, {"share", s}});
    j["load"] = Json{{"profile", c.load.profile}, {"shares", shares}, {"reactive_ratio", c.load.reactive_ratio}};
    const auto& b = c.battery;
    j["battery"] = Json{{"bus", b.bus},
                        {"power", b.power},
                        {"energy_min", b.energy_min},
                        {"energy_max", b.energy_max},
                        {"initial", b.initial},
                        {"charge_efficiency", b.charge_efficiency},
                        {"discharge_efficiency", b.discharge_efficiency},
                        {"wear_cost", b.wear_cost}};
    if (c.pv) j["pv"] = Json{{"bus", c.pv->bus}, {"availability", c.pv->availability}};
    if (c.heat_pump) {
        const auto& h = *c.heat_pump;
        j["heat_pump"] = Json{{"bus", h.bus},
                              {"power", h.power},
                              {"cop", h.cop},
                              {"time_constant", h.time_constant},
                              {"resistance", h.resistance},
                              {"comfort_min", h.comfort_min},
                              {"comfort_max", h.comfort_max},
                              {"initial", h.initial},
                              {"outdoor", h.outdoor},
                              {"reactive_ratio", h.reactive_ratio}};
    }
    if (c.ev) {
        const auto& e = *c.ev;
        j["ev"] = Json{{"bus", e.bus},
                       {"power", e.power},
                       {"energy", e.energy},
                       {"efficiency", e.efficiency},
                       {"plugged_in", e.plugged_in},
                       {"reactive_ratio", e.reactive_ratio}};
    }
    Json germs = Json::array();
    for (const auto& g : c.uncertainty) germs.push_back(to_json(g));
    j["uncertainty"] = germs;
    j["uncertainty_scale"] = c.uncertainty_scale;
    return j.dump(2) + "\n";
}

InstanceConfig parse_config(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("vpp config: malformed JSON: ") + e.what());
    }
    InstanceConfig c;
    try {
        if (auto f = get<std::string>(j, "format", "spectral-vpp 1"); f != "spectral-vpp 1") {
            throw InputError("vpp config: unsupported format '" + f + "'");
        }
        c.name = get<std::string>(j, "name", c.name);
        c.horizon = need<std::size_t>(j, "horizon");
        c.step_hours = get<double>(j, "step_hours", c.step_hours);
        c.reserve_block_steps = get<std::size_t>(j, "reserve_block_steps", c.reserve_block_steps);

        const auto& p = need<Json>(j, "prices");
        c.prices.day_ahead = need<std::vector<double>>(p, "day_ahead");
        c.prices.capacity_up = need<std::vector<double>>(p, "capacity_up");
        c.prices.capacity_down = need<std::vector<double>>(p, "capacity_down");
        c.prices.activation_up = need<std::vector<double>>(p, "activation_up");
        c.prices.activation_down = need<std::vector<double>>(p, "activation_down");
        c.prices.activation_share_up = get<double>(p, "activation_share_up", c.prices.activation_share_up);
        c.prices.activation_share_down = get<double>(p, "activation_share_down", c.prices.activation_share_down);
        c.prices.imbalance_spread = get<double>(p, "imbalance_spread", c.prices.imbalance_spread);
        c.prices.tariff = get<double>(p, "tariff", c.prices.tariff);

        const auto& mk = need<Json>(j, "market");
        c.market.day_ahead_limit = need<double>(mk, "day_ahead_limit");
        c.market.prequalified_up = need<double>(mk, "prequalified_up");
        c.market.prequalified_down = need<double>(mk, "prequalified_down");

        const auto& n = need<Json>(j, "network");
        c.network.buses = need<std::size_t>(n, "buses");
        c.network.base_power = get<double>(n, "base_power", c.network.base_power);
        c.network.v_min = get<double>(n, "v_min", c.network.v_min);
        c.network.v_max = get<double>(n, "v_max", c.network.v_max);
        for (const auto& l : need<Json>(n, "lines")) {
            c.network.lines.push_back({need<std::size_t>(l, "from"), need<std::size_t>(l, "to"), need<double>(l, "r"),
                                       need<double>(l, "x"), need<double>(l, "rating")});
        }

        const auto& ld = need<Json>(j, "load");
        c.load.profile = need<std::vector<double>>(ld, "profile");
        for (const auto& s : need<Json>(ld, "shares")) {
            const auto bus = need<std::size_t>(s, "bus");
            if (c.load.shares.count(bus)) throw InputError("vpp config: bus " + std::to_string(bus) + " has two load shares");
            c.load.shares[bus] = need<double>(s, "share");
        }
        c.load.reactive_ratio = get<double>(ld, "reactive_ratio", c.load.reactive_ratio);

        const auto& b = need<Json>(j, "battery");
        c.battery.bus = need<std::size_t>(b, "bus");
        c.battery.power = need<double>(b, "power");
        c.battery.energy_min = need<double>(b, "energy_min");
        c.battery.energy_max = need<double>(b, "energy_max");
        c.battery.initial = need<double>(b, "initial");
        c.battery.charge_efficiency = need<double>(b, "charge_efficiency");
        c.battery.discharge_efficiency = need<double>(b, "discharge_efficiency");
        c.battery.wear_cost = get<double>(b, "wear_cost", 0.0);

        if (j.contains("pv")) {
            const auto& v = j["pv"];
            c.pv = PvPlant{need<std::size_t>(v, "bus"), need<std::vector<double>>(v, "availability")};
        }
        if (j.contains("heat_pump")) {
            const auto& v = j["heat_pump"];
            HeatPump h;
            h.bus = need<std::size_t>(v, "bus");
            h.power = need<double>(v, "power");
            h.cop = need<double>(v, "cop");
            h.time_constant = need<double>(v, "time_constant");
            h.resistance = need<double>(v, "resistance");
            h.comfort_min = need<double>(v, "comfort_min");
            h.comfort_max = need<double>(v, "comfort_max");
            h.initial = need<double>(v, "initial");
            h.outdoor = need<std::vector<double>>(v, "outdoor");
            h.reactive_ratio = get<double>(v, "reactive_ratio", h.reactive_ratio);
            c.heat_pump = h;
        }
        if (j.contains("ev")) {
            const auto& v = j["ev"];
            EvFleet e;
            e.bus = need<std::size_t>(v, "bus");
            e.power = need<double>(v, "power");
            e.energy = need<double>(v, "energy");
            e.efficiency = need<double>(v, "efficiency");
            e.plugged_in = need<std::vector<double>>(v, "plugged_in");
            e.reactive_ratio = get<double>(v, "reactive_ratio", e.reactive_ratio);
            c.ev = e;
        }
        if (j.contains("uncertainty")) {
            for (const auto& g : j["uncertainty"]) {
                const auto params = need<std::vector<double>>(g, "parameters");
                c.uncertainty.push_back({parse_germ_role(need<std::string>(g, "role")), need<std::string>(g, "name"),
                                         Distribution::from_parameters(need<std::string>(g, "distribution"), params)});
            }
        }
        c.uncertainty_scale = get<double>(j, "uncertainty_scale", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("vpp config: ") + e.what());
    }
    c.validate();
    return c;
}

InstanceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open vpp config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace spectral::vpp
