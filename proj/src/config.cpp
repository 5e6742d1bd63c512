#include "transducer/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

using nlohmann::json;

namespace transducer {

SystemConfig default_config() {
    SystemConfig c;

    c.chain.omega_a = 10e9;
    c.chain.omega_b = 10e9;
    c.chain.omega_c = 500e12;
    c.chain.g_x = 1e6;
    c.chain.g_y = 1e6;
    c.chain.g_02 = 1e9;
    c.chain.g_12 = 0.2e9;

    // Microwave chain: kappa_b carries 0.7 MHz of induced internal loss on the
    // 0-1 channel, kappa_a is sized so gamma_10^e = 1.3 MHz exactly.
    const double gy2 = c.chain.g_y * c.chain.g_y;
    const double gx2 = c.chain.g_x * c.chain.g_x;
    c.chain.kappa_b_e = 0.0;
    c.chain.kappa_b_i = 4.0 * gy2 / 0.7e6;
    c.chain.kappa_a_i = 0.0;
    c.chain.kappa_a_e = 16.0 * gx2 * gy2
        / (1.3e6 * c.chain.kappa_b_i * c.chain.kappa_b_i);

    // Optical cavity: external/internal split 14:4 so gamma_20^e = 14 MHz with
    // 4 MHz of induced internal loss (and gamma_21^e = 0.56 MHz from g_12/g_02).
    const double g02sq = c.chain.g_02 * c.chain.g_02;
    const double kc_t = 4.0 * g02sq / 18e6;
    c.chain.kappa_c_e = kc_t * (14.0 / 18.0);
    c.chain.kappa_c_i = kc_t - c.chain.kappa_c_e;

    c.emitter.omega_10 = 10e9;
    c.emitter.omega_20 = 500e12;
    c.emitter.gamma_10 = 33e3;
    c.emitter.gamma_20 = 3.5e6;
    c.emitter.gamma_21 = 3.5e6;

    c.zero_field.lambda_so = 5e9;
    c.zero_field.epsilon_perp = 0.0;

    return c;
}

double SystemConfig::pump_flux() const {
    return power_to_flux(pump_power_pw * 1e-12, mu_d_resolved());
}

DriveConfig SystemConfig::drives() const { return drives_at_flux(signal_flux); }

DriveConfig SystemConfig::drives_at_flux(double f) const {
    DriveConfig d;
    d.mu_s = mu_s_resolved();
    d.mu_d = mu_d_resolved();
    d.e_s = std::sqrt(f);
    d.e_d = std::sqrt(pump_flux());
    return d;
}

EffectiveRates SystemConfig::rates() const { return effective_rates(chain, emitter); }

namespace {

struct Field {
    std::function<double(const SystemConfig&)> get;
    std::function<void(SystemConfig&, double)> set;
};

using FieldMap = std::map<std::string, Field>; // section -> leaf -> accessors keyed "section.leaf"

const FieldMap& field_map() {
    static const FieldMap m = [] {
        FieldMap f;
        auto add = [&f](const std::string& key, auto member_ptr, auto section_ptr) {
            f[key] = Field{
                [section_ptr, member_ptr](const SystemConfig& c) {
                    return (c.*section_ptr).*member_ptr;
                },
                [section_ptr, member_ptr](SystemConfig& c, double v) {
                    (c.*section_ptr).*member_ptr = v;
                }};
        };
        add("cavity_chain.omega_a", &CavityChain::omega_a, &SystemConfig::chain);
        add("cavity_chain.omega_b", &CavityChain::omega_b, &SystemConfig::chain);
        add("cavity_chain.omega_c", &CavityChain::omega_c, &SystemConfig::chain);
        add("cavity_chain.g_x", &CavityChain::g_x, &SystemConfig::chain);
        add("cavity_chain.g_y", &CavityChain::g_y, &SystemConfig::chain);
        add("cavity_chain.g_02", &CavityChain::g_02, &SystemConfig::chain);
        add("cavity_chain.g_12", &CavityChain::g_12, &SystemConfig::chain);
        add("cavity_chain.kappa_a_i", &CavityChain::kappa_a_i, &SystemConfig::chain);
        add("cavity_chain.kappa_a_e", &CavityChain::kappa_a_e, &SystemConfig::chain);
        add("cavity_chain.kappa_b_i", &CavityChain::kappa_b_i, &SystemConfig::chain);
        add("cavity_chain.kappa_b_e", &CavityChain::kappa_b_e, &SystemConfig::chain);
        add("cavity_chain.kappa_c_i", &CavityChain::kappa_c_i, &SystemConfig::chain);
        add("cavity_chain.kappa_c_e", &CavityChain::kappa_c_e, &SystemConfig::chain);
        add("emitter.omega_10", &EmitterParams::omega_10, &SystemConfig::emitter);
        add("emitter.omega_20", &EmitterParams::omega_20, &SystemConfig::emitter);
        add("emitter.delta_omega_10", &EmitterParams::delta_omega_10, &SystemConfig::emitter);
        add("emitter.delta_omega_20", &EmitterParams::delta_omega_20, &SystemConfig::emitter);
        add("emitter.gamma_10", &EmitterParams::gamma_10, &SystemConfig::emitter);
        add("emitter.gamma_20", &EmitterParams::gamma_20, &SystemConfig::emitter);
        add("emitter.gamma_21", &EmitterParams::gamma_21, &SystemConfig::emitter);
        add("emitter.gamma_phi_1", &EmitterParams::gamma_phi_1, &SystemConfig::emitter);
        add("emitter.gamma_phi_2", &EmitterParams::gamma_phi_2, &SystemConfig::emitter);
        add("zero_field.lambda_so", &NVZeroFieldParams::lambda_so, &SystemConfig::zero_field);
        add("zero_field.epsilon_perp", &NVZeroFieldParams::epsilon_perp, &SystemConfig::zero_field);
        f["drive.pump_power_pw"] = Field{
            [](const SystemConfig& c) { return c.pump_power_pw; },
            [](SystemConfig& c, double v) { c.pump_power_pw = v; }};
        f["drive.signal_flux"] = Field{
            [](const SystemConfig& c) { return c.signal_flux; },
            [](SystemConfig& c, double v) { c.signal_flux = v; }};
        f["drive.mu_s"] = Field{
            [](const SystemConfig& c) { return c.mu_s_resolved(); },
            [](SystemConfig& c, double v) { c.mu_s = v; }};
        f["drive.mu_d"] = Field{
            [](const SystemConfig& c) { return c.mu_d_resolved(); },
            [](SystemConfig& c, double v) { c.mu_d = v; }};
        f["solver.n_h"] = Field{
            [](const SystemConfig& c) { return double(c.solver.n_h); },
            [](SystemConfig& c, double v) { c.solver.n_h = int(v); }};
        f["solver.ode_horizon_factor"] = Field{
            [](const SystemConfig& c) { return c.solver.ode_horizon_factor; },
            [](SystemConfig& c, double v) { c.solver.ode_horizon_factor = v; }};
        f["entanglement.r_rep"] = Field{
            [](const SystemConfig& c) { return c.entanglement.r_rep; },
            [](SystemConfig& c, double v) { c.entanglement.r_rep = v; }};
        return f;
    }();
    return m;
}

std::string resolve_key(const std::string& key) {
    const auto& fields = field_map();
    if (fields.count(key)) return key;
    // bare leaf: accept if it matches exactly one dotted path
    std::string hit;
    for (const auto& [path, _] : fields) {
        auto dot = path.find('.');
        if (path.compare(dot + 1, std::string::npos, key) == 0) {
            if (!hit.empty())
                throw ConfigError("ambiguous config key '" + key + "' (matches " + hit +
                                  " and " + path + ")");
            hit = path;
        }
    }
    if (hit.empty()) throw ConfigError("unknown config key '" + key + "'");
    return hit;
}

} // namespace

void apply_override(SystemConfig& cfg, const std::string& key_value) {
    auto eq = key_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must be key=value, got '" + key_value + "'");
    const std::string key = key_value.substr(0, eq);
    const std::string val = key_value.substr(eq + 1);
    const std::string path = resolve_key(key);
    double v = 0.0;
    try {
        std::size_t pos = 0;
        v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
        throw ConfigError("override '" + key + "': cannot parse '" + val + "' as a number");
    }
    field_map().at(path).set(cfg, v);
}

void from_json_into(const json& j, SystemConfig& cfg) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    const auto& fields = field_map();
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object())
            throw ConfigError("config section '" + section + "' must be an object");
        for (const auto& [leaf, value] : body.items()) {
            const std::string path = section + "." + leaf;
            auto it = fields.find(path);
            if (it == fields.end())
                throw ConfigError("unknown config key '" + path + "'");
            if (!value.is_number())
                throw ConfigError("config key '" + path + "' must be a number");
            it->second.set(cfg, value.get<double>());
        }
    }
}

SystemConfig resolve_config(const std::string& path,
                            const std::vector<std::string>& overrides) {
    SystemConfig cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config '" + path + "': " + e.what());
        }
        from_json_into(j, cfg);
    }
    for (const auto& kv : overrides) apply_override(cfg, kv);
    validate(cfg);
    return cfg;
}

void validate(const SystemConfig& cfg) {
    effective_rates(cfg.chain, cfg.emitter); // validates rates and kappa totals
    auto nonneg = [](double v, const char* name) {
        if (v < 0.0 || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be finite and >= 0");
    };
    nonneg(cfg.emitter.gamma_phi_1, "emitter.gamma_phi_1");
    nonneg(cfg.emitter.gamma_phi_2, "emitter.gamma_phi_2");
    nonneg(cfg.pump_power_pw, "drive.pump_power_pw");
    nonneg(cfg.signal_flux, "drive.signal_flux");
    if (!(cfg.mu_s_resolved() > 0.0)) throw ConfigError("drive.mu_s must be > 0");
    if (!(cfg.mu_d_resolved() > 0.0)) throw ConfigError("drive.mu_d must be > 0");
    if (cfg.solver.n_h < 1) throw ConfigError("solver.n_h must be >= 1");
    if (!(cfg.solver.ode_horizon_factor > 0.0))
        throw ConfigError("solver.ode_horizon_factor must be > 0");
    if (!(cfg.entanglement.r_rep > 0.0)) throw ConfigError("entanglement.r_rep must be > 0");
}

json to_json(const SystemConfig& cfg) {
    json j;
    for (const auto& [path, field] : field_map()) {
        auto dot = path.find('.');
        j[path.substr(0, dot)][path.substr(dot + 1)] = field.get(cfg);
    }
    return j;
}

std::uint64_t config_hash(const SystemConfig& cfg) {
    const std::string s = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace transducer
