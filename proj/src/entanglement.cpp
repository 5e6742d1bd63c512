#include "transducer/entanglement.hpp"

#include <cmath>

namespace transducer {

namespace {

void check_channel(const NodeChannel& c, const char* which) {
    auto bad = [which](const char* what) {
        throw ConfigError(std::string("node ") + which + ": " + what);
    };
    if (c.p_tot < 0.0 || c.p_tot > 1.0) bad("p_tot must be in [0, 1]");
    if (c.p_coh < 0.0 || c.p_coh > c.p_tot + 1e-12) bad("p_coh must be in [0, p_tot]");
    if (c.p_dark < 0.0 || c.p_dark >= 1.0) bad("p_dark must be in [0, 1)");
}

} // namespace

ClickWeights click_weights(const NodeChannel& a, const NodeChannel& b) {
    check_channel(a, "A");
    check_channel(b, "B");
    auto pi = [&](int i, int j) {
        return 1.0 - (1.0 - i * a.p_tot / 2) * (1.0 - j * b.p_tot / 2) *
                         (1.0 - a.p_dark / 2) * (1.0 - b.p_dark / 2);
    };
    return {pi(0, 0), pi(0, 1), pi(1, 0), pi(1, 1)};
}

FidelityResult fidelity_single_click(const NodeChannel& a, const NodeChannel& b,
                                     double p_e) {
    if (!(p_e > 0.0 && p_e < 1.0))
        throw ConfigError("fidelity_single_click: p_e must be in (0, 1)");
    const ClickWeights w = click_weights(a, b);
    const double n = 2.0 * ((1.0 - p_e) * (1.0 - p_e) * w.pi_00 +
                            p_e * (1.0 - p_e) * (w.pi_10 + w.pi_01) +
                            p_e * p_e * w.pi_11);
    if (n <= 0.0)
        throw SolverError("fidelity_single_click: zero click probability, "
                          "fidelity undefined");
    const double alpha = (1.0 - a.p_dark / 2) * (1.0 - b.p_dark / 2);
    const double abs_delta = std::sqrt(a.p_coh * b.p_coh);
    const double theta = a.theta - b.theta;
    const double f = (w.pi_10 + w.pi_01 + alpha * abs_delta * std::cos(theta)) *
                     p_e * (1.0 - p_e) / n;
    return {f, n};
}

double optimal_excitation(const ClickWeights& w) {
    if (!(w.pi_00 + w.pi_11 > 0.0))
        throw ConfigError("optimal_excitation: Pi00 + Pi11 must be > 0");
    const double r0 = std::sqrt(w.pi_00);
    const double r1 = std::sqrt(w.pi_11);
    return r0 / (r0 + r1);
}

double heralding_rate(double n_click, double r_rep) {
    if (!(r_rep > 0.0)) throw ConfigError("heralding_rate: r_rep must be > 0");
    return n_click * r_rep;
}

EntanglementResult entangle_point(const NodeChannel& a, const NodeChannel& b,
                                  double r_rep) {
    const ClickWeights w = click_weights(a, b);
    const double pe = optimal_excitation(w);
    const FidelityResult f = fidelity_single_click(a, b, pe);
    return {pe, f.n_click, f.f_1c, heralding_rate(f.n_click, r_rep)};
}

namespace {

struct Baseline {
    NodeChannel node;
    double theta_raw = 0.0; // absolute arg of the baseline transduction amplitude
};

Baseline compute_baseline(const SystemConfig& cfg) {
    SystemConfig c = cfg;
    c.emitter.gamma_phi_1 = 0.0;
    c.emitter.gamma_phi_2 = 0.0;
    c.emitter.delta_omega_10 = 0.0;
    c.emitter.delta_omega_20 = 0.0;
    const SmallSignalResponse s = single_photon_efficiencies(c);
    const BandwidthResult bw = conversion_bandwidth(c);
    Baseline b;
    b.theta_raw = s.theta;
    b.node.p_tot = s.p_tot;
    b.node.p_coh = s.p_coh;
    b.node.p_inc = s.p_inc;
    b.node.theta = 0.0;
    b.node.tau_conv = bw.tau_conv;
    b.node.p_dark = bw.tau_conv * dark_count_rate(c);
    return b;
}

NodeChannel node_from_response(const SmallSignalResponse& s, double r_dark,
                               const Baseline& ref) {
    NodeChannel n;
    n.p_tot = s.p_tot;
    n.p_coh = s.p_coh;
    n.p_inc = s.p_inc;
    n.theta = s.theta - ref.theta_raw;
    n.tau_conv = ref.node.tau_conv;
    n.p_dark = ref.node.tau_conv * r_dark;
    return n;
}

bool in_regime(double p_dark, double p_e) {
    return p_dark < 0.1 * p_e && p_e <= 0.1;
}

} // namespace

NodeChannel baseline_node(const SystemConfig& cfg) { return compute_baseline(cfg).node; }

EntanglementResult entangle_from_config(const SystemConfig& cfg) {
    const Baseline ref = compute_baseline(cfg);
    const NodeChannel a =
        node_from_response(single_photon_efficiencies(cfg), dark_count_rate(cfg), ref);
    return entangle_point(a, ref.node, cfg.entanglement.r_rep);
}

std::vector<EntDephasingRow> sweep_entanglement_dephasing(
    const SystemConfig& cfg, const std::vector<double>& grid_1,
    const std::vector<double>& grid_2, int threads) {
    const Baseline ref = compute_baseline(cfg);
    std::vector<EntDephasingRow> rows(grid_1.size() * grid_2.size());
    detail::parallel_for_indexed(rows.size(), threads, [&](std::size_t i) {
        const double g1 = grid_1[i / grid_2.size()];
        const double g2 = grid_2[i % grid_2.size()];
        SystemConfig c = cfg;
        c.emitter.gamma_phi_1 = g1;
        c.emitter.gamma_phi_2 = g2;
        const NodeChannel a =
            node_from_response(single_photon_efficiencies(c), dark_count_rate(c), ref);
        const EntanglementResult e = entangle_point(a, ref.node, cfg.entanglement.r_rep);
        rows[i] = {g1,
                   g2,
                   e.f_1c,
                   e.r_herald,
                   a.p_tot > 0.0 ? a.p_coh / a.p_tot : 0.0,
                   a.p_dark,
                   e.p_e_opt,
                   in_regime(a.p_dark, e.p_e_opt)};
    });
    return rows;
}

std::vector<EntDetuningRow> sweep_entanglement_detuning(
    const SystemConfig& cfg, const std::vector<double>& grid_10,
    const std::vector<double>& grid_20, int threads) {
    const Baseline ref = compute_baseline(cfg);
    std::vector<EntDetuningRow> rows(grid_10.size() * grid_20.size());
    detail::parallel_for_indexed(rows.size(), threads, [&](std::size_t i) {
        const double d10 = grid_10[i / grid_20.size()];
        const double d20 = grid_20[i % grid_20.size()];
        SystemConfig c = cfg;
        c.emitter.delta_omega_10 = d10;
        c.emitter.delta_omega_20 = d20;
        const NodeChannel a =
            node_from_response(single_photon_efficiencies(c), dark_count_rate(c), ref);
        const EntanglementResult e = entangle_point(a, ref.node, cfg.entanglement.r_rep);
        rows[i] = {d10, d20,  e.f_1c,
                   e.r_herald, a.theta, e.p_e_opt,
                   in_regime(a.p_dark, e.p_e_opt)};
    });
    return rows;
}

} // namespace transducer
