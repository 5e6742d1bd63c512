#pragma once

#include <vector>

#include "transducer/config.hpp"
#include "transducer/response.hpp"

namespace transducer {

struct NodeChannel {
    double p_tot = 0.0;
    double p_coh = 0.0;
    double p_inc = 0.0;
    double theta = 0.0;    // transduction phase relative to the resonant reference
    double p_dark = 0.0;   // tau_conv * r_dark
    double tau_conv = 0.0;
};

struct ClickWeights {
    double pi_00 = 0.0, pi_01 = 0.0, pi_10 = 0.0, pi_11 = 0.0;
};

// Single heralding detector behind a 50/50 splitter, threshold detection:
// each converted photon (p_tot) and each noise photon (p_dark) independently
// reaches the detector with probability 1/2.
ClickWeights click_weights(const NodeChannel& a, const NodeChannel& b);

struct FidelityResult {
    double f_1c = 0.0;
    double n_click = 0.0;
};

FidelityResult fidelity_single_click(const NodeChannel& a, const NodeChannel& b,
                                     double p_e);

double optimal_excitation(const ClickWeights& w); // sqrt(Pi00) / (sqrt(Pi00)+sqrt(Pi11))

double heralding_rate(double n_click, double r_rep);

struct EntanglementResult {
    double p_e_opt = 0.0;
    double n_click = 0.0;
    double f_1c = 0.0;
    double r_herald = 0.0;
};

EntanglementResult entangle_point(const NodeChannel& a, const NodeChannel& b,
                                  double r_rep);

// Channel of the resonant, undephased transducer described by cfg (dephasing
// and static detunings zeroed); defines the theta = 0 reference and the
// detection window tau_conv used for every node.
NodeChannel baseline_node(const SystemConfig& cfg);

// Two-node point: node A as configured, node B at the undephased resonant
// baseline of the same config.
EntanglementResult entangle_from_config(const SystemConfig& cfg);

struct EntDephasingRow {
    double gamma_phi_1 = 0.0, gamma_phi_2 = 0.0;
    double f_1c = 0.0, r_herald = 0.0;
    double ratio = 0.0;  // p_coh^A / p_tot^A
    double p_dark = 0.0, p_e = 0.0;
    bool regime_ok = true; // p_dark < 0.1 p_e and p_e <= 0.1
};
std::vector<EntDephasingRow> sweep_entanglement_dephasing(
    const SystemConfig& cfg, const std::vector<double>& grid_1,
    const std::vector<double>& grid_2, int threads = 1);

struct EntDetuningRow {
    double delta_omega_10 = 0.0, delta_omega_20 = 0.0;
    double f_1c = 0.0, r_herald = 0.0;
    double theta = 0.0;
    double p_e = 0.0;
    bool regime_ok = true;
};
std::vector<EntDetuningRow> sweep_entanglement_detuning(
    const SystemConfig& cfg, const std::vector<double>& grid_10,
    const std::vector<double>& grid_20, int threads = 1);

} // namespace transducer
