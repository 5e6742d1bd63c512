#pragma once

#include <complex>

#include "transducer/errors.hpp"

// Unit convention: every frequency, rate, and coupling in this header is an
// ordinary frequency in Hz (the "omega/2pi" value). Conversion to angular
// units happens in exactly one place, at the dynamics boundary.

namespace transducer {

struct CavityChain {
    // mode frequencies
    double omega_a = 0.0;
    double omega_b = 0.0;
    double omega_c = 0.0;
    // couplings
    double g_x = 0.0;  // waveguide-side microwave cavity <-> intermediate mode
    double g_y = 0.0;  // intermediate mode <-> emitter 0-1
    double g_02 = 0.0; // optical cavity <-> emitter 0-2
    double g_12 = 0.0; // optical cavity <-> emitter 1-2
    // decay rates, internal (i) and external/waveguide (e)
    double kappa_a_i = 0.0, kappa_a_e = 0.0;
    double kappa_b_i = 0.0, kappa_b_e = 0.0;
    double kappa_c_i = 0.0, kappa_c_e = 0.0;

    double kappa_a_t() const { return kappa_a_i + kappa_a_e; }
    double kappa_b_t() const { return kappa_b_i + kappa_b_e; }
    double kappa_c_t() const { return kappa_c_i + kappa_c_e; }
};

struct EmitterParams {
    double omega_10 = 0.0;
    double omega_20 = 0.0;
    double delta_omega_10 = 0.0; // signed static detuning of the 0-1 transition
    double delta_omega_20 = 0.0; // signed static detuning of the 0-2 transition
    double gamma_10 = 0.0;       // intrinsic relaxation rates
    double gamma_20 = 0.0;
    double gamma_21 = 0.0;
    double gamma_phi_1 = 0.0;    // pure dephasing of level |1>
    double gamma_phi_2 = 0.0;    // pure dephasing of level |2>

    // omega_21 is always derived, never stored.
    double omega_21() const { return omega_20 - omega_10; }
};

struct EffectiveRates {
    double gamma_10_i = 0.0, gamma_10_e = 0.0;
    double gamma_20_i = 0.0, gamma_20_e = 0.0;
    double gamma_21_i = 0.0, gamma_21_e = 0.0;

    double gamma_10_t() const { return gamma_10_i + gamma_10_e; }
    double gamma_20_t() const { return gamma_20_i + gamma_20_e; }
    double gamma_21_t() const { return gamma_21_i + gamma_21_e; }
};

struct DriveConfig {
    std::complex<double> e_s{0.0, 0.0}; // signal amplitude, sqrt(photons/s)
    double mu_s = 0.0;                  // signal frequency, Hz
    std::complex<double> e_d{0.0, 0.0}; // pump amplitude, sqrt(photons/s)
    double mu_d = 0.0;                  // pump frequency, Hz
};

struct NVZeroFieldParams {
    double lambda_so = 0.0;    // spin-orbit coupling
    double epsilon_perp = 0.0; // transverse strain
};

// Closed-form cavity-mediated relaxation rates of the reduced three-level model.
EffectiveRates effective_rates(const CavityChain& chain, const EmitterParams& emitter);

// Zero-field ground-state splitting 2*sqrt(lambda_so^2 + epsilon_perp^2).
double ground_state_splitting(const NVZeroFieldParams& p);

// Photon flux (photons/s) carried by `power` watts at ordinary frequency `frequency`.
double power_to_flux(double power_watts, double frequency_hz);
double flux_to_power(double flux, double frequency_hz);

// Probability that a Gaussian-distributed optical detuning with PLE linewidth
// Gamma (FWHM ~ 2.36 sigma) falls within +-threshold.
double ple_pass_probability(double linewidth_gamma, double threshold);

} // namespace transducer
