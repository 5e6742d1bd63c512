#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "transducer/config.hpp"
#include "transducer/dynamics.hpp"

namespace transducer {

struct FluxResult {
    double r_tot = 0.0;  // photons/s reaching the detector (drive line removed)
    double r_coh = 0.0;  // photons/s in the coherent converted line
    std::complex<double> c_out_11{0.0, 0.0};        // converted-frequency amplitude
    std::complex<double> c_out_10_dipole{0.0, 0.0}; // dipole part of the drive line
    double s22_dc = 0.0; // time-averaged excited-state population
};

FluxResult photon_fluxes(const SteadyHarmonics& h, const EffectiveRates& rates,
                         const DriveConfig& drives);

// Small-signal (single-photon) response, d/d|E_s|^2 at E_s -> 0.
struct SmallSignalResponse {
    double p_tot = 0.0;
    double p_coh = 0.0;
    double p_inc = 0.0;
    double theta = 0.0; // arg of the transduction amplitude
};

// Method B: exact first/second-order perturbation of the harmonic-balance system.
SmallSignalResponse single_photon_efficiencies(const SystemConfig& cfg);

// Method A: regression over a geometric grid of signal fluxes; validation path.
// Throws SolverError if the quadratic term exceeds 1% of the linear response
// over the grid (saturation), telling the caller to shrink the grid.
SmallSignalResponse single_photon_efficiencies_regression(const SystemConfig& cfg);

double dark_count_rate(const SystemConfig& cfg); // r_tot at E_s = 0

struct BandwidthResult {
    double bandwidth_fwhm = 0.0;
    double tau_conv = 0.0;
    std::vector<std::pair<double, double>> curve; // (delta_mu_s, p_coh), sorted
};

BandwidthResult conversion_bandwidth(const SystemConfig& cfg);

struct ConversionMetrics {
    double p_tot = 0.0, p_coh = 0.0, p_inc = 0.0;
    double r_dark = 0.0;
    double bandwidth_fwhm = 0.0;
    double tau_conv = 0.0;
    double theta = 0.0;
};

ConversionMetrics convert_point(const SystemConfig& cfg);

struct PumpRow {
    double power_pw = 0.0;
    double p_coh = 0.0;
    double r_dark = 0.0;
};
std::vector<PumpRow> sweep_pump(const SystemConfig& cfg,
                                const std::vector<double>& powers_pw, int threads = 1);

struct DephasingRow {
    double gamma_phi_1 = 0.0, gamma_phi_2 = 0.0;
    double p_coh = 0.0, p_tot = 0.0, ratio = 0.0;
};
std::vector<DephasingRow> sweep_dephasing(const SystemConfig& cfg,
                                          const std::vector<double>& grid_1,
                                          const std::vector<double>& grid_2,
                                          int threads = 1);

struct DetuningRow {
    double delta_omega_10 = 0.0, delta_omega_20 = 0.0;
    double p_coh = 0.0, p_tot = 0.0, ratio = 0.0, theta = 0.0;
};
std::vector<DetuningRow> sweep_detuning(const SystemConfig& cfg,
                                        const std::vector<double>& grid_10,
                                        const std::vector<double>& grid_20,
                                        int threads = 1);

// Preset grids matching the reference figure ranges.
std::vector<double> default_dephasing_grid();                       // 0 + log 10 kHz .. 100 MHz
std::vector<double> default_detuning_grid_10(const SystemConfig&);  // +-100 gamma_10, linear
std::vector<double> default_detuning_grid_20(const SystemConfig&);  // +-3 (gamma_20+gamma_21)

void unwrap_phases(std::vector<double>& phases); // remove 2*pi branch jumps in place

namespace detail {
// Deterministic indexed parallel map: f(i) is called once for every i < n,
// results must be written by index by the caller-provided callable.
void parallel_for_indexed(std::size_t n, int threads,
                          const std::function<void(std::size_t)>& f);
}

} // namespace transducer
