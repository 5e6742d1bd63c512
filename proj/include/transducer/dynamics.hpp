#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "transducer/errors.hpp"
#include "transducer/params.hpp"

namespace transducer {

using Mat3 = Eigen::Matrix3cd;
using Mat9 = Eigen::Matrix<std::complex<double>, 9, 9>;
using Vec9 = Eigen::Matrix<std::complex<double>, 9, 1>;

// Liouvillian of the driven three-level system in the frame where |1> rotates
// at mu_s and |2> at mu_s + mu_d:
//   L(t) = l0 + l_plus * e^{-i mu_s t} + l_minus * e^{+i mu_s t},
// acting on the column-major vectorized density matrix (index j + 3k for
// rho_{jk}). All members are in angular units (rad/s); this constructor is the
// single Hz -> rad/s boundary.
struct RotatingFrameGenerator {
    Mat9 l0 = Mat9::Zero();
    Mat9 l_plus = Mat9::Zero();
    Mat9 l_minus = Mat9::Zero();
    double mu_s = 0.0;    // rad/s
    double delta_1 = 0.0; // rad/s, omega_10 + dw10 - mu_s
    double delta_2 = 0.0; // rad/s, omega_20 + dw20 - mu_s - mu_d
    std::complex<double> omega_s{0.0, 0.0};  // sqrt(gamma_10^e) * e_s
    std::complex<double> omega_21{0.0, 0.0}; // sqrt(gamma_21^e) * e_d
    std::complex<double> omega_20{0.0, 0.0}; // sqrt(gamma_20^e) * e_d
    double gamma_10_t = 0.0; // rad/s, kept for horizon heuristics
};

RotatingFrameGenerator build_generator(const EffectiveRates& rates,
                                       const EmitterParams& emitter,
                                       const DriveConfig& drives);

// Fourier coefficients of the rotating-frame expectation values:
//   <sigma_jk(t)> = sum_n s(n, j, k) * e^{-i n mu_s t}.
struct SteadyHarmonics {
    int n_h = 0;
    std::vector<Mat3> coeffs; // coeffs[n + n_h](j, k) = s(n, j, k)

    std::complex<double> s(int n, int j, int k) const;
    Mat3 rho(int n) const; // density-matrix harmonic (transpose of the sigma block)
};

// Checks hermiticity pairing, trace normalization, and positivity of the
// time-averaged density matrix; throws SolverError on violation.
void check_physicality(const SteadyHarmonics& h);

SteadyHarmonics harmonic_balance_solve(const RotatingFrameGenerator& gen, int n_h);

// Independent time-domain oracle: integrates the master equation from |0><0|
// over `horizon` seconds, verifies periodicity, and extracts harmonics by DFT
// over one drive period. horizon <= 0 selects 50 / gamma_10^t.
SteadyHarmonics ode_steady_state(const RotatingFrameGenerator& gen,
                                 double horizon = 0.0, double rel_tol = 1e-11,
                                 int n_h = 3);

// Lab-frame coefficient s_jk^(p,q) of e^{-i t (p mu_d + q mu_s)}.
// Throws SolverError if (p,q) is not representable for entry (j,k) or lies
// outside the truncation.
std::complex<double> lab_frame_component(const SteadyHarmonics& h, int j, int k,
                                         int p, int q);

namespace detail {

// sigma_jk = |j><k|
Mat3 sigma(int j, int k);
Mat9 spre(const Mat3& a);  // vec(A rho)
Mat9 spost(const Mat3& a); // vec(rho A)
Mat9 hamiltonian_superop(const Mat3& h); // -i [h, .]
Mat9 dissipator(const Mat3& l, double rate);

// Full harmonic-balance block matrix (with the trace row substituted); shared
// with the small-signal perturbative solver in the response module.
Eigen::MatrixXcd assemble_hb_matrix(const RotatingFrameGenerator& gen, int n_h);
int hb_trace_row(int n_h);

// Adaptive Dormand-Prince 5(4) for dY/dt = f(t, Y) on complex matrices.
Eigen::MatrixXcd integrate_dp54(
    const std::function<Eigen::MatrixXcd(double, const Eigen::MatrixXcd&)>& f,
    Eigen::MatrixXcd y0, double t0, double t1, double rel_tol, double abs_tol);

} // namespace detail

} // namespace transducer
