#include "transducer/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace transducer {

namespace detail {

Mat3 sigma(int j, int k) {
    Mat3 m = Mat3::Zero();
    m(j, k) = 1.0;
    return m;
}

namespace {
Mat9 kron3(const Mat3& a, const Mat3& b) {
    Mat9 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return out;
}
} // namespace

Mat9 spre(const Mat3& a) { return kron3(Mat3::Identity(), a); }
Mat9 spost(const Mat3& a) { return kron3(a.transpose(), Mat3::Identity()); }

Mat9 hamiltonian_superop(const Mat3& h) {
    return std::complex<double>(0.0, -1.0) * (spre(h) - spost(h));
}

Mat9 dissipator(const Mat3& l, double rate) {
    const Mat3 ldl = l.adjoint() * l;
    return rate * (kron3(l.conjugate(), l) - 0.5 * (spre(ldl) + spost(ldl)));
}

Eigen::MatrixXcd integrate_dp54(
    const std::function<Eigen::MatrixXcd(double, const Eigen::MatrixXcd&)>& f,
    Eigen::MatrixXcd y, double t0, double t1, double rel_tol, double abs_tol) {
    // Dormand-Prince 5(4) tableau
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    static const double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9;

    if (t1 <= t0) return y;
    double t = t0;
    double h = (t1 - t0) / 64.0;
    Eigen::MatrixXcd k1 = f(t, y);
    int rejects_in_a_row = 0;
    while (t < t1) {
        if (t + h > t1) h = t1 - t;
        const Eigen::MatrixXcd k2 = f(t + c2 * h, y + h * (a21 * k1));
        const Eigen::MatrixXcd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Eigen::MatrixXcd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::MatrixXcd k5 =
            f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::MatrixXcd k6 =
            f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::MatrixXcd y5 =
            y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::MatrixXcd k7 = f(t + h, y5);
        const Eigen::MatrixXcd err =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double scale = 0.0;
        for (Eigen::Index c = 0; c < y.cols(); ++c)
            for (Eigen::Index r = 0; r < y.rows(); ++r) {
                const double tol =
                    abs_tol + rel_tol * std::max(std::abs(y(r, c)), std::abs(y5(r, c)));
                scale = std::max(scale, std::abs(err(r, c)) / tol);
            }
        if (scale <= 1.0) {
            t += h;
            y = y5;
            k1 = k7; // FSAL
            rejects_in_a_row = 0;
        } else if (++rejects_in_a_row > 50) {
            throw SolverError("integrate_dp54: step size collapsed");
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(scale, 1e-10), -0.2), 0.2, 5.0);
        h *= factor;
        if (!(h > 0.0) || t + h == t)
            throw SolverError("integrate_dp54: step underflow");
    }
    return y;
}

} // namespace detail

using detail::dissipator;
using detail::hamiltonian_superop;
using detail::sigma;

RotatingFrameGenerator build_generator(const EffectiveRates& rates,
                                       const EmitterParams& emitter,
                                       const DriveConfig& drives) {
    constexpr double two_pi = 2.0 * std::numbers::pi;

    RotatingFrameGenerator g;
    g.mu_s = two_pi * drives.mu_s;
    g.delta_1 = two_pi * (emitter.omega_10 + emitter.delta_omega_10 - drives.mu_s);
    g.delta_2 = two_pi * (emitter.omega_20 + emitter.delta_omega_20 - drives.mu_s - drives.mu_d);
    g.omega_s = std::sqrt(two_pi * rates.gamma_10_e) * drives.e_s;
    g.omega_21 = std::sqrt(two_pi * rates.gamma_21_e) * drives.e_d;
    g.omega_20 = std::sqrt(two_pi * rates.gamma_20_e) * drives.e_d;
    g.gamma_10_t = two_pi * rates.gamma_10_t();

    Mat3 h0 = Mat3::Zero();
    h0 += g.delta_1 * sigma(1, 1) + g.delta_2 * sigma(2, 2);
    h0 += g.omega_s * sigma(1, 0) + std::conj(g.omega_s) * sigma(0, 1);
    h0 += g.omega_21 * sigma(2, 1) + std::conj(g.omega_21) * sigma(1, 2);

    g.l0 = hamiltonian_superop(h0);
    g.l0 += dissipator(sigma(0, 1), two_pi * rates.gamma_10_t());
    g.l0 += dissipator(sigma(0, 2), two_pi * rates.gamma_20_t());
    g.l0 += dissipator(sigma(1, 2), two_pi * rates.gamma_21_t());
    g.l0 += dissipator(sigma(1, 1), two_pi * 2.0 * emitter.gamma_phi_1);
    g.l0 += dissipator(sigma(2, 2), two_pi * 2.0 * emitter.gamma_phi_2);

    // The only time-dependent coupling: Omega_20 e^{+i mu_s t} sigma_20 + h.c.
    g.l_plus = hamiltonian_superop(std::conj(g.omega_20) * sigma(0, 2));
    g.l_minus = hamiltonian_superop(g.omega_20 * sigma(2, 0));
    return g;
}

std::complex<double> SteadyHarmonics::s(int n, int j, int k) const {
    return coeffs.at(std::size_t(n + n_h))(j, k);
}

Mat3 SteadyHarmonics::rho(int n) const {
    return coeffs.at(std::size_t(n + n_h)).transpose();
}

void check_physicality(const SteadyHarmonics& h) {
    double mx = 0.0;
    for (const auto& c : h.coeffs) mx = std::max(mx, c.cwiseAbs().maxCoeff());
    const double tol = 1e-10 * std::max(1.0, mx);

    for (int n = -h.n_h; n <= h.n_h; ++n)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                if (std::abs(h.s(n, j, k) - std::conj(h.s(-n, k, j))) > tol)
                    throw SolverError("harmonics violate hermiticity pairing");

    for (int n = -h.n_h; n <= h.n_h; ++n) {
        const std::complex<double> tr = h.s(n, 0, 0) + h.s(n, 1, 1) + h.s(n, 2, 2);
        const std::complex<double> want = (n == 0) ? 1.0 : 0.0;
        if (std::abs(tr - want) > tol)
            throw SolverError("harmonics violate trace normalization");
    }

    const Mat3 rho0 = 0.5 * (h.rho(0) + h.rho(0).adjoint());
    Eigen::SelfAdjointEigenSolver<Mat3> es(rho0);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw SolverError("time-averaged density matrix is not positive semidefinite");
}

namespace detail {

Eigen::MatrixXcd assemble_hb_matrix(const RotatingFrameGenerator& gen, int n_h) {
    const int nb = 2 * n_h + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(9 * nb, 9 * nb);
    const std::complex<double> im(0.0, 1.0);
    for (int i = 0; i < nb; ++i) {
        const int n = i - n_h;
        a.block<9, 9>(9 * i, 9 * i) =
            -im * double(n) * gen.mu_s * Mat9::Identity() - gen.l0;
        if (i > 0) a.block<9, 9>(9 * i, 9 * (i - 1)) = -gen.l_plus;
        if (i < nb - 1) a.block<9, 9>(9 * i, 9 * (i + 1)) = -gen.l_minus;
    }
    // replace the redundant rho_00 row of the n = 0 block by the trace constraint
    const int tr = 9 * n_h;
    a.row(tr).setZero();
    for (int j = 0; j < 3; ++j) a(tr, 9 * n_h + j + 3 * j) = 1.0;
    return a;
}

int hb_trace_row(int n_h) { return 9 * n_h; }

} // namespace detail

namespace {

SteadyHarmonics harmonics_from_rho_blocks(const Eigen::VectorXcd& x, int n_h) {
    SteadyHarmonics h;
    h.n_h = n_h;
    h.coeffs.resize(std::size_t(2 * n_h + 1));
    for (int i = 0; i < 2 * n_h + 1; ++i) {
        Mat3 rho;
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) rho(j, k) = x(9 * i + j + 3 * k);
        h.coeffs[std::size_t(i)] = rho.transpose(); // store <sigma_jk> = rho_kj
    }
    return h;
}

} // namespace

SteadyHarmonics harmonic_balance_solve(const RotatingFrameGenerator& gen, int n_h) {
    if (n_h < 1) throw ConfigError("harmonic_balance_solve: n_h must be >= 1");
    if (!(gen.mu_s > 0.0)) throw ConfigError("harmonic_balance_solve: mu_s must be > 0");

    const Eigen::MatrixXcd a = detail::assemble_hb_matrix(gen, n_h);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(a.rows());
    b(detail::hb_trace_row(n_h)) = 1.0;

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const Eigen::VectorXcd x = lu.solve(b);

    const double anorm = a.cwiseAbs().maxCoeff();
    const double resid = (a * x - b).cwiseAbs().maxCoeff();
    const double scaled = resid / std::max(1e-300, anorm * x.cwiseAbs().maxCoeff());
    if (!std::isfinite(scaled) || scaled > 1e-10)
        throw SolverError("harmonic balance system is singular or ill-conditioned "
                          "(scaled residual " + std::to_string(scaled) + ")");

    SteadyHarmonics h = harmonics_from_rho_blocks(x, n_h);
    check_physicality(h);
    return h;
}

SteadyHarmonics ode_steady_state(const RotatingFrameGenerator& gen, double horizon,
                                 double rel_tol, int n_h) {
    if (!(gen.mu_s > 0.0)) throw ConfigError("ode_steady_state: mu_s must be > 0");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double period = two_pi / gen.mu_s;
    if (horizon <= 0.0) {
        if (!(gen.gamma_10_t > 0.0))
            throw ConfigError("ode_steady_state: horizon required when gamma_10_t = 0");
        horizon = 50.0 / gen.gamma_10_t;
    }
    const double abs_tol = rel_tol * 1e-3;

    auto rhs = [&gen](double t, const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd {
        const std::complex<double> ph(std::cos(gen.mu_s * t), -std::sin(gen.mu_s * t));
        return (gen.l0 + ph * gen.l_plus + std::conj(ph) * gen.l_minus) * y;
    };

    // Monodromy over one period, then binary-powered to skip the transient.
    Eigen::MatrixXcd mono =
        detail::integrate_dp54(rhs, Eigen::MatrixXcd::Identity(9, 9), 0.0, period,
                               rel_tol, abs_tol);
    long n_periods = std::max(1L, long(std::ceil(horizon / period)));
    Eigen::MatrixXcd mpow = Eigen::MatrixXcd::Identity(9, 9);
    {
        Eigen::MatrixXcd base = mono;
        long n = n_periods;
        while (n > 0) {
            if (n & 1) mpow = mpow * base;
            base = base * base;
            n >>= 1;
        }
    }

    Eigen::VectorXcd rho0 = Eigen::VectorXcd::Zero(9);
    rho0(0) = 1.0; // |0><0|
    const Eigen::VectorXcd rho_ss = mpow * rho0;
    const double drift = (mono * rho_ss - rho_ss).cwiseAbs().maxCoeff();
    if (drift > 1e-10)
        throw OracleTimeout("ode_steady_state: state still drifting after horizon "
                            "(per-period drift " + std::to_string(drift) + ")");

    // Harmonic extraction by uniform DFT over one period. The powered phase
    // e^{-i n mu_s N T} is exactly 1, so sample phases need no realignment.
    const int samples = 256;
    std::vector<Eigen::VectorXcd> rho_t;
    rho_t.resize(std::size_t(samples));
    Eigen::MatrixXcd y = rho_ss;
    for (int m = 0; m < samples; ++m) {
        rho_t[std::size_t(m)] = y;
        y = detail::integrate_dp54(rhs, y, period * m / samples,
                                   period * (m + 1) / samples, rel_tol, abs_tol);
    }

    // Compensated summation: the small harmonics sit ~12 orders below the
    // populations, so plain accumulation roundoff would already be visible at
    // the 1e-6 relative level there.
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(9 * (2 * n_h + 1));
    for (int n = -n_h; n <= n_h; ++n) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(9);
        Eigen::VectorXcd comp = Eigen::VectorXcd::Zero(9);
        for (int m = 0; m < samples; ++m) {
            const double ph = two_pi * n * m / samples;
            const Eigen::VectorXcd term =
                std::complex<double>(std::cos(ph), std::sin(ph)) * rho_t[std::size_t(m)] -
                comp;
            const Eigen::VectorXcd next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        x.segment<9>(9 * (n + n_h)) = acc / double(samples);
    }
    return harmonics_from_rho_blocks(x, n_h);
}

std::complex<double> lab_frame_component(const SteadyHarmonics& h, int j, int k,
                                         int p, int q) {
    // frame rotations nu_0 = 0, nu_1 = mu_s, nu_2 = mu_s + mu_d
    static const int nu_s[3] = {0, 1, 1};
    static const int nu_d[3] = {0, 0, 1};
    if (j < 0 || j > 2 || k < 0 || k > 2)
        throw ConfigError("lab_frame_component: entry index out of range");
    if (p != nu_d[k] - nu_d[j])
        throw SolverError("lab_frame_component: (p,q) not representable for this entry");
    const int n = q - (nu_s[k] - nu_s[j]);
    if (std::abs(n) > h.n_h)
        throw SolverError("lab_frame_component: harmonic outside truncation");
    return h.s(n, j, k);
}

} // namespace transducer
