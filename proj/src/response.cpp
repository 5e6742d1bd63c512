#include "transducer/response.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

namespace transducer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Detected dipole amplitude X^(p,q) = sqrt(g21e) sigma_12^(p,q) + sqrt(g20e) sigma_02^(p,q),
// with the rates in angular units.
std::complex<double> dipole_x(const SteadyHarmonics& h, const EffectiveRates& r,
                              int p, int q) {
    return std::sqrt(kTwoPi * r.gamma_21_e) * lab_frame_component(h, 1, 2, p, q)
         + std::sqrt(kTwoPi * r.gamma_20_e) * lab_frame_component(h, 0, 2, p, q);
}

} // namespace

FluxResult photon_fluxes(const SteadyHarmonics& h, const EffectiveRates& rates,
                         const DriveConfig&) {
    const std::complex<double> x11 = dipole_x(h, rates, 1, 1);
    const std::complex<double> x10 = dipole_x(h, rates, 1, 0);
    FluxResult f;
    f.s22_dc = std::real(h.s(0, 2, 2));
    // Total dipole emission into the waveguide minus the coherent drive line;
    // the input x dipole cross terms cancel against |<c_out^(1,0)>|^2.
    f.r_tot = kTwoPi * (rates.gamma_20_e + rates.gamma_21_e) * f.s22_dc - std::norm(x10);
    f.r_coh = std::norm(x11);
    f.c_out_11 = std::complex<double>(0.0, -1.0) * x11;
    f.c_out_10_dipole = x10;
    return f;
}

namespace {

// Entry of the raw block vector corresponding to s(n, j, k) = rho[n]_{kj};
// vec index of rho_{jk} within a block is j + 3k.
std::complex<double> s_of(const Eigen::VectorXcd& x, int n, int n_h, int j, int k) {
    return x(9 * (n + n_h) + k + 3 * j);
}

struct PerturbativeSolve {
    Eigen::VectorXcd x0, xp, xm, xpm;
    int n_h = 0;
    EffectiveRates rates;
};

// Expansion of the harmonic-balance solution in the signal amplitude:
// x(E_s) = x0 + E_s x+ + E_s* x- + |E_s|^2 x+- + O(E_s^2, ...).
PerturbativeSolve perturbative_solve(const SystemConfig& cfg) {
    PerturbativeSolve out;
    out.n_h = cfg.solver.n_h;
    out.rates = cfg.rates();

    DriveConfig d = cfg.drives_at_flux(0.0);
    const RotatingFrameGenerator gen = build_generator(out.rates, cfg.emitter, d);

    const int n_h = out.n_h;
    const Eigen::MatrixXcd f0 = detail::assemble_hb_matrix(gen, n_h);
    const int tr = detail::hb_trace_row(n_h);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(f0.rows());
    b(tr) = 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(f0);

    const double root_g10e = std::sqrt(kTwoPi * out.rates.gamma_10_e);
    const Mat9 kp = detail::hamiltonian_superop(root_g10e * detail::sigma(1, 0));
    const Mat9 km = detail::hamiltonian_superop(root_g10e * detail::sigma(0, 1));
    auto apply_k = [tr, n_h](const Mat9& k, const Eigen::VectorXcd& x) {
        Eigen::VectorXcd y(x.size());
        for (int i = 0; i < 2 * n_h + 1; ++i)
            y.segment<9>(9 * i) = k * x.segment<9>(9 * i);
        y(tr) = 0.0; // the trace constraint is unaffected by the signal
        return y;
    };

    out.x0 = lu.solve(b);
    out.xp = lu.solve(apply_k(kp, out.x0));
    out.xm = lu.solve(apply_k(km, out.x0));
    out.xpm = lu.solve(apply_k(kp, out.xm) + apply_k(km, out.xp));
    return out;
}

std::complex<double> x10_of(const PerturbativeSolve& p, const Eigen::VectorXcd& x) {
    return std::sqrt(kTwoPi * p.rates.gamma_21_e) * s_of(x, 0, p.n_h, 1, 2)
         + std::sqrt(kTwoPi * p.rates.gamma_20_e) * s_of(x, -1, p.n_h, 0, 2);
}

} // namespace

SmallSignalResponse single_photon_efficiencies(const SystemConfig& cfg) {
    const PerturbativeSolve p = perturbative_solve(cfg);

    // transduction amplitude T = d c_out^(1,1) / d E_s at E_s -> 0
    const std::complex<double> t =
        std::complex<double>(0.0, -1.0) *
        (std::sqrt(kTwoPi * p.rates.gamma_21_e) * s_of(p.xp, 1, p.n_h, 1, 2) +
         std::sqrt(kTwoPi * p.rates.gamma_20_e) * s_of(p.xp, 0, p.n_h, 0, 2));

    // d r_tot / d |E_s|^2: emission term from the |E_s|^2 response of s_22,
    // minus the drive-line correction.
    const double emission = kTwoPi * (p.rates.gamma_20_e + p.rates.gamma_21_e) *
                            std::real(s_of(p.xpm, 0, p.n_h, 2, 2));
    const std::complex<double> x10_0 = x10_of(p, p.x0);
    const std::complex<double> x10_pm = x10_of(p, p.xpm);
    const double drive_line = 2.0 * std::real(std::conj(x10_0) * x10_pm) +
                              std::norm(x10_of(p, p.xp)) + std::norm(x10_of(p, p.xm));

    SmallSignalResponse r;
    r.p_coh = std::norm(t);
    r.theta = std::arg(t);
    r.p_tot = emission - drive_line;
    r.p_inc = r.p_tot - r.p_coh;
    return r;
}

SmallSignalResponse single_photon_efficiencies_regression(const SystemConfig& cfg) {
    const std::vector<double> fluxes = {1e3, 2e3, 4e3, 8e3, 1.6e4};
    const EffectiveRates rates = cfg.rates();

    Eigen::MatrixXd a(long(fluxes.size()), 3);
    Eigen::VectorXd y_tot(long(fluxes.size())), y_coh(long(fluxes.size()));
    std::complex<double> t_small{0.0, 0.0};
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        const DriveConfig d = cfg.drives_at_flux(fluxes[i]);
        const auto h = harmonic_balance_solve(
            build_generator(rates, cfg.emitter, d), cfg.solver.n_h);
        const FluxResult f = photon_fluxes(h, rates, d);
        a(long(i), 0) = 1.0;
        a(long(i), 1) = fluxes[i];
        a(long(i), 2) = fluxes[i] * fluxes[i];
        y_tot(long(i)) = f.r_tot;
        y_coh(long(i)) = f.r_coh;
        if (i == 0) t_small = f.c_out_11 / d.e_s;
    }
    const Eigen::Vector3d c_tot = a.colPivHouseholderQr().solve(y_tot);
    const Eigen::Vector3d c_coh = a.colPivHouseholderQr().solve(y_coh);

    const double fmax = fluxes.back();
    for (const auto& c : {c_tot, c_coh}) {
        if (c(1) <= 0.0) continue; // no linear response (e.g. no pump)
        if (std::abs(c(2)) * fmax / c(1) >= 0.01)
            throw SolverError("single_photon_efficiencies_regression: curvature check "
                              "failed (saturation); shrink the signal-flux grid");
    }

    SmallSignalResponse r;
    r.p_tot = c_tot(1);
    r.p_coh = c_coh(1);
    r.p_inc = r.p_tot - r.p_coh;
    r.theta = std::arg(t_small);
    return r;
}

double dark_count_rate(const SystemConfig& cfg) {
    const EffectiveRates rates = cfg.rates();
    const DriveConfig d = cfg.drives_at_flux(0.0);
    if (std::abs(d.e_d) == 0.0) return 0.0;
    const auto h =
        harmonic_balance_solve(build_generator(rates, cfg.emitter, d), cfg.solver.n_h);
    return photon_fluxes(h, rates, d).r_tot;
}

BandwidthResult conversion_bandwidth(const SystemConfig& cfg) {
    const double span0 = 4.0 * (cfg.emitter.gamma_20 + cfg.emitter.gamma_21);
    const double mu_s0 = cfg.mu_s_resolved();

    auto p_coh_at = [&cfg, mu_s0](double delta) {
        SystemConfig c = cfg;
        c.mu_s = mu_s0 + delta;
        return single_photon_efficiencies(c).p_coh;
    };

    std::vector<std::pair<double, double>> curve;
    double span = span0;
    for (int attempt = 0;; ++attempt) {
        curve.clear();
        const int n = 33;
        for (int i = 0; i < n; ++i) {
            const double d = -span + 2.0 * span * i / (n - 1);
            curve.emplace_back(d, p_coh_at(d));
        }
        const double peak =
            std::max_element(curve.begin(), curve.end(), [](auto& a, auto& b) {
                return a.second < b.second;
            })->second;
        if (!(peak > 0.0))
            throw SolverError("conversion_bandwidth: degenerate response curve");
        if (curve.front().second < peak / 2 && curve.back().second < peak / 2) break;
        if (attempt >= 4)
            throw SolverError("conversion_bandwidth: response wider than search span");
        span *= 2.0;
    }

    auto fwhm_of = [&curve]() {
        const double peak =
            std::max_element(curve.begin(), curve.end(), [](auto& a, auto& b) {
                return a.second < b.second;
            })->second;
        const double half = peak / 2;
        double lo = curve.front().first, hi = curve.back().first;
        for (std::size_t i = 1; i < curve.size(); ++i)
            if (curve[i - 1].second < half && curve[i].second >= half) {
                const auto& [x0, y0] = curve[i - 1];
                const auto& [x1, y1] = curve[i];
                lo = x0 + (half - y0) / (y1 - y0) * (x1 - x0);
                break;
            }
        for (std::size_t i = curve.size(); i-- > 1;)
            if (curve[i].second < half && curve[i - 1].second >= half) {
                const auto& [x0, y0] = curve[i - 1];
                const auto& [x1, y1] = curve[i];
                hi = x0 + (half - y0) / (y1 - y0) * (x1 - x0);
                break;
            }
        return std::pair{lo, hi};
    };

    // refine the two half-max crossings by sampling interval midpoints until
    // the interpolated FWHM is stable to 0.1%
    double fwhm = 0.0;
    for (int iter = 0; iter < 40; ++iter) {
        auto [lo, hi] = fwhm_of();
        const double new_fwhm = hi - lo;
        if (fwhm > 0.0 && std::abs(new_fwhm - fwhm) < 1e-3 * fwhm) {
            fwhm = new_fwhm;
            break;
        }
        fwhm = new_fwhm;
        for (double x : {lo, hi}) {
            auto it = std::lower_bound(curve.begin(), curve.end(), x,
                                       [](auto& p, double v) { return p.first < v; });
            if (it == curve.begin() || it == curve.end()) continue;
            const double mid = 0.5 * ((it - 1)->first + it->first);
            curve.insert(it, {mid, p_coh_at(mid)});
        }
    }

    BandwidthResult r;
    r.bandwidth_fwhm = fwhm;
    r.tau_conv = 4.0 / (kTwoPi * fwhm);
    r.curve = std::move(curve);
    return r;
}

ConversionMetrics convert_point(const SystemConfig& cfg) {
    const SmallSignalResponse s = single_photon_efficiencies(cfg);
    const BandwidthResult bw = conversion_bandwidth(cfg);
    ConversionMetrics m;
    m.p_tot = s.p_tot;
    m.p_coh = s.p_coh;
    m.p_inc = s.p_inc;
    m.theta = s.theta;
    m.r_dark = dark_count_rate(cfg);
    m.bandwidth_fwhm = bw.bandwidth_fwhm;
    m.tau_conv = bw.tau_conv;
    return m;
}

namespace detail {

void parallel_for_indexed(std::size_t n, int threads,
                          const std::function<void(std::size_t)>& f) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::size_t(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail

std::vector<PumpRow> sweep_pump(const SystemConfig& cfg,
                                const std::vector<double>& powers_pw, int threads) {
    for (double p : powers_pw)
        if (!(p > 0.0)) throw ConfigError("sweep_pump: powers must be > 0");
    std::vector<PumpRow> rows(powers_pw.size());
    detail::parallel_for_indexed(powers_pw.size(), threads, [&](std::size_t i) {
        SystemConfig c = cfg;
        c.pump_power_pw = powers_pw[i];
        rows[i] = {powers_pw[i], single_photon_efficiencies(c).p_coh, dark_count_rate(c)};
    });
    return rows;
}

std::vector<DephasingRow> sweep_dephasing(const SystemConfig& cfg,
                                          const std::vector<double>& grid_1,
                                          const std::vector<double>& grid_2,
                                          int threads) {
    std::vector<DephasingRow> rows(grid_1.size() * grid_2.size());
    detail::parallel_for_indexed(rows.size(), threads, [&](std::size_t i) {
        const double g1 = grid_1[i / grid_2.size()];
        const double g2 = grid_2[i % grid_2.size()];
        SystemConfig c = cfg;
        c.emitter.gamma_phi_1 = g1;
        c.emitter.gamma_phi_2 = g2;
        const auto s = single_photon_efficiencies(c);
        rows[i] = {g1, g2, s.p_coh, s.p_tot, s.p_tot > 0.0 ? s.p_coh / s.p_tot : 0.0};
    });
    return rows;
}

std::vector<DetuningRow> sweep_detuning(const SystemConfig& cfg,
                                        const std::vector<double>& grid_10,
                                        const std::vector<double>& grid_20,
                                        int threads) {
    std::vector<DetuningRow> rows(grid_10.size() * grid_20.size());
    detail::parallel_for_indexed(rows.size(), threads, [&](std::size_t i) {
        const double d10 = grid_10[i / grid_20.size()];
        const double d20 = grid_20[i % grid_20.size()];
        SystemConfig c = cfg;
        c.emitter.delta_omega_10 = d10;
        c.emitter.delta_omega_20 = d20;
        const auto s = single_photon_efficiencies(c);
        rows[i] = {d10, d20, s.p_coh, s.p_tot,
                   s.p_tot > 0.0 ? s.p_coh / s.p_tot : 0.0, s.theta};
    });
    return rows;
}

std::vector<double> default_dephasing_grid() {
    std::vector<double> g{0.0};
    const int n = 13;
    for (int i = 0; i < n; ++i)
        g.push_back(1e4 * std::pow(1e4, double(i) / (n - 1))); // 10 kHz .. 100 MHz
    return g;
}

std::vector<double> default_detuning_grid_10(const SystemConfig& cfg) {
    std::vector<double> g;
    const double span = 100.0 * cfg.emitter.gamma_10;
    const int n = 21;
    for (int i = 0; i < n; ++i) g.push_back(-span + 2.0 * span * i / (n - 1));
    return g;
}

std::vector<double> default_detuning_grid_20(const SystemConfig& cfg) {
    std::vector<double> g;
    const double span = 3.0 * (cfg.emitter.gamma_20 + cfg.emitter.gamma_21);
    const int n = 21;
    for (int i = 0; i < n; ++i) g.push_back(-span + 2.0 * span * i / (n - 1));
    return g;
}

void unwrap_phases(std::vector<double>& phases) {
    for (std::size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] - phases[i - 1];
        while (d > std::numbers::pi) {
            phases[i] -= kTwoPi;
            d -= kTwoPi;
        }
        while (d < -std::numbers::pi) {
            phases[i] += kTwoPi;
            d += kTwoPi;
        }
    }
}

} // namespace transducer
