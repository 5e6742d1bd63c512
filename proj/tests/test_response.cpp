#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "transducer/response.hpp"

using namespace transducer;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// loss channels moved to the waveguides: no intrinsic optical decay, no
// internal cavity dissipation
SystemConfig clean_config() {
    SystemConfig c = default_config();
    c.emitter.gamma_20 = 0.0;
    c.emitter.gamma_21 = 0.0;
    c.chain.kappa_c_e += c.chain.kappa_c_i;
    c.chain.kappa_c_i = 0.0;
    c.chain.kappa_b_e += c.chain.kappa_b_i;
    c.chain.kappa_b_i = 0.0;
    return c;
}

} // namespace

TEST_CASE("photon fluxes at the default operating point") {
    const SystemConfig cfg = default_config();
    const auto h = harmonic_balance_solve(
        build_generator(cfg.rates(), cfg.emitter, cfg.drives()), cfg.solver.n_h);
    const auto f = photon_fluxes(h, cfg.rates(), cfg.drives());

    CHECK(f.r_coh > 0.0);
    CHECK(f.r_tot > f.r_coh);
    CHECK(f.s22_dc > 0.0);
    CHECK(f.s22_dc < 1.0);
    CHECK(f.r_coh == doctest::Approx(std::norm(f.c_out_11)));
    // converted flux scales linearly with the injected 1e3 photons/s
    CHECK(f.r_coh == doctest::Approx(346.567428523).epsilon(1e-6));
    CHECK(f.r_tot == doctest::Approx(434.897241328).epsilon(1e-6));

    // the drive line picks up no other sidebands worth mentioning
    const auto& r = cfg.rates();
    const std::complex<double> x_second =
        std::sqrt(kTwoPi * r.gamma_21_e) * lab_frame_component(h, 1, 2, 1, -1) +
        std::sqrt(kTwoPi * r.gamma_20_e) * lab_frame_component(h, 0, 2, 1, -1);
    CHECK(std::norm(x_second) < 1e-3 * f.r_coh);
}

TEST_CASE("zero signal produces no converted line") {
    SystemConfig cfg = default_config();
    cfg.signal_flux = 0.0;
    const auto h = harmonic_balance_solve(
        build_generator(cfg.rates(), cfg.emitter, cfg.drives()), cfg.solver.n_h);
    const auto f = photon_fluxes(h, cfg.rates(), cfg.drives());
    CHECK(std::abs(f.c_out_11) < 1e-14);
    CHECK(f.r_coh < 1e-20);
    CHECK(f.r_tot > 0.0); // pump-induced scattering stays
}

TEST_CASE("single photon efficiencies at the default operating point") {
    const auto s = single_photon_efficiencies(default_config());
    CHECK(s.p_tot == doctest::Approx(0.392198764947).epsilon(1e-6));
    CHECK(s.p_coh == doctest::Approx(0.346640360673).epsilon(1e-6));
    CHECK(s.p_inc == doctest::Approx(s.p_tot - s.p_coh).epsilon(1e-9));
    CHECK(s.theta == doctest::Approx(1.55102930726).epsilon(1e-6));
    CHECK(s.p_coh <= s.p_tot);
    CHECK(s.p_tot <= 1.0);
}

TEST_CASE("perturbative and regression methods agree") {
    SUBCASE("default operating point") {
        const SystemConfig cfg = default_config();
        const auto b = single_photon_efficiencies(cfg);
        const auto a = single_photon_efficiencies_regression(cfg);
        CHECK(a.p_tot == doctest::Approx(b.p_tot).epsilon(0.01));
        CHECK(a.p_coh == doctest::Approx(b.p_coh).epsilon(0.01));
        CHECK(a.theta == doctest::Approx(b.theta).epsilon(0.01));
    }
    SUBCASE("dephased, detuned operating point") {
        SystemConfig cfg = default_config();
        cfg.emitter.gamma_phi_1 = 0.8e6;
        cfg.emitter.gamma_phi_2 = 5e6;
        cfg.emitter.delta_omega_10 = 0.9e6;
        cfg.emitter.delta_omega_20 = -11e6;
        const auto b = single_photon_efficiencies(cfg);
        const auto a = single_photon_efficiencies_regression(cfg);
        CHECK(a.p_tot == doctest::Approx(b.p_tot).epsilon(0.01));
        CHECK(a.p_coh == doctest::Approx(b.p_coh).epsilon(0.01));
    }
    SUBCASE("strong pump") {
        SystemConfig cfg = default_config();
        cfg.pump_power_pw = 110.0;
        const auto b = single_photon_efficiencies(cfg);
        const auto a = single_photon_efficiencies_regression(cfg);
        CHECK(a.p_tot == doctest::Approx(b.p_tot).epsilon(0.01));
        CHECK(a.p_coh == doctest::Approx(b.p_coh).epsilon(0.01));
    }
    SUBCASE("saturation guard") {
        // at weak pump the response line narrows and the probe fluxes
        // saturate it, which the curvature check must refuse to fit
        SystemConfig cfg = default_config();
        cfg.pump_power_pw = 2.0;
        CHECK_THROWS_AS(single_photon_efficiencies_regression(cfg), SolverError);
    }
}

TEST_CASE("dark count rate") {
    const SystemConfig cfg = default_config();
    CHECK(dark_count_rate(cfg) == doctest::Approx(42.7375261307).epsilon(1e-6));

    SystemConfig off = cfg;
    off.pump_power_pw = 0.0;
    CHECK(dark_count_rate(off) == 0.0);

    // a physical rate cannot depend on the bookkeeping frequency mu_s
    SystemConfig shifted = cfg;
    shifted.mu_s = cfg.emitter.omega_10 * 0.73;
    CHECK(dark_count_rate(shifted) ==
          doctest::Approx(dark_count_rate(cfg)).epsilon(1e-10));

    // more pump, more dark counts
    SystemConfig hot = cfg;
    hot.pump_power_pw = 110.0;
    CHECK(dark_count_rate(hot) > dark_count_rate(cfg));
}

TEST_CASE("conversion bandwidth") {
    const SystemConfig cfg = default_config();
    const auto b = conversion_bandwidth(cfg);
    CHECK(b.bandwidth_fwhm == doctest::Approx(4674287.3877).epsilon(1e-4));
    CHECK(b.tau_conv == doctest::Approx(4.0 / (kTwoPi * b.bandwidth_fwhm)).epsilon(1e-12));
    CHECK(b.bandwidth_fwhm > 1e6);
    CHECK(b.bandwidth_fwhm < 2e7);

    // peaked at the resonant drive, falling below half maximum on both wings;
    // the curve is skewed slightly because the two-photon detuning moves along
    // with mu_s, so exact mirror symmetry is not expected
    REQUIRE(!b.curve.empty());
    double peak = 0.0, peak_delta = 0.0;
    for (const auto& [delta, p] : b.curve)
        if (p > peak) {
            peak = p;
            peak_delta = delta;
        }
    CHECK(std::abs(peak_delta) < 0.05 * b.bandwidth_fwhm);
    CHECK(b.curve.front().second < 0.5 * peak);
    CHECK(b.curve.back().second < 0.5 * peak);
}

TEST_CASE("convert point ties the individual metrics together") {
    const SystemConfig cfg = default_config();
    const auto m = convert_point(cfg);
    const auto s = single_photon_efficiencies(cfg);
    const auto b = conversion_bandwidth(cfg);
    CHECK(m.p_tot == doctest::Approx(s.p_tot));
    CHECK(m.p_coh == doctest::Approx(s.p_coh));
    CHECK(m.theta == doctest::Approx(s.theta));
    CHECK(m.r_dark == doctest::Approx(dark_count_rate(cfg)));
    CHECK(m.bandwidth_fwhm == doctest::Approx(b.bandwidth_fwhm));
    CHECK(m.tau_conv == doctest::Approx(b.tau_conv));
}

TEST_CASE("dephasing degrades the coherent fraction monotonically") {
    const SystemConfig cfg = default_config();
    const std::vector<double> grid = {0.0, 1e4, 1e5, 1e6, 1e7, 1e8};

    const auto rows2 = sweep_dephasing(cfg, {0.0}, grid, 2);
    REQUIRE(rows2.size() == grid.size());
    CHECK(rows2.front().ratio == doctest::Approx(0.346640360673 / 0.392198764947));
    for (std::size_t i = 1; i < rows2.size(); ++i)
        CHECK(rows2[i].ratio < rows2[i - 1].ratio);
    CHECK(rows2.front().ratio > 0.5);
    CHECK(rows2.back().ratio < 0.5); // the 50% crossing lies inside the grid

    const auto rows1 = sweep_dephasing(cfg, grid, {0.0}, 2);
    for (std::size_t i = 1; i < rows1.size(); ++i)
        CHECK(rows1[i].ratio < rows1[i - 1].ratio);
    CHECK(rows1.back().ratio < 0.5);

    // the narrow spin coherence is far more fragile than the already broad
    // optical coherences
    const auto r1 = sweep_dephasing(cfg, {1e6}, {0.0}, 1).front();
    const auto r2 = sweep_dephasing(cfg, {0.0}, {1e6}, 1).front();
    CHECK(r1.ratio < r2.ratio);
}

TEST_CASE("detuning sweep peaks on resonance") {
    const SystemConfig cfg = default_config();
    const auto grid10 = default_detuning_grid_10(cfg);
    const auto rows = sweep_detuning(cfg, grid10, {0.0}, 2);
    REQUIRE(rows.size() == grid10.size());
    const std::size_t mid = rows.size() / 2;
    CHECK(rows[mid].delta_omega_10 == doctest::Approx(0.0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].p_coh <= rows[mid].p_coh * (1.0 + 1e-12));
    // falls off on both sides of the peak
    CHECK(rows.front().p_coh < 0.9 * rows[mid].p_coh);
    CHECK(rows.back().p_coh < 0.9 * rows[mid].p_coh);

    const auto grid20 = default_detuning_grid_20(cfg);
    const auto rows20 = sweep_detuning(cfg, {0.0}, grid20, 2);
    const std::size_t mid20 = rows20.size() / 2;
    for (std::size_t i = 0; i < rows20.size(); ++i)
        CHECK(rows20[i].p_coh <= rows20[mid20].p_coh * (1.0 + 1e-12));
}

TEST_CASE("pump sweep is consistent with the point metrics") {
    const SystemConfig cfg = default_config();
    const auto rows = sweep_pump(cfg, {1.0, 55.0, 100.0}, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].power_pw == doctest::Approx(55.0));
    CHECK(rows[1].p_coh == doctest::Approx(single_photon_efficiencies(cfg).p_coh));
    CHECK(rows[1].r_dark == doctest::Approx(dark_count_rate(cfg)));
    // dark counts grow with pump power
    CHECK(rows[0].r_dark < rows[1].r_dark);
    CHECK(rows[1].r_dark < rows[2].r_dark);
    CHECK_THROWS_AS(sweep_pump(cfg, {0.0, 55.0}, 1), ConfigError);
}

TEST_CASE("closing loss channels reduces the incoherent fraction") {
    const auto def = single_photon_efficiencies(default_config());
    SystemConfig clean = clean_config();
    const auto cl = single_photon_efficiencies(clean);
    CHECK(cl.p_tot > def.p_tot);
    CHECK(cl.p_inc / cl.p_tot < def.p_inc / def.p_tot);

    // the remaining incoherence is pump-induced and fades with pump power
    clean.pump_power_pw = 0.55;
    const auto weak = single_photon_efficiencies(clean);
    CHECK(weak.p_inc / weak.p_tot < 0.05);
    CHECK(weak.p_inc / weak.p_tot < cl.p_inc / cl.p_tot);
}

TEST_CASE("deterministic parallel sweeps") {
    const SystemConfig cfg = default_config();
    const std::vector<double> g1 = {0.0, 2e5};
    const std::vector<double> g2 = {0.0, 1e6, 3e6};
    const auto a = sweep_dephasing(cfg, g1, g2, 1);
    const auto b = sweep_dephasing(cfg, g1, g2, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].p_coh == b[i].p_coh);
        CHECK(a[i].p_tot == b[i].p_tot);
    }
}

TEST_CASE("phase unwrapping") {
    std::vector<double> p = {3.0, 3.1, -3.1, -3.0, 3.05};
    unwrap_phases(p);
    for (std::size_t i = 1; i < p.size(); ++i)
        CHECK(std::abs(p[i] - p[i - 1]) < M_PI);
    CHECK(p[0] == doctest::Approx(3.0));
    CHECK(p[2] == doctest::Approx(-3.1 + kTwoPi));
}
