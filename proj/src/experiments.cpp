#include "transducer/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "transducer/dynamics.hpp"
#include "transducer/entanglement.hpp"
#include "transducer/response.hpp"

using nlohmann::json;

namespace transducer {

namespace detail {

std::string csv_number(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::scientific, 8);
    return std::string(buf, res.ptr);
}

} // namespace detail

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary); // binary: no platform newline translation
    if (!out) throw ConfigError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << detail::csv_number(row[i]);
        out << "\n";
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<double> pump_grid_pw() {
    std::vector<double> g;
    const int n = 25;
    for (int i = 0; i < n; ++i)
        g.push_back(1.0 * std::pow(100.0, double(i) / (n - 1))); // 1 .. 100 pW
    return g;
}

double truncation_delta(const SystemConfig& cfg) {
    const auto rates = cfg.rates();
    const auto gen = build_generator(rates, cfg.emitter, cfg.drives());
    const auto h0 = harmonic_balance_solve(gen, cfg.solver.n_h);
    const auto h1 = harmonic_balance_solve(gen, cfg.solver.n_h + 1);
    double mx = 0.0;
    for (int n = -h0.n_h; n <= h0.n_h; ++n)
        mx = std::max(mx, (h0.coeffs[std::size_t(n + h0.n_h)] -
                           h1.coeffs[std::size_t(n + h1.n_h)])
                              .cwiseAbs()
                              .maxCoeff());
    return mx;
}

double harmonics_max_rel_diff(const SteadyHarmonics& a, const SteadyHarmonics& b,
                              double floor = 1e-12) {
    const int n_h = std::min(a.n_h, b.n_h);
    double mx = 0.0;
    for (int n = -n_h; n <= n_h; ++n)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const auto va = a.s(n, j, k);
                const auto vb = b.s(n, j, k);
                const double mag = std::max(std::abs(va), std::abs(vb));
                if (mag > floor) mx = std::max(mx, std::abs(va - vb) / mag);
            }
    return mx;
}

} // namespace

std::vector<CheckResult> run_validation_suite(const SystemConfig& cfg, int threads) {
    std::vector<CheckResult> out;
    auto check = [&out](const std::string& name, auto&& fn) {
        try {
            fn(); // throws or returns details string
            out.push_back({name, true, ""});
        } catch (const std::exception& e) {
            out.push_back({name, false, e.what()});
        }
    };
    auto expect = [](bool ok, const std::string& msg) {
        if (!ok) throw SolverError(msg);
    };

    check("physicality", [&] {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 6; ++i) {
            SystemConfig c = cfg;
            if (i > 0) {
                c.emitter.gamma_phi_1 = 2e6 * u(rng);
                c.emitter.gamma_phi_2 = 2e6 * u(rng);
                c.emitter.delta_omega_10 = 4e6 * (u(rng) - 0.5);
                c.emitter.delta_omega_20 = 40e6 * (u(rng) - 0.5);
                c.pump_power_pw = 20.0 + 80.0 * u(rng);
            }
            // harmonic_balance_solve runs check_physicality internally
            harmonic_balance_solve(build_generator(c.rates(), c.emitter, c.drives()),
                                   c.solver.n_h);
        }
    });

    check("oracle-agreement", [&] {
        const auto gen = build_generator(cfg.rates(), cfg.emitter, cfg.drives());
        const auto hb = harmonic_balance_solve(gen, cfg.solver.n_h);
        const auto ode = ode_steady_state(gen, 0.0, 1e-11, cfg.solver.n_h);
        const double d = harmonics_max_rel_diff(hb, ode);
        expect(d < 1e-6, "harmonic balance vs ODE rel diff " + std::to_string(d));
    });

    check("method-agreement", [&] {
        const auto b = single_photon_efficiencies(cfg);
        const auto a = single_photon_efficiencies_regression(cfg);
        expect(std::abs(a.p_tot - b.p_tot) <= 0.01 * b.p_tot &&
                   std::abs(a.p_coh - b.p_coh) <= 0.01 * b.p_coh,
               "regression vs perturbative slopes disagree > 1%");
    });

    check("frame-independence", [&] {
        SystemConfig c = cfg;
        c.signal_flux = 0.0;
        auto solve = [&c](double mu_s) {
            SystemConfig cc = c;
            cc.mu_s = mu_s;
            return harmonic_balance_solve(
                build_generator(cc.rates(), cc.emitter, cc.drives()), cc.solver.n_h);
        };
        const auto h1 = solve(cfg.emitter.omega_10);
        const auto h2 = solve(cfg.emitter.omega_10 * 0.73);
        for (int j = 0; j < 3; ++j)
            expect(std::abs(h1.s(0, j, j) - h2.s(0, j, j)) < 1e-10,
                   "populations depend on mu_s at zero signal");
        expect(std::abs(h1.s(-1, 0, 2) - h2.s(-1, 0, 2)) <
                   1e-9 * std::abs(h1.s(-1, 0, 2)),
               "drive-line coherence depends on mu_s at zero signal");
    });

    check("truncation", [&] {
        const double d = truncation_delta(cfg);
        expect(d < 1e-8, "harmonic truncation not converged, delta " + std::to_string(d));
    });

    check("extinction-pin", [&] {
        EffectiveRates r;
        r.gamma_10_i = 33e3;
        r.gamma_20_i = 3.5e6;
        r.gamma_20_e = 14e6;
        EmitterParams em;
        em.omega_10 = 10e9;
        em.omega_20 = 500e12;
        DriveConfig d;
        d.mu_s = 10e9;
        d.e_d = 1.0;
        d.mu_d = 500e12;
        const auto h = harmonic_balance_solve(build_generator(r, em, d), 2);
        const std::complex<double> c_out =
            d.e_d - std::complex<double>(0.0, 1.0) *
                        std::sqrt(kTwoPi * r.gamma_20_e) *
                        lab_frame_component(h, 0, 2, 1, 0);
        const double want = 1.0 - 2.0 * r.gamma_20_e / r.gamma_20_t();
        expect(std::abs(c_out - std::complex<double>(want, 0.0)) < 1e-4 * std::abs(want),
               "two-level extinction does not match the input-output formula");
    });

    check("determinism", [&] {
        const std::vector<double> g1 = {0.0, 1e6};
        const std::vector<double> g2 = {0.0, 1e6, 1e7};
        const auto rows1 = sweep_dephasing(cfg, g1, g2, 1);
        const auto rows4 = sweep_dephasing(cfg, g1, g2, std::max(4, threads));
        for (std::size_t i = 0; i < rows1.size(); ++i)
            expect(detail::csv_number(rows1[i].p_coh) == detail::csv_number(rows4[i].p_coh) &&
                       detail::csv_number(rows1[i].p_tot) == detail::csv_number(rows4[i].p_tot),
                   "sweep output depends on thread count");
    });

    return out;
}

int run_experiment(const std::string& name, const RunOptions& opts, std::ostream& log) {
    if (std::find(experiment_names().begin(), experiment_names().end(), name) ==
        experiment_names().end())
        throw ConfigError("unknown experiment '" + name + "'");

    SystemConfig cfg = resolve_config(opts.config_path, opts.overrides);
    if (opts.n_h > 0) cfg.solver.n_h = opts.n_h;
    validate(cfg);

    namespace fs = std::filesystem;
    const fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);

    const auto t_start = std::chrono::steady_clock::now();
    json manifest;
    manifest["experiment"] = name;
    manifest["tool_version"] = kToolVersion;
    {
        std::ostringstream hex;
        hex << std::hex << config_hash(cfg);
        manifest["config_hash"] = hex.str();
    }
    manifest["resolved_config"] = to_json(cfg);
    manifest["solver"] = {{"n_h", cfg.solver.n_h},
                          {"ode_horizon_factor", cfg.solver.ode_horizon_factor},
                          {"threads", opts.threads}};
    manifest["calibration"] = "default cavity internal losses (kappa_b_i, kappa_c_i) "
                              "calibrated against the reference figures of merit; "
                              "see docs/config.md";

    int exit_code = 0;
    try {
        if (name != "rates" && name != "validate") {
            const double delta = truncation_delta(cfg);
            manifest["nh_convergence"] = {{"max_delta", delta},
                                          {"converged", delta < 1e-8}};
            if (delta >= 1e-8)
                log << "warning: harmonic truncation n_h = " << cfg.solver.n_h
                    << " not converged (delta " << delta << ")\n";
        }

        if (name == "rates") {
            const EffectiveRates r = cfg.rates();
            json s;
            s["gamma_10_i"] = r.gamma_10_i;
            s["gamma_10_e"] = r.gamma_10_e;
            s["gamma_10_t"] = r.gamma_10_t();
            s["gamma_20_i"] = r.gamma_20_i;
            s["gamma_20_e"] = r.gamma_20_e;
            s["gamma_20_t"] = r.gamma_20_t();
            s["gamma_21_i"] = r.gamma_21_i;
            s["gamma_21_e"] = r.gamma_21_e;
            s["gamma_21_t"] = r.gamma_21_t();
            s["ground_state_splitting"] = ground_state_splitting(cfg.zero_field);
            s["pump_flux"] = cfg.pump_flux();
            s["omega_21"] = cfg.emitter.omega_21();
            write_json(out_dir / "summary.json", s);
        } else if (name == "convert") {
            const ConversionMetrics m = convert_point(cfg);
            json s;
            s["p_tot"] = m.p_tot;
            s["p_coh"] = m.p_coh;
            s["p_inc"] = m.p_inc;
            s["theta"] = m.theta;
            s["r_dark"] = m.r_dark;
            s["bandwidth_fwhm"] = m.bandwidth_fwhm;
            s["tau_conv"] = m.tau_conv;
            write_json(out_dir / "summary.json", s);
        } else if (name == "bandwidth") {
            const BandwidthResult b = conversion_bandwidth(cfg);
            std::vector<std::vector<double>> rows;
            for (const auto& [d, p] : b.curve) rows.push_back({d, p});
            write_csv(out_dir / "bandwidth.csv", {"delta_mu_s", "p_coh"}, rows);
            write_json(out_dir / "summary.json",
                       json{{"bandwidth_fwhm", b.bandwidth_fwhm},
                            {"tau_conv", b.tau_conv}});
        } else if (name == "sweep-pump") {
            const auto rows = sweep_pump(cfg, pump_grid_pw(), opts.threads);
            std::vector<std::vector<double>> data;
            for (const auto& r : rows) data.push_back({r.power_pw, r.p_coh, r.r_dark});
            write_csv(out_dir / "sweep-pump.csv", {"power_pw", "p_coh", "r_dark"}, data);
        } else if (name == "sweep-dephasing") {
            const auto rows = sweep_dephasing(cfg, default_dephasing_grid(),
                                              default_dephasing_grid(), opts.threads);
            std::vector<std::vector<double>> data;
            for (const auto& r : rows)
                data.push_back({r.gamma_phi_1, r.gamma_phi_2, r.p_coh, r.p_tot, r.ratio});
            write_csv(out_dir / "sweep-dephasing.csv",
                      {"gamma_phi_1", "gamma_phi_2", "p_coh", "p_tot", "ratio"}, data);
        } else if (name == "sweep-detuning") {
            const auto rows =
                sweep_detuning(cfg, default_detuning_grid_10(cfg),
                               default_detuning_grid_20(cfg), opts.threads);
            std::vector<std::vector<double>> data;
            for (const auto& r : rows)
                data.push_back({r.delta_omega_10, r.delta_omega_20, r.p_coh, r.p_tot,
                                r.ratio, r.theta});
            write_csv(out_dir / "sweep-detuning.csv",
                      {"delta_omega_10", "delta_omega_20", "p_coh", "p_tot", "ratio",
                       "theta"},
                      data);
        } else if (name == "entangle") {
            const EntanglementResult e = entangle_from_config(cfg);
            const NodeChannel b = baseline_node(cfg);
            const ClickWeights w = click_weights(b, b);
            json s;
            s["pi_00"] = w.pi_00;
            s["pi_01"] = w.pi_01;
            s["pi_10"] = w.pi_10;
            s["pi_11"] = w.pi_11;
            s["p_e_opt"] = e.p_e_opt;
            s["n_click"] = e.n_click;
            s["f_1c"] = e.f_1c;
            s["r_herald"] = e.r_herald;
            s["node"] = {{"p_tot", b.p_tot},   {"p_coh", b.p_coh},
                         {"p_inc", b.p_inc},   {"p_dark", b.p_dark},
                         {"tau_conv", b.tau_conv}};
            write_json(out_dir / "summary.json", s);
        } else if (name == "sweep-ent-dephasing") {
            const auto rows = sweep_entanglement_dephasing(
                cfg, default_dephasing_grid(), default_dephasing_grid(), opts.threads);
            std::vector<std::vector<double>> data;
            for (const auto& r : rows)
                data.push_back({r.gamma_phi_1, r.gamma_phi_2, r.f_1c, r.r_herald,
                                r.ratio, r.p_dark, r.p_e, r.regime_ok ? 1.0 : 0.0});
            write_csv(out_dir / "sweep-ent-dephasing.csv",
                      {"gamma_phi_1", "gamma_phi_2", "f_1c", "r_herald", "ratio",
                       "p_dark", "p_e", "regime_ok"},
                      data);
        } else if (name == "sweep-ent-detuning") {
            const auto rows = sweep_entanglement_detuning(
                cfg, default_detuning_grid_10(cfg), default_detuning_grid_20(cfg),
                opts.threads);
            std::vector<std::vector<double>> data;
            for (const auto& r : rows)
                data.push_back({r.delta_omega_10, r.delta_omega_20, r.f_1c, r.r_herald,
                                r.theta, r.p_e, r.regime_ok ? 1.0 : 0.0});
            write_csv(out_dir / "sweep-ent-detuning.csv",
                      {"delta_omega_10", "delta_omega_20", "f_1c", "r_herald", "theta",
                       "p_e", "regime_ok"},
                      data);
        } else if (name == "validate") {
            const auto checks = run_validation_suite(cfg, opts.threads);
            json s;
            s["checks"] = json::array();
            int failed = 0;
            for (const auto& c : checks) {
                log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
                if (!c.details.empty()) log << ": " << c.details;
                log << "\n";
                s["checks"].push_back(
                    {{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
                if (!c.pass) ++failed;
            }
            s["failed"] = failed;
            manifest["checks"] = s["checks"];
            write_json(out_dir / "summary.json", s);
            if (failed > 0) exit_code = 4;
        }
    } catch (const std::exception& e) {
        manifest["error"] = e.what();
        manifest["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t_start)
                .count();
        write_json(out_dir / "manifest.json", manifest);
        throw;
    }

    manifest["wall_time_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - t_start)
                                   .count();
    write_json(out_dir / "manifest.json", manifest);
    return exit_code;
}

} // namespace transducer
