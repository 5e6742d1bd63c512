#include "transducer/params.hpp"

#include <cmath>

namespace transducer {

namespace {
constexpr double kPlanck = 6.62607015e-34; // J s

void require_nonneg(double v, const char* name) {
    if (v < 0.0 || !std::isfinite(v))
        throw ConfigError(std::string(name) + " must be finite and >= 0");
}
} // namespace

EffectiveRates effective_rates(const CavityChain& c, const EmitterParams& em) {
    require_nonneg(c.kappa_a_i, "kappa_a_i");
    require_nonneg(c.kappa_a_e, "kappa_a_e");
    require_nonneg(c.kappa_b_i, "kappa_b_i");
    require_nonneg(c.kappa_b_e, "kappa_b_e");
    require_nonneg(c.kappa_c_i, "kappa_c_i");
    require_nonneg(c.kappa_c_e, "kappa_c_e");
    require_nonneg(em.gamma_10, "gamma_10");
    require_nonneg(em.gamma_20, "gamma_20");
    require_nonneg(em.gamma_21, "gamma_21");

    const double ka = c.kappa_a_t();
    const double kb = c.kappa_b_t();
    const double kc = c.kappa_c_t();
    if (ka <= 0.0) throw ConfigError("kappa_a_t must be > 0");
    if (kb <= 0.0) throw ConfigError("kappa_b_t must be > 0");
    if (kc <= 0.0) throw ConfigError("kappa_c_t must be > 0");

    const double gx2 = c.g_x * c.g_x;
    const double gy2 = c.g_y * c.g_y;
    const double g02sq = c.g_02 * c.g_02;
    const double g12sq = c.g_12 * c.g_12;

    EffectiveRates r;
    r.gamma_10_i = em.gamma_10 + 4.0 * gy2 * c.kappa_b_i / (kb * kb)
                 + 16.0 * gx2 * gy2 * c.kappa_a_i / (ka * ka * kb * kb);
    r.gamma_10_e = 16.0 * gx2 * gy2 * c.kappa_a_e / (ka * ka * kb * kb);
    r.gamma_20_i = em.gamma_20 + 4.0 * g02sq * c.kappa_c_i / (kc * kc);
    r.gamma_20_e = 4.0 * g02sq * c.kappa_c_e / (kc * kc);
    r.gamma_21_i = em.gamma_21 + 4.0 * g12sq * c.kappa_c_i / (kc * kc);
    r.gamma_21_e = 4.0 * g12sq * c.kappa_c_e / (kc * kc);
    return r;
}

double ground_state_splitting(const NVZeroFieldParams& p) {
    return 2.0 * std::hypot(p.lambda_so, p.epsilon_perp);
}

double power_to_flux(double power_watts, double frequency_hz) {
    require_nonneg(power_watts, "power");
    if (!(frequency_hz > 0.0))
        throw ConfigError("power_to_flux: frequency must be > 0");
    return power_watts / (kPlanck * frequency_hz);
}

double flux_to_power(double flux, double frequency_hz) {
    require_nonneg(flux, "flux");
    if (!(frequency_hz > 0.0))
        throw ConfigError("flux_to_power: frequency must be > 0");
    return flux * kPlanck * frequency_hz;
}

double ple_pass_probability(double linewidth_gamma, double threshold) {
    require_nonneg(linewidth_gamma, "linewidth");
    require_nonneg(threshold, "threshold");
    if (linewidth_gamma == 0.0) return 1.0;
    const double sigma = linewidth_gamma / 2.36;
    return std::erf(threshold / (sigma * std::sqrt(2.0)));
}

} // namespace transducer
