// oracle.hpp - brute-force filter integral behind the closed-form trace.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "bfc/bessel.hpp"
#include "bfc/types.hpp"

namespace bfc {

struct OracleResult {
    double value = 0.0;           // mean coincidence density over the filter passband
    bool regime_warning = false;  // set when the filters stop being narrow against the comb spacing
};

/**
 * Coincidence probability computed the long way round: integrate the filtered
 * two-photon amplitude over the detection band instead of collapsing it onto
 * the bin centres.
 *
 * Detection filters are ideal rectangles of width filter_width_ghz centred on
 * the outermost bin pair (signal at +Omega_0, idler at -Omega_0). For each
 * in-band detuning Omega the amplitude sums the 2N+1 sideband routes into that
 * filter pair; route k carries
 *   - the joint bin amplitude alpha_k (flat across each carved bin),
 *   - the modulator weight J_k(m_s) J_{-k}(m_i) and drive phase exp(ik(phi_s - phi_i)),
 *   - each arm's propagation phase exp(i omega tau) at its actual optical
 *     frequency and the pulse-shaper linear phase exp(+/- ik psi),
 *   - each arm's quadratic spectral phase exp(i/2 b2l (Omega + k w)^2)
 *     evaluated at the integration frequency, not the bin centre.
 * The returned value is the passband average of |amplitude|^2, which matches
 * the scale of coincidence_probability as the filters narrow.
 *
 * Valid as a model of the closed form only while filter_width << fsr; the
 * regime_warning flag is set once filter_width >= fsr/2.
 */
[[nodiscard]] inline OracleResult oracle_filter_integral(const BfcState& state,
                                                         const ChannelSettings& signal,
                                                         const ChannelSettings& idler,
                                                         double filter_width_ghz,
                                                         int grid_points) {
    if (!(filter_width_ghz > 0.0) || !std::isfinite(filter_width_ghz))
        throw std::invalid_argument("oracle_filter_integral: filter width must be positive");
    if (grid_points < 101)
        throw std::invalid_argument("oracle_filter_integral: grid_points must be >= 101");
    if (filter_width_ghz > state.fsr_ghz)
        throw std::invalid_argument(
            "oracle_filter_integral: filter wider than the comb spacing mixes neighbouring bins");
    signal.validate();
    idler.validate();

    const int n = state.half_dim;
    const double omega = angular_rad_per_ps(state.fsr_ghz);
    const double omega0 = angular_rad_per_ps(state.offset_ghz);
    const double wc = angular_rad_per_ps(state.center_ghz);
    const double half_width = 0.5 * angular_rad_per_ps(filter_width_ghz);

    // Per-route factors that do not depend on the integration detuning.
    const auto js = bessel_j_row(n, signal.mod_depth_rad);
    const auto ji = bessel_j_row(n, idler.mod_depth_rad);
    const double phi_rf = signal.rf_phase_rad - idler.rf_phase_rad;
    const double tau = signal.delay_ps - idler.delay_ps;
    cvector_t fixed(static_cast<std::size_t>(2 * n + 1));
    for (int k = -n; k <= n; ++k) {
        const auto i = static_cast<std::size_t>(k + n);
        const double cfac = js[i] * ji[static_cast<std::size_t>(n - k)];
        const double ph = static_cast<double>(k) *
                          (omega * tau + phi_rf +
                           signal.linear_phase_increment_rad - idler.linear_phase_increment_rad);
        fixed[i] = state.amplitude(k) * cfac * std::polar(1.0, ph);
    }

    // Composite Simpson over the passband; the grid is forced odd.
    int points = grid_points | 1;
    const double step = 2.0 * half_width / static_cast<double>(points - 1);
    double integral = 0.0;
    for (int gi = 0; gi < points; ++gi) {
        const double det = -half_width + step * static_cast<double>(gi);  // Omega - Omega_0
        complex_t amp{0.0, 0.0};
        for (int k = -n; k <= n; ++k) {
            const double kw = static_cast<double>(k) * omega;
            const double x = omega0 + det + kw;  // route k detuning from the optical centre
            // Arm phases at the actual frequencies omega_c (+/-) x; the common
            // carrier term cancels in |amp|^2 but is kept for structural fidelity.
            const double ph_delay = (wc + x) * signal.delay_ps + (wc - x) * idler.delay_ps -
                                    static_cast<double>(k) * omega * tau;  // k part already in `fixed`
            const double ph_disp = 0.5 * signal.quad_dispersion_ps2 * x * x +
                                   0.5 * idler.quad_dispersion_ps2 * x * x;
            amp += fixed[static_cast<std::size_t>(k + n)] * std::polar(1.0, ph_delay + ph_disp);
        }
        const double f = std::norm(amp);
        const double w = (gi == 0 || gi == points - 1) ? 1.0 : (gi % 2 == 1 ? 4.0 : 2.0);
        integral += w * f;
    }
    integral *= step / 3.0;

    OracleResult out;
    out.value = integral / (2.0 * half_width);
    out.regime_warning = filter_width_ghz >= 0.5 * state.fsr_ghz;
    return out;
}

}  // namespace bfc
