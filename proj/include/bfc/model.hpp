// model.hpp - closed-form coincidence probabilities of the modulated comb.
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>

#include "bfc/bessel.hpp"
#include "bfc/types.hpp"

namespace bfc {

/**
 * Mixing weight of bin pair k when both arms are phase-modulated with depths
 * (m_s, m_i) at the comb spacing: C_k = J_k(m_s) * J_{-k}(m_i). For equal
 * depths this reduces to |J_k(m)|^2 * exp(i*k*pi).
 */
[[nodiscard]] inline MixingCoefficients mixing_coefficients(double depth_signal_rad,
                                                            double depth_idler_rad,
                                                            int half_dim) {
    if (half_dim < 0) throw std::invalid_argument("mixing_coefficients: half_dim must be >= 0");
    if (!(depth_signal_rad >= 0.0) || !(depth_idler_rad >= 0.0) ||
        !std::isfinite(depth_signal_rad) || !std::isfinite(depth_idler_rad))
        throw std::invalid_argument("mixing_coefficients: depths must be finite and >= 0");
    MixingCoefficients mix;
    mix.half_dim = half_dim;
    mix.depth_signal_rad = depth_signal_rad;
    mix.depth_idler_rad = depth_idler_rad;
    const auto js = bessel_j_row(half_dim, depth_signal_rad);
    const auto ji = bessel_j_row(half_dim, depth_idler_rad);
    mix.values.resize(static_cast<std::size_t>(2 * half_dim + 1));
    for (int k = -half_dim; k <= half_dim; ++k) {
        const auto is = static_cast<std::size_t>(half_dim + k);
        const auto ii = static_cast<std::size_t>(half_dim - k);  // order -k
        mix.values[is] = complex_t{js[is] * ji[ii], 0.0};
    }
    return mix;
}

/**
 * Collapses a pair of arm settings into the single interferometric phase
 * delta_phi = omega_fsr*(tau_s - tau_i) + (phi_s - phi_i) + (psi_s - psi_i),
 * where psi is the pulse-shaper linear increment per bin. Also reports the
 * equivalent scan delay tau' = (delta_phi + pi)/omega_fsr and the trace
 * period t_rep. All three knobs shift the trace interchangeably.
 */
[[nodiscard]] inline DerivedPhase effective_phase(const ChannelSettings& signal,
                                                  const ChannelSettings& idler,
                                                  double fsr_ghz) {
    if (!(fsr_ghz > 0.0) || !std::isfinite(fsr_ghz))
        throw std::invalid_argument("effective_phase: fsr_ghz must be positive");
    signal.validate();
    idler.validate();
    const double omega = angular_rad_per_ps(fsr_ghz);
    DerivedPhase out;
    out.delta_phi_rad = omega * (signal.delay_ps - idler.delay_ps) +
                        (signal.rf_phase_rad - idler.rf_phase_rad) +
                        (signal.linear_phase_increment_rad - idler.linear_phase_increment_rad);
    out.tau_prime_ps = (out.delta_phi_rad + std::numbers::pi) / omega;
    out.t_rep_ps = 1000.0 / fsr_ghz;
    return out;
}

/**
 * Un-normalised coincidence probability |sum_k alpha_k C_k exp(i k delta_phi)|^2.
 * Periodic in delta_phi with period 2*pi; scale carries no physical meaning,
 * only ratios across settings do.
 */
[[nodiscard]] inline double coincidence_probability(const BfcState& state,
                                                    const MixingCoefficients& mixing,
                                                    double delta_phi_rad) {
    if (mixing.half_dim != state.half_dim)
        throw std::invalid_argument("coincidence_probability: state and mixing dimensions differ");
    if (!std::isfinite(delta_phi_rad))
        throw std::invalid_argument("coincidence_probability: delta_phi must be finite");
    complex_t z{0.0, 0.0};
    for (int k = -state.half_dim; k <= state.half_dim; ++k) {
        const double ph = static_cast<double>(k) * delta_phi_rad;
        z += state.amplitude(k) * mixing.value(k) * std::polar(1.0, ph);
    }
    return std::norm(z);
}

/**
 * Coincidence trace through dispersive arms, expressed against the effective
 * delay tau_eff: |sum_k alpha_k |C_k| exp(i(0.5*b2l*k^2*w^2 + k*w*tau_eff))|^2
 * with w the angular comb spacing and b2l = beta2*(L_s + L_i) the summed
 * quadratic spectral phase of both arms. extra_bin_phase (when non-empty,
 * size 2N+1) adds a programmed per-bin phase, which is how a pulse shaper
 * cancels the quadratic term.
 */
[[nodiscard]] inline double coincidence_probability_dispersive(const BfcState& state,
                                                               const MixingCoefficients& mixing,
                                                               double tau_eff_ps,
                                                               double beta2l_total_ps2,
                                                               std::span<const double> extra_bin_phase = {}) {
    if (mixing.half_dim != state.half_dim)
        throw std::invalid_argument("coincidence_probability_dispersive: state and mixing dimensions differ");
    if (!std::isfinite(tau_eff_ps) || !std::isfinite(beta2l_total_ps2))
        throw std::invalid_argument("coincidence_probability_dispersive: arguments must be finite");
    if (!extra_bin_phase.empty() && extra_bin_phase.size() != static_cast<std::size_t>(state.dim()))
        throw std::invalid_argument("coincidence_probability_dispersive: extra_bin_phase must hold 2N+1 entries");
    const double omega = angular_rad_per_ps(state.fsr_ghz);
    complex_t z{0.0, 0.0};
    for (int k = -state.half_dim; k <= state.half_dim; ++k) {
        const double kf = static_cast<double>(k);
        double ph = 0.5 * beta2l_total_ps2 * kf * kf * omega * omega + kf * omega * tau_eff_ps;
        if (!extra_bin_phase.empty()) ph += extra_bin_phase[static_cast<std::size_t>(k + state.half_dim)];
        z += state.amplitude(k) * std::abs(mixing.value(k)) * std::polar(1.0, ph);
    }
    return std::norm(z);
}

/**
 * Effective delay entering the dispersive trace for a concrete pair of arm
 * settings: tau_eff = (tau_s - tau_i) + beta2*(L_s + L_i)*Omega_0
 *                     + (phi_rf + psi_shaper + pi)/omega_fsr.
 * The Omega_0 term is the group-delay shift both arms' fibres impose on a
 * band centred away from the degeneracy point.
 */
[[nodiscard]] inline double effective_delay_dispersive(const ChannelSettings& signal,
                                                       const ChannelSettings& idler,
                                                       double fsr_ghz,
                                                       double offset_ghz) {
    if (!(fsr_ghz > 0.0) || !std::isfinite(fsr_ghz))
        throw std::invalid_argument("effective_delay_dispersive: fsr_ghz must be positive");
    if (!(offset_ghz >= 0.0) || !std::isfinite(offset_ghz))
        throw std::invalid_argument("effective_delay_dispersive: offset_ghz must be >= 0");
    signal.validate();
    idler.validate();
    const double omega = angular_rad_per_ps(fsr_ghz);
    const double omega0 = angular_rad_per_ps(offset_ghz);
    const double beta2l_total = signal.quad_dispersion_ps2 + idler.quad_dispersion_ps2;
    return (signal.delay_ps - idler.delay_ps) + beta2l_total * omega0 +
           ((signal.rf_phase_rad - idler.rf_phase_rad) +
            (signal.linear_phase_increment_rad - idler.linear_phase_increment_rad) + std::numbers::pi) /
               omega;
}

/**
 * Second-order cross-correlation of the unmodulated comb against the
 * detection time difference t = t_s - t_i:
 * |sum_k alpha_k exp(-i k omega_fsr t)|^2. Identical to the coincidence
 * trace with unit mixing; revivals repeat every t_rep.
 */
[[nodiscard]] inline double g2_correlation(const BfcState& state, double t_diff_ps) {
    if (!std::isfinite(t_diff_ps))
        throw std::invalid_argument("g2_correlation: t_diff must be finite");
    const double omega = angular_rad_per_ps(state.fsr_ghz);
    complex_t z{0.0, 0.0};
    for (int k = -state.half_dim; k <= state.half_dim; ++k) {
        const double ph = -static_cast<double>(k) * omega * t_diff_ps;
        z += state.amplitude(k) * std::polar(1.0, ph);
    }
    return std::norm(z);
}

}  // namespace bfc
