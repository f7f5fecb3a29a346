// types.hpp - state and settings records shared across the library.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfc {

using complex_t = std::complex<double>;
using cvector_t = std::vector<complex_t>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Frequencies are carried as cyclic GHz; time in ps. 1 GHz of cyclic
// frequency corresponds to 2*pi/1000 rad/ps of angular frequency.
inline constexpr double rad_per_ps_per_ghz = two_pi / 1000.0;

[[nodiscard]] inline constexpr double angular_rad_per_ps(double freq_ghz) {
    return freq_ghz * rad_per_ps_per_ghz;
}

// Group velocity dispersion of SMF-28e near 1550 nm, ps^2 per metre.
inline constexpr double smf28_beta2_ps2_per_m = -2.16e-2;

inline double wrap_to_2pi(double phase_rad) {
    double w = std::fmod(phase_rad, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

// Wraps into the centred interval (-half, half].
inline double wrap_centered(double value, double full_period) {
    double w = std::fmod(value, full_period);
    if (w <= -0.5 * full_period) w += full_period;
    if (w > 0.5 * full_period) w -= full_period;
    return w;
}

/**
 * Biphoton frequency-comb state: 2N+1 signal/idler bin pairs spaced by the
 * free spectral range, with the signal band centred offset_ghz above the
 * degeneracy point and the idler band mirrored below it. amplitudes holds
 * alpha_k for k = -N..N (unit L2 norm); the bin pair k couples the signal bin
 * at +offset + k*fsr with the idler bin at -offset - k*fsr.
 */
struct BfcState {
    int half_dim = 0;              // N
    double fsr_ghz = 0.0;          // comb line spacing (cyclic)
    double offset_ghz = 0.0;       // Omega_0 / 2pi
    double center_ghz = 192700.0;  // absolute optical centre omega_0 / 2pi;
                                   // cancels everywhere except the filter-integral oracle
    cvector_t amplitudes;          // alpha_k, size 2N+1

    BfcState(int half_dim_, double fsr_ghz_, double offset_ghz_, cvector_t amplitudes_,
             double center_ghz_ = 192700.0)
        : half_dim(half_dim_),
          fsr_ghz(fsr_ghz_),
          offset_ghz(offset_ghz_),
          center_ghz(center_ghz_),
          amplitudes(std::move(amplitudes_)) {
        if (half_dim < 0) throw std::invalid_argument("BfcState: half_dim must be >= 0");
        if (!(fsr_ghz > 0.0) || !std::isfinite(fsr_ghz))
            throw std::invalid_argument("BfcState: fsr_ghz must be positive");
        if (!(offset_ghz >= 0.0) || !std::isfinite(offset_ghz))
            throw std::invalid_argument("BfcState: offset_ghz must be >= 0");
        if (amplitudes.size() != static_cast<std::size_t>(2 * half_dim + 1))
            throw std::invalid_argument("BfcState: amplitudes must hold 2*half_dim+1 entries");
        double norm = 0.0;
        for (const auto& a : amplitudes) norm += std::norm(a);
        if (std::abs(norm - 1.0) > 1e-9)
            throw std::invalid_argument("BfcState: amplitudes must be L2-normalised (|sum - 1| <= 1e-9)");
    }

    [[nodiscard]] int dim() const { return 2 * half_dim + 1; }
    [[nodiscard]] double t_rep_ps() const { return 1000.0 / fsr_ghz; }
    [[nodiscard]] const complex_t& amplitude(int k) const {
        return amplitudes[static_cast<std::size_t>(k + half_dim)];
    }

    // Maximally entangled profile: alpha_k = 1/sqrt(2N+1).
    [[nodiscard]] static BfcState uniform(int half_dim, double fsr_ghz, double offset_ghz,
                                          double center_ghz = 192700.0) {
        if (half_dim < 0) throw std::invalid_argument("BfcState::uniform: half_dim must be >= 0");
        const int d = 2 * half_dim + 1;
        cvector_t amps(static_cast<std::size_t>(d), complex_t{1.0 / std::sqrt(static_cast<double>(d)), 0.0});
        return BfcState(half_dim, fsr_ghz, offset_ghz, std::move(amps), center_ghz);
    }
};

// One arm of the interferometer. Defaults describe a transparent arm.
struct ChannelSettings {
    double delay_ps = 0.0;                  // optical delay tau
    double rf_phase_rad = 0.0;              // phase of the modulator drive
    double mod_depth_rad = 0.0;             // modulation depth m
    double linear_phase_increment_rad = 0.0;  // pulse-shaper linear phase, radians per bin
    double quad_dispersion_ps2 = 0.0;       // quadratic spectral phase beta2 * L

    void validate() const {
        if (!(mod_depth_rad >= 0.0) || !std::isfinite(mod_depth_rad))
            throw std::invalid_argument("ChannelSettings: mod_depth_rad must be >= 0");
        for (double v : {delay_ps, rf_phase_rad, linear_phase_increment_rad, quad_dispersion_ps2})
            if (!std::isfinite(v)) throw std::invalid_argument("ChannelSettings: fields must be finite");
    }
};

// Sideband mixing weights C_k produced by modulating both arms.
struct MixingCoefficients {
    int half_dim = 0;
    double depth_signal_rad = 0.0;
    double depth_idler_rad = 0.0;
    cvector_t values;  // C_k for k = -N..N

    [[nodiscard]] const complex_t& value(int k) const {
        return values[static_cast<std::size_t>(k + half_dim)];
    }

    // C_k = 1 for every k: the no-modulator limit used by the time-correlation view.
    [[nodiscard]] static MixingCoefficients unit(int half_dim) {
        if (half_dim < 0) throw std::invalid_argument("MixingCoefficients::unit: half_dim must be >= 0");
        MixingCoefficients m;
        m.half_dim = half_dim;
        m.values.assign(static_cast<std::size_t>(2 * half_dim + 1), complex_t{1.0, 0.0});
        return m;
    }
};

// Interferometric phase derived from a pair of arm settings.
struct DerivedPhase {
    double delta_phi_rad = 0.0;  // omega_fsr*tau + phi_rf + phi_shaper
    double tau_prime_ps = 0.0;   // (delta_phi + pi) / omega_fsr
    double t_rep_ps = 0.0;       // 2*pi / omega_fsr = 1000 / fsr_ghz
};

}  // namespace bfc
