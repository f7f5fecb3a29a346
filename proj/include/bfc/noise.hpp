// noise.hpp - expected scan traces and their shot-noise realisations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bfc/model.hpp"
#include "bfc/rng.hpp"
#include "bfc/types.hpp"

namespace bfc {

// Which arm setting the scan axis drives.
enum class ScanKind { delay, shaper_phase, rf_phase };
enum class ScanArm { signal, idler };

struct AcquisitionConfig {
    double pair_flux_hz = 0.0;        // detected pairs per second at unit normalised probability
    double acq_time_s = 0.0;          // integration time per scan point
    double background_rate_hz = 0.0;  // flat accidental rate, off by default
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(pair_flux_hz >= 0.0) || !std::isfinite(pair_flux_hz))
            throw std::invalid_argument("AcquisitionConfig: pair_flux_hz must be >= 0");
        if (!(acq_time_s >= 0.0) || !std::isfinite(acq_time_s))
            throw std::invalid_argument("AcquisitionConfig: acq_time_s must be >= 0");
        if (!(background_rate_hz >= 0.0) || !std::isfinite(background_rate_hz))
            throw std::invalid_argument("AcquisitionConfig: background_rate_hz must be >= 0");
    }
};

struct Interferogram {
    ScanKind kind = ScanKind::delay;
    ScanArm arm = ScanArm::signal;
    std::vector<double> axis;              // ps for delay scans, radians otherwise
    std::vector<double> expected;          // peak-normalised mean trace
    std::vector<std::int64_t> counts;      // empty until sampled
    std::optional<AcquisitionConfig> acq;  // set alongside counts

    [[nodiscard]] bool has_counts() const { return !counts.empty(); }
};

namespace detail {

inline void check_axis(const std::vector<double>& axis) {
    if (axis.empty()) throw std::invalid_argument("scan axis must not be empty");
    for (double v : axis)
        if (!std::isfinite(v)) throw std::invalid_argument("scan axis must be finite");
    if (axis.size() < 2) return;
    const bool up = axis.back() >= axis.front();
    for (std::size_t i = 1; i < axis.size(); ++i) {
        const double d = axis[i] - axis[i - 1];
        if ((up && d <= 0.0) || (!up && d >= 0.0))
            throw std::invalid_argument("scan axis must be strictly monotone");
    }
}

}  // namespace detail

/**
 * Expected (noise-free) trace over a scan of one arm setting. The axis value
 * replaces the scanned field of the chosen arm; all other settings are taken
 * from `signal`/`idler` as given. When either arm carries quadratic spectral
 * phase the dispersive trace is evaluated, otherwise the plain interferometric
 * one; the result is peak-normalised to 1.
 */
[[nodiscard]] inline Interferogram scan_expected(const BfcState& state,
                                                 const MixingCoefficients& mixing,
                                                 const ChannelSettings& signal,
                                                 const ChannelSettings& idler,
                                                 const std::vector<double>& axis,
                                                 ScanKind kind,
                                                 ScanArm arm = ScanArm::signal) {
    detail::check_axis(axis);
    signal.validate();
    idler.validate();
    const double beta2l_total = signal.quad_dispersion_ps2 + idler.quad_dispersion_ps2;

    Interferogram out;
    out.kind = kind;
    out.arm = arm;
    out.axis = axis;
    out.expected.resize(axis.size());

    ChannelSettings s = signal;
    ChannelSettings i = idler;
    for (std::size_t p = 0; p < axis.size(); ++p) {
        ChannelSettings& scanned = (arm == ScanArm::signal) ? s : i;
        switch (kind) {
            case ScanKind::delay: scanned.delay_ps = axis[p]; break;
            case ScanKind::shaper_phase: scanned.linear_phase_increment_rad = axis[p]; break;
            case ScanKind::rf_phase: scanned.rf_phase_rad = axis[p]; break;
        }
        if (beta2l_total != 0.0) {
            const double tau_eff = effective_delay_dispersive(s, i, state.fsr_ghz, state.offset_ghz);
            out.expected[p] = coincidence_probability_dispersive(state, mixing, tau_eff, beta2l_total);
        } else {
            const double dphi = effective_phase(s, i, state.fsr_ghz).delta_phi_rad;
            out.expected[p] = coincidence_probability(state, mixing, dphi);
        }
    }

    const double peak = *std::max_element(out.expected.begin(), out.expected.end());
    if (!(peak > 0.0))
        throw std::runtime_error("scan_expected: trace vanishes everywhere, cannot normalise");
    for (double& v : out.expected) v /= peak;
    return out;
}

/**
 * Draws Poisson counts for every scan point with mean
 * pair_flux * acq_time * expected + background_rate * acq_time.
 * Deterministic per seed; returns a sampled copy, the input is untouched.
 */
[[nodiscard]] inline Interferogram sample_counts(const Interferogram& scan,
                                                 const AcquisitionConfig& acq) {
    acq.validate();
    if (scan.expected.empty() || scan.expected.size() != scan.axis.size())
        throw std::invalid_argument("sample_counts: interferogram lacks an expected trace");
    Interferogram out = scan;
    out.acq = acq;
    out.counts.resize(scan.expected.size());
    Rng rng(acq.rng_seed);
    const double dose = acq.pair_flux_hz * acq.acq_time_s;
    const double floor = acq.background_rate_hz * acq.acq_time_s;
    for (std::size_t p = 0; p < scan.expected.size(); ++p)
        out.counts[p] = rng.poisson(dose * scan.expected[p] + floor);
    return out;
}

struct TimeTagHistogram {
    double bin_width_ps = 0.0;
    std::vector<double> bin_centers;   // ps, ascending
    std::vector<std::int64_t> counts;
    double jitter_sigma_ps = 0.0;      // carried for tests
    double true_offset_ps = 0.0;       // carried for tests
    bool truncation_warning = false;   // span clipped the jitter distribution
};

/**
 * Arrival-time-difference histogram of `total_coincidences` events jittered
 * around true_offset with the given Gaussian sigma. Bins lie on the absolute
 * grid j*bin_width (as an event timer would place them) covering
 * [true_offset - span/2, true_offset + span/2]; events outside the span are
 * dropped, and a span below 6 sigma raises the truncation flag since the
 * clipped tails bias any later fit.
 */
[[nodiscard]] inline TimeTagHistogram simulate_histogram(double true_offset_ps,
                                                         double jitter_sigma_ps,
                                                         std::int64_t total_coincidences,
                                                         double bin_width_ps,
                                                         double span_ps,
                                                         std::uint64_t rng_seed) {
    if (!(bin_width_ps > 0.0) || !std::isfinite(bin_width_ps))
        throw std::invalid_argument("simulate_histogram: bin_width must be positive");
    if (!(span_ps >= bin_width_ps) || !std::isfinite(span_ps))
        throw std::invalid_argument("simulate_histogram: span must cover at least one bin");
    if (!(jitter_sigma_ps >= 0.0) || !std::isfinite(jitter_sigma_ps))
        throw std::invalid_argument("simulate_histogram: jitter sigma must be >= 0");
    if (!std::isfinite(true_offset_ps))
        throw std::invalid_argument("simulate_histogram: true_offset must be finite");
    if (total_coincidences < 0)
        throw std::invalid_argument("simulate_histogram: total_coincidences must be >= 0");

    TimeTagHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.jitter_sigma_ps = jitter_sigma_ps;
    h.true_offset_ps = true_offset_ps;
    h.truncation_warning = span_ps < 6.0 * jitter_sigma_ps;

    const auto first_bin = static_cast<std::int64_t>(
        std::floor((true_offset_ps - 0.5 * span_ps) / bin_width_ps));
    const auto bin_count = static_cast<std::size_t>(std::ceil(span_ps / bin_width_ps));
    h.bin_centers.resize(bin_count);
    h.counts.assign(bin_count, 0);
    for (std::size_t i = 0; i < bin_count; ++i)
        h.bin_centers[i] = (static_cast<double>(first_bin) + static_cast<double>(i) + 0.5) * bin_width_ps;

    Rng rng(rng_seed);
    const double lo = static_cast<double>(first_bin) * bin_width_ps;
    for (std::int64_t ev = 0; ev < total_coincidences; ++ev) {
        const double t = true_offset_ps + jitter_sigma_ps * rng.normal();
        const auto idx = static_cast<std::int64_t>(std::floor((t - lo) / bin_width_ps));
        if (idx >= 0 && idx < static_cast<std::int64_t>(bin_count))
            ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

}  // namespace bfc
