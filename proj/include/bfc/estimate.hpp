// estimate.hpp - absolute-delay disambiguation, phase readout, CI pooling.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfc/types.hpp"

namespace bfc {

// Raised when the coarse arrival-time difference falls between repetition
// slots, so no integer period count can be assigned with confidence.
struct AmbiguityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DisambiguationResult {
    long long period_count = 0;     // integer number of repetition periods
    double coarse_diff_ps = 0.0;    // histogram-centre difference driving the count
    double total_delay_ps = 0.0;    // period_count * t_rep + fine-delay difference
    double ci95_half_width_ps = 0.0;
};

/**
 * Combines a coarse arrival-time measurement with the sub-period fine delay
 * read off the interferogram fits. The histogram centres (with / without the
 * inserted delay) fix the integer period count; the fine fits supply the
 * fractional part. The coarse residual must sit within a quarter period of a
 * slot, otherwise the count is untrustworthy and AmbiguityError is thrown.
 * Fine-fit CI half-widths combine in quadrature.
 */
[[nodiscard]] inline DisambiguationResult disambiguate(double tau_hist_with_ps,
                                                       double tau_hist_without_ps,
                                                       double fine_with_ps,
                                                       double fine_without_ps,
                                                       double t_rep_ps,
                                                       double fine_ci_with_ps = 0.0,
                                                       double fine_ci_without_ps = 0.0) {
    if (!(t_rep_ps > 0.0)) throw std::invalid_argument("disambiguate: t_rep must be positive");
    DisambiguationResult res;
    res.coarse_diff_ps = tau_hist_with_ps - tau_hist_without_ps;
    const double k_real = res.coarse_diff_ps / t_rep_ps;
    res.period_count = static_cast<long long>(std::llround(k_real));
    const double residual = res.coarse_diff_ps - static_cast<double>(res.period_count) * t_rep_ps;
    if (std::abs(residual) > 0.25 * t_rep_ps)
        throw AmbiguityError("disambiguate: coarse difference " + std::to_string(res.coarse_diff_ps) +
                             " ps is " + std::to_string(residual) + " ps from the nearest period slot (limit " +
                             std::to_string(0.25 * t_rep_ps) + " ps)");
    res.total_delay_ps = static_cast<double>(res.period_count) * t_rep_ps + (fine_with_ps - fine_without_ps);
    res.ci95_half_width_ps = std::hypot(fine_ci_with_ps, fine_ci_without_ps);
    return res;
}

/**
 * Modulation phase read back from the interferogram displacement it causes: a
 * drive phase step phi moves the fitted delay offset by -phi / omega_fsr, so
 * phi = -omega_fsr * (shifted - reference), wrapped to [0, 2pi).
 */
[[nodiscard]] inline double estimate_rf_phase(double delay_shifted_ps,
                                              double delay_reference_ps,
                                              double fsr_ghz) {
    if (!(fsr_ghz > 0.0)) throw std::invalid_argument("estimate_rf_phase: fsr must be positive");
    const double omega = angular_rad_per_ps(fsr_ghz);
    return wrap_to_2pi(-omega * (delay_shifted_ps - delay_reference_ps));
}

/**
 * Quadrature total for a quantity assembled from several independent
 * measurements: fitted contributions enter by their 95% CI half-widths,
 * physically measured ones by 3.92 standard errors (the full 95% interval
 * width of a symmetric contribution).
 */
[[nodiscard]] inline double combine_ci(std::span<const double> ci_half_widths,
                                       std::span<const double> standard_errors) {
    double s = 0.0;
    for (double h : ci_half_widths) {
        if (h < 0.0) throw std::invalid_argument("combine_ci: negative CI half-width");
        s += h * h;
    }
    for (double se : standard_errors) {
        if (se < 0.0) throw std::invalid_argument("combine_ci: negative standard error");
        const double h = 3.92 * se;
        s += h * h;
    }
    return std::sqrt(s);
}

/**
 * Per-bin shaper phases that cancel a total quadratic spectral phase:
 * phi_k = -0.5 * beta2l * (k * omega_fsr)^2. Feeding these to the dispersive
 * trace as extra bin phases restores the transform-limited shape exactly.
 */
[[nodiscard]] inline std::vector<double> compensation_phase(double beta2l_total_ps2, int half_dim, double fsr_ghz) {
    if (half_dim < 0) throw std::invalid_argument("compensation_phase: negative half_dim");
    if (!(fsr_ghz > 0.0)) throw std::invalid_argument("compensation_phase: fsr must be positive");
    const double omega = angular_rad_per_ps(fsr_ghz);
    std::vector<double> phases(static_cast<std::size_t>(2 * half_dim + 1));
    for (int k = -half_dim; k <= half_dim; ++k) {
        const double x = static_cast<double>(k) * omega;
        phases[static_cast<std::size_t>(k + half_dim)] = -0.5 * beta2l_total_ps2 * x * x;
    }
    return phases;
}

}  // namespace bfc
