// design.hpp - trace-shape metrics and modulation-depth optimisation.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfc/bessel.hpp"
#include "bfc/model.hpp"
#include "bfc/types.hpp"

namespace bfc {

/**
 * Full width at half maximum of the coincidence trace over one repetition
 * period, in ps. The window is centred on the trace peak and the width spans
 * the outermost half-maximum crossings inside it, so shoulder lobes that rise
 * above half maximum (as a dispersed trace develops) count toward the width.
 * Crossings are refined by bisection to 1e-4 ps. Throws when the trace never
 * drops below half maximum (e.g. a single-bin state is flat).
 */
[[nodiscard]] inline double trace_fwhm(const BfcState& state,
                                       const MixingCoefficients& mixing,
                                       double beta2l_total_ps2 = 0.0,
                                       int samples = 4096) {
    if (samples < 256) throw std::invalid_argument("trace_fwhm: need at least 256 samples");
    const double period = state.t_rep_ps();
    auto trace = [&](double u) {
        return coincidence_probability_dispersive(state, mixing, u, beta2l_total_ps2);
    };

    // Locate the peak on a coarse pass, then resample a window centred on it.
    double peak_u = 0.0, peak_v = -1.0;
    for (int j = 0; j <= samples; ++j) {
        const double u = (static_cast<double>(j) / samples - 0.5) * period;
        const double v = trace(u);
        if (v > peak_v) { peak_v = v; peak_u = u; }
    }
    const double lo = peak_u - 0.5 * period;
    std::vector<double> u(static_cast<std::size_t>(samples) + 1), v(static_cast<std::size_t>(samples) + 1);
    double vmax = -1.0;
    for (int j = 0; j <= samples; ++j) {
        u[static_cast<std::size_t>(j)] = lo + period * static_cast<double>(j) / samples;
        v[static_cast<std::size_t>(j)] = trace(u[static_cast<std::size_t>(j)]);
        vmax = std::max(vmax, v[static_cast<std::size_t>(j)]);
    }
    if (!(vmax > 0.0)) throw std::runtime_error("trace_fwhm: trace vanishes");
    const double half = 0.5 * vmax;

    auto bisect = [&](double a, double b) {
        // invariant: trace - half changes sign on [a, b]
        double fa = trace(a) - half;
        while (b - a > 1e-4) {
            const double m = 0.5 * (a + b);
            const double fm = trace(m) - half;
            if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; } else { b = m; }
        }
        return 0.5 * (a + b);
    };

    double first = 0.0, last = 0.0;
    bool found = false;
    for (int j = 0; j < samples; ++j) {
        const double f0 = v[static_cast<std::size_t>(j)] - half;
        const double f1 = v[static_cast<std::size_t>(j) + 1] - half;
        if ((f0 < 0.0) != (f1 < 0.0)) {
            const double c = bisect(u[static_cast<std::size_t>(j)], u[static_cast<std::size_t>(j) + 1]);
            if (!found) { first = c; found = true; }
            last = c;
        }
    }
    if (!found) throw std::runtime_error("trace_fwhm: trace never crosses half maximum");
    return last - first;
}

/**
 * Steepest slope (absolute value, per ps) of the coincidence trace at the
 * given modulation depths. This is the delay sensitivity figure of merit at
 * fixed source flux: the detected rate changes fastest with delay where the
 * raw trace is steepest, so the trace is deliberately not renormalised per
 * depth setting. Grid search with central differences, then golden-section
 * refinement around the best grid point.
 */
[[nodiscard]] inline double max_trace_slope(const BfcState& state,
                                            double depth_signal_rad,
                                            double depth_idler_rad,
                                            int samples = 2048) {
    if (samples < 64) throw std::invalid_argument("max_trace_slope: need at least 64 samples");
    const auto mixing = mixing_coefficients(depth_signal_rad, depth_idler_rad, state.half_dim);
    const double period = state.t_rep_ps();
    const double omega = angular_rad_per_ps(state.fsr_ghz);

    auto trace = [&](double u) { return coincidence_probability(state, mixing, omega * u); };

    double vmax = 0.0;
    std::vector<double> v(static_cast<std::size_t>(samples));
    const double h = period / samples;
    for (int j = 0; j < samples; ++j) {
        v[static_cast<std::size_t>(j)] = trace(h * static_cast<double>(j));
        vmax = std::max(vmax, v[static_cast<std::size_t>(j)]);
    }
    if (!(vmax > 0.0)) return 0.0;  // trace vanishes identically; no sensitivity

    // |d/du| by central difference at grid points (periodic wrap), coarse
    // candidate first.
    int best_j = 0;
    double best = -1.0;
    for (int j = 0; j < samples; ++j) {
        const double d = std::abs(v[static_cast<std::size_t>((j + 1) % samples)] -
                                  v[static_cast<std::size_t>((j + samples - 1) % samples)]) /
                         (2.0 * h);
        if (d > best) { best = d; best_j = j; }
    }

    const double hf = h / 16.0;  // finer central-difference step for refinement
    auto slope_at = [&](double u) { return std::abs(trace(u + hf) - trace(u - hf)) / (2.0 * hf); };

    // Golden-section maximisation of the slope magnitude over the bracket
    // around the best grid point.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = h * static_cast<double>(best_j - 1);
    double b = h * static_cast<double>(best_j + 1);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = slope_at(x1), f2 = slope_at(x2);
    while (b - a > 1e-8 * period) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = slope_at(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = slope_at(x1);
        }
    }
    return std::max({best, f1, f2});
}

struct SlopeMap {
    std::vector<double> depths;  // shared signal/idler depth axis, rad
    std::vector<double> slopes;  // row-major: slopes[i_signal * depths.size() + i_idler]
    double best_depth_signal_rad = 0.0;
    double best_depth_idler_rad = 0.0;
    double best_slope_per_ps = 0.0;

    [[nodiscard]] double at(std::size_t i_signal, std::size_t i_idler) const {
        return slopes.at(i_signal * depths.size() + i_idler);
    }
};

/**
 * max_trace_slope evaluated over a depth x depth grid. Ties on the best value
 * resolve to the lowest signal depth, then the lowest idler depth, so the
 * reported optimum is deterministic.
 */
[[nodiscard]] inline SlopeMap slope_map(const BfcState& state,
                                        std::span<const double> depth_grid,
                                        int samples = 1024) {
    if (depth_grid.empty()) throw std::invalid_argument("slope_map: empty depth grid");
    SlopeMap map;
    map.depths.assign(depth_grid.begin(), depth_grid.end());
    const std::size_t g = map.depths.size();
    map.slopes.resize(g * g);
    map.best_slope_per_ps = -1.0;
    for (std::size_t is = 0; is < g; ++is) {
        for (std::size_t ii = 0; ii < g; ++ii) {
            const double s = max_trace_slope(state, map.depths[is], map.depths[ii], samples);
            map.slopes[is * g + ii] = s;
            if (s > map.best_slope_per_ps) {
                map.best_slope_per_ps = s;
                map.best_depth_signal_rad = map.depths[is];
                map.best_depth_idler_rad = map.depths[ii];
            }
        }
    }
    return map;
}

/**
 * Attenuation-only shaper mask that flattens the mixed-bin weights at equal
 * modulation depths: w_k = min_j |J_j(m)| / |J_k(m)|, so the strongest
 * attenuation is unity and the weakest bin sets the common level. Throws
 * std::domain_error when some |J_k(m)| is below 1e-12 (the bin cannot be
 * equalised by attenuating the others; m near a Bessel zero).
 */
[[nodiscard]] inline std::vector<double> equalization_weights(double mod_depth_rad, int half_dim) {
    if (half_dim < 0) throw std::invalid_argument("equalization_weights: negative half_dim");
    const auto row = bessel_j_row(half_dim, mod_depth_rad);
    double min_abs = std::abs(row[0]);
    int min_order = -half_dim;
    for (int k = -half_dim; k <= half_dim; ++k) {
        const double a = std::abs(row[static_cast<std::size_t>(k + half_dim)]);
        if (a < min_abs) { min_abs = a; min_order = k; }
    }
    if (min_abs < 1e-12)
        throw std::domain_error("equalization_weights: |J_k| vanishes at k=" + std::to_string(min_order) +
                                " for depth " + std::to_string(mod_depth_rad) + " rad");
    std::vector<double> w(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = min_abs / std::abs(row[i]);
    return w;
}

// Applies per-bin shaper weights to both routes: route k picks up the signal
// mask at bin k and the idler mask at bin -k.
[[nodiscard]] inline MixingCoefficients apply_equalization(const MixingCoefficients& mixing,
                                                           std::span<const double> weights) {
    const int half_dim = mixing.half_dim;
    if (weights.size() != static_cast<std::size_t>(2 * half_dim + 1))
        throw std::invalid_argument("apply_equalization: weight count does not match mixing dimension");
    MixingCoefficients out = mixing;
    for (int k = -half_dim; k <= half_dim; ++k)
        out.values[static_cast<std::size_t>(k + half_dim)] *=
            weights[static_cast<std::size_t>(k + half_dim)] * weights[static_cast<std::size_t>(half_dim - k)];
    return out;
}

}  // namespace bfc
