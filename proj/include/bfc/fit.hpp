// fit.hpp - weighted least-squares extraction of trace parameters.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfc/model.hpp"
#include "bfc/noise.hpp"
#include "bfc/types.hpp"

namespace bfc {

struct FitResult {
    std::map<std::string, double> params;  // every effective model parameter
    std::map<std::string, double> ci95;    // half-widths, fitted parameters only
    double residual_norm = 0.0;            // sqrt of the (weighted) residual sum of squares
    bool converged = false;
    int iterations = 0;
};

// Model context for fitting a recorded interferogram. Channel settings give
// the fixed-parameter baseline (and the beta2l starting value); free_params
// selects what floats: any of "delay_offset", "rf_phase", "amplitude",
// "beta2l", "background". Empty means shift + amplitude.
struct FitModel {
    BfcState state;
    MixingCoefficients mixing;
    ChannelSettings signal;
    ChannelSettings idler;
    std::vector<std::string> free_params;
};

namespace detail {

// Solves A x = b (small p) by Gaussian elimination with partial pivoting.
// A is row-major and clobbered. Throws when the system is singular, which is
// how a degenerate Jacobian (e.g. a structureless trace) surfaces.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t p) {
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a[r * p + col]) > std::abs(a[piv * p + col])) piv = r;
        if (!(std::abs(a[piv * p + col]) > 1e-300))
            throw std::runtime_error("fit: degenerate normal equations (singular Jacobian)");
        if (piv != col) {
            for (std::size_t c = 0; c < p; ++c) std::swap(a[col * p + c], a[piv * p + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r * p + col] / a[col * p + col];
            for (std::size_t c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(p);
    for (std::size_t ri = p; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < p; ++c) s -= a[ri * p + c] * x[c];
        x[ri] = s / a[ri * p + ri];
    }
    return x;
}

struct GnOutcome {
    std::vector<double> theta;
    std::vector<double> ci95;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Damped Gauss-Newton: normal equations with multiplicative diagonal damping,
// x10 when a step raises the cost, /10 when it lowers it. Stops on a relative
// step below 1e-10 or after 200 iterations. `eval` fills model values and the
// row-major Jacobian for a parameter vector.
template <typename EvalFn>
GnOutcome gauss_newton(std::vector<double> theta,
                       const std::vector<double>& y,
                       const std::vector<double>& w,
                       EvalFn&& eval,
                       bool chi2_inflation = true) {
    const std::size_t n = y.size();
    const std::size_t p = theta.size();
    if (n <= p) throw std::invalid_argument("fit: need more data points than free parameters");

    std::vector<double> m(n), jac(n * p);
    auto cost_of = [&](const std::vector<double>& mv) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - mv[i];
            c += w[i] * r * r;
        }
        return c;
    };

    eval(theta, m, jac);
    double cost = cost_of(m);
    double lambda = 1e-3;
    GnOutcome out;

    std::vector<double> m_try(n), jac_try(n * p);
    for (int iter = 1; iter <= 200; ++iter) {
        out.iterations = iter;
        // Normal equations from the current linearisation.
        std::vector<double> jtj(p * p, 0.0), jtr(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - m[i];
            for (std::size_t a = 0; a < p; ++a) {
                const double ja = jac[i * p + a];
                jtr[a] += w[i] * ja * r;
                for (std::size_t b = a; b < p; ++b) jtj[a * p + b] += w[i] * ja * jac[i * p + b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * p + b] = jtj[b * p + a];

        bool accepted = false;
        double rel_step = 0.0;
        while (!accepted) {
            std::vector<double> damped = jtj;
            for (std::size_t a = 0; a < p; ++a) damped[a * p + a] *= (1.0 + lambda);
            const auto dtheta = solve_dense(std::move(damped), jtr, p);
            std::vector<double> theta_try(p);
            double dn = 0.0, tn = 0.0;
            for (std::size_t a = 0; a < p; ++a) {
                theta_try[a] = theta[a] + dtheta[a];
                dn += dtheta[a] * dtheta[a];
                tn += theta[a] * theta[a];
            }
            eval(theta_try, m_try, jac_try);
            const double cost_try = cost_of(m_try);
            if (cost_try <= cost) {
                theta = std::move(theta_try);
                cost = cost_try;
                m.swap(m_try);
                jac.swap(jac_try);
                lambda = std::max(lambda / 10.0, 1e-12);
                rel_step = std::sqrt(dn) / (std::sqrt(tn) + 1e-12);
                accepted = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e10) break;  // stalled against a cost wall
            }
        }
        if (!accepted) break;
        if (rel_step < 1e-10) {
            out.converged = true;
            break;
        }
    }

    // Intervals at the solution. The counting weights are only an
    // approximation of the true inverse variance (floored at empty bins and
    // taken from the observed counts), so the plain inverse of the normal
    // matrix understates the estimator spread on sparse data. The sandwich
    // form A^-1 (J^T W diag(model) W J) A^-1 with A = J^T W J takes the per
    // bin variance from the fitted model instead and reduces to the plain
    // inverse when the weights match it. The reduced chi^2 factor is applied
    // only when the weights make it dimensionless, and only ever inflates:
    // deflating by the sparse-data artefact above would undercover.
    std::vector<double> bread(p * p, 0.0), meat(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double var_i = std::max(m[i], 0.0);
        for (std::size_t a = 0; a < p; ++a) {
            const double ja = jac[i * p + a];
            for (std::size_t b = 0; b < p; ++b) {
                bread[a * p + b] += w[i] * ja * jac[i * p + b];
                meat[a * p + b] += w[i] * w[i] * var_i * ja * jac[i * p + b];
            }
        }
    }
    const double scale = chi2_inflation ? std::max(1.0, cost / static_cast<double>(n - p)) : 1.0;
    std::vector<std::vector<double>> ainv(p);
    for (std::size_t a = 0; a < p; ++a) {
        std::vector<double> unit(p, 0.0);
        unit[a] = 1.0;
        ainv[a] = solve_dense(bread, std::move(unit), p);
    }
    out.ci95.resize(p);
    for (std::size_t a = 0; a < p; ++a) {
        double var = 0.0;
        for (std::size_t b = 0; b < p; ++b)
            for (std::size_t c = 0; c < p; ++c) var += ainv[a][b] * meat[b * p + c] * ainv[a][c];
        out.ci95[a] = 1.96 * std::sqrt(std::max(var * scale, 0.0));
    }
    out.theta = std::move(theta);
    out.residual_norm = std::sqrt(cost);
    return out;
}

}  // namespace detail

/**
 * Fits A * S(x - delay_offset) + background to recorded counts, where S is
 * the trace shape fixed by the state, mixing weights and total quadratic
 * phase. Weights are inverse counts (floored at one) as appropriate for
 * Poisson data. delay_offset is identifiable only modulo the trace period and
 * is reported wrapped into (-t_rep/2, t_rep/2]; absolute delays need the
 * histogram-based disambiguation.
 */
[[nodiscard]] inline FitResult fit_interferogram(const Interferogram& data, const FitModel& model) {
    if (!data.has_counts())
        throw std::invalid_argument("fit_interferogram: interferogram carries no counts");
    if (data.counts.size() != data.axis.size())
        throw std::invalid_argument("fit_interferogram: counts and axis sizes differ");
    if (model.mixing.half_dim != model.state.half_dim)
        throw std::invalid_argument("fit_interferogram: state and mixing dimensions differ");
    model.signal.validate();
    model.idler.validate();

    // Resolve the free-parameter set (canonical order: shift, amplitude,
    // beta2l, background).
    bool want_shift = false, want_rf = false, want_amp = false, want_b2l = false, want_bg = false;
    if (model.free_params.empty()) {
        want_shift = want_amp = true;
    } else {
        for (const auto& name : model.free_params) {
            if (name == "delay_offset") want_shift = true;
            else if (name == "rf_phase") want_rf = true;
            else if (name == "amplitude") want_amp = true;
            else if (name == "beta2l") want_b2l = true;
            else if (name == "background") want_bg = true;
            else throw std::invalid_argument("fit_interferogram: unknown free parameter '" + name + "'");
        }
    }
    if (want_shift && want_rf)
        throw std::invalid_argument("fit_interferogram: delay_offset and rf_phase parameterise the same shift");
    if (want_rf && data.kind == ScanKind::delay)
        throw std::invalid_argument(
            "fit_interferogram: rf_phase is fit on phase scans; recover it from delay fits via estimate_rf_phase");
    const bool fit_shift = want_shift || want_rf;

    const double omega = angular_rad_per_ps(model.state.fsr_ghz);
    const double arm_sign = (data.arm == ScanArm::signal) ? 1.0 : -1.0;
    const std::size_t n = data.axis.size();

    // Scan positions in equivalent ps.
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = (data.kind == ScanKind::delay) ? data.axis[i] : data.axis[i] / omega;

    // Bin coefficients and the per-point phase table exp(i k w s x_i).
    const int half_dim = model.state.half_dim;
    const int dim = model.state.dim();
    std::vector<complex_t> base(static_cast<std::size_t>(dim));
    for (int k = -half_dim; k <= half_dim; ++k)
        base[static_cast<std::size_t>(k + half_dim)] =
            model.state.amplitude(k) * std::abs(model.mixing.value(k));
    std::vector<complex_t> table(n * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (int k = -half_dim; k <= half_dim; ++k)
            table[i * dim + static_cast<std::size_t>(k + half_dim)] =
                std::polar(1.0, static_cast<double>(k) * omega * arm_sign * x[i]);

    // Trace shape and its derivatives at one scan point.
    struct ShapeEval { double s, ds_dshift, ds_db2l; };
    std::vector<complex_t> coeff(static_cast<std::size_t>(dim));
    auto prepare = [&](double shift, double b2l) {
        for (int k = -half_dim; k <= half_dim; ++k) {
            const double kf = static_cast<double>(k);
            const double ph = 0.5 * b2l * kf * kf * omega * omega - kf * omega * arm_sign * shift;
            coeff[static_cast<std::size_t>(k + half_dim)] =
                base[static_cast<std::size_t>(k + half_dim)] * std::polar(1.0, ph);
        }
    };
    auto shape_at = [&](std::size_t i) -> ShapeEval {
        complex_t z{0, 0}, dz_shift{0, 0}, dz_b2l{0, 0};
        for (int k = -half_dim; k <= half_dim; ++k) {
            const double kf = static_cast<double>(k);
            const complex_t term = coeff[static_cast<std::size_t>(k + half_dim)] *
                                   table[i * dim + static_cast<std::size_t>(k + half_dim)];
            z += term;
            dz_shift += complex_t{0.0, -kf * omega * arm_sign} * term;
            dz_b2l += complex_t{0.0, 0.5 * kf * kf * omega * omega} * term;
        }
        return {std::norm(z), 2.0 * (std::conj(z) * dz_shift).real(), 2.0 * (std::conj(z) * dz_b2l).real()};
    };

    // Starting point: peak-count position for the shift (first index on ties),
    // channel settings for beta2l, then the amplitude read off the peak.
    const auto peak_it = std::max_element(data.counts.begin(), data.counts.end());
    const double shift0 = x[static_cast<std::size_t>(peak_it - data.counts.begin())];
    const double b2l0 = model.signal.quad_dispersion_ps2 + model.idler.quad_dispersion_ps2;
    const double bg0 = want_bg ? static_cast<double>(*std::min_element(data.counts.begin(), data.counts.end())) : 0.0;
    prepare(shift0, b2l0);
    double smax = 0.0;
    for (std::size_t i = 0; i < n; ++i) smax = std::max(smax, shape_at(i).s);
    if (!(smax > 0.0)) throw std::runtime_error("fit_interferogram: model trace vanishes on the scan range");
    const double amp0 = std::max((static_cast<double>(*peak_it) - bg0) / smax, 1e-12);

    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<double>(data.counts[i]);
        w[i] = 1.0 / std::max(y[i], 1.0);
    }

    // Pack free parameters in canonical order.
    std::vector<std::string> order;
    std::vector<double> theta0;
    if (fit_shift) { order.emplace_back("shift"); theta0.push_back(shift0); }
    if (want_amp) { order.emplace_back("amplitude"); theta0.push_back(amp0); }
    if (want_b2l) { order.emplace_back("beta2l"); theta0.push_back(b2l0); }
    if (want_bg) { order.emplace_back("background"); theta0.push_back(bg0); }
    if (order.empty()) throw std::invalid_argument("fit_interferogram: no free parameters requested");

    auto unpack = [&](const std::vector<double>& th, double& shift, double& amp, double& b2l, double& bg) {
        shift = shift0; amp = amp0; b2l = b2l0; bg = want_bg ? bg0 : 0.0;
        for (std::size_t a = 0; a < order.size(); ++a) {
            if (order[a] == "shift") shift = th[a];
            else if (order[a] == "amplitude") amp = th[a];
            else if (order[a] == "beta2l") b2l = th[a];
            else bg = th[a];
        }
    };

    auto eval = [&](const std::vector<double>& th, std::vector<double>& mv, std::vector<double>& jv) {
        double shift, amp, b2l, bg;
        unpack(th, shift, amp, b2l, bg);
        prepare(shift, b2l);
        const std::size_t p = order.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto se = shape_at(i);
            mv[i] = amp * se.s + bg;
            for (std::size_t a = 0; a < p; ++a) {
                if (order[a] == "shift") jv[i * p + a] = amp * se.ds_dshift;
                else if (order[a] == "amplitude") jv[i * p + a] = se.s;
                else if (order[a] == "beta2l") jv[i * p + a] = amp * se.ds_db2l;
                else jv[i * p + a] = 1.0;
            }
        }
    };

    auto gn = detail::gauss_newton(std::move(theta0), y, w, eval);

    double shift_hat, amp_hat, b2l_hat, bg_hat;
    unpack(gn.theta, shift_hat, amp_hat, b2l_hat, bg_hat);

    FitResult res;
    res.residual_norm = gn.residual_norm;
    res.converged = gn.converged;
    res.iterations = gn.iterations;
    const double t_rep = model.state.t_rep_ps();
    res.params["delay_offset_ps"] = wrap_centered(shift_hat, t_rep);
    res.params["amplitude"] = amp_hat;
    res.params["beta2l_ps2"] = b2l_hat;
    res.params["background"] = bg_hat;
    if (want_rf) res.params["rf_phase_rad"] = wrap_to_2pi(omega * shift_hat);
    for (std::size_t a = 0; a < order.size(); ++a) {
        if (order[a] == "shift") {
            if (want_rf) res.ci95["rf_phase_rad"] = omega * gn.ci95[a];
            else res.ci95["delay_offset_ps"] = gn.ci95[a];
        } else if (order[a] == "amplitude") res.ci95["amplitude"] = gn.ci95[a];
        else if (order[a] == "beta2l") res.ci95["beta2l_ps2"] = gn.ci95[a];
        else res.ci95["background"] = gn.ci95[a];
    }
    return res;
}

/**
 * Unweighted least-squares Gaussian C * exp(-((x - A)/B)^2) on an
 * arrival-time histogram. Reported as center_ps (A), width_ps (B, related to
 * the jitter sigma by B = sqrt(2) sigma) and amplitude (C).
 */
[[nodiscard]] inline FitResult fit_gaussian_histogram(const TimeTagHistogram& hist) {
    const std::size_t n = hist.bin_centers.size();
    if (n != hist.counts.size())
        throw std::invalid_argument("fit_gaussian_histogram: bin and count sizes differ");
    std::size_t nonzero = 0;
    double total = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (hist.counts[i] < 0)
            throw std::invalid_argument("fit_gaussian_histogram: negative count");
        if (hist.counts[i] > 0) ++nonzero;
        total += static_cast<double>(hist.counts[i]);
        mean += static_cast<double>(hist.counts[i]) * hist.bin_centers[i];
    }
    if (nonzero < 5)
        throw std::invalid_argument("fit_gaussian_histogram: need at least 5 occupied bins");
    mean /= total;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = hist.bin_centers[i] - mean;
        var += static_cast<double>(hist.counts[i]) * d * d;
    }
    var /= total;

    const double peak0 = static_cast<double>(*std::max_element(hist.counts.begin(), hist.counts.end()));
    std::vector<double> theta0{mean, std::max(std::sqrt(2.0 * var), hist.bin_width_ps), peak0};
    std::vector<double> y(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(hist.counts[i]);

    auto eval = [&](const std::vector<double>& th, std::vector<double>& mv, std::vector<double>& jv) {
        const double a = th[0], b = th[1], c = th[2];
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (hist.bin_centers[i] - a) / b;
            const double g = std::exp(-z * z);
            mv[i] = c * g;
            jv[i * 3 + 0] = c * g * 2.0 * z / b;
            jv[i * 3 + 1] = c * g * 2.0 * z * z / b;
            jv[i * 3 + 2] = g;
        }
    };

    // unit weights: the dimensionful chi^2 cannot rescale the Poisson sandwich
    auto gn = detail::gauss_newton(std::move(theta0), y, w, eval, false);
    const double width = std::abs(gn.theta[1]);  // the model is even in B
    if (width < hist.bin_width_ps)
        throw std::runtime_error("fit_gaussian_histogram: fitted width collapsed below the bin resolution");

    FitResult res;
    res.params["center_ps"] = gn.theta[0];
    res.params["width_ps"] = width;
    res.params["amplitude"] = gn.theta[2];
    res.ci95["center_ps"] = gn.ci95[0];
    res.ci95["width_ps"] = gn.ci95[1];
    res.ci95["amplitude"] = gn.ci95[2];
    res.residual_norm = gn.residual_norm;
    res.converged = gn.converged;
    res.iterations = gn.iterations;
    return res;
}

}  // namespace bfc
