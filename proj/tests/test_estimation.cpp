#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "bfc/estimate.hpp"
#include "bfc/fit.hpp"
#include "bfc/presets.hpp"

using namespace bfc;

namespace {
constexpr double pi = std::numbers::pi;

FitModel model_for(const ExperimentConfig& cfg, std::vector<std::string> free_params = {}) {
    return FitModel{make_state(cfg), make_mixing(cfg), cfg.signal, cfg.idler, std::move(free_params)};
}
}  // namespace

TEST_CASE("delay fit recovers the trace position with a sane interval") {
    const auto cfg = preset("fig3a");
    const auto scan = simulate_scan(cfg, 101);
    const auto fit = fit_interferogram(scan, model_for(cfg));

    REQUIRE(fit.converged);
    CHECK(fit.iterations < 200);
    const double delay = fit.params.at("delay_offset_ps");
    const double ci = fit.ci95.at("delay_offset_ps");
    // all-zero channels put the peak half a period from zero inserted delay;
    // the estimate sits on the wrap boundary, so compare modulo the period
    CHECK_THAT(wrap_centered(delay - 15.625, 31.25), Catch::Matchers::WithinAbs(0.0, 4.0 * ci));
    CHECK(ci > 0.0);
    CHECK(ci < 0.2);
    CHECK(fit.ci95.at("amplitude") > 0.0);
}

TEST_CASE("delay fit follows a moved trace one-to-one") {
    auto cfg = preset("fig3a");
    cfg.idler.delay_ps = 3.0;
    const auto scan = simulate_scan(cfg, 102);
    const auto fit = fit_interferogram(scan, model_for(cfg));
    REQUIRE(fit.converged);
    const double ci = fit.ci95.at("delay_offset_ps");
    // the peak moves to 18.625 ps, reported wrapped into (-t_rep/2, t_rep/2]
    CHECK_THAT(fit.params.at("delay_offset_ps"),
               Catch::Matchers::WithinAbs(18.625 - 31.25, 4.0 * ci));
}

TEST_CASE("background level is recovered when floated") {
    auto cfg = preset("fig3a");
    cfg.acquisition.background_rate_hz = 30.0;  // 150 counts of flat floor
    const auto scan = simulate_scan(cfg, 103);
    const auto fit =
        fit_interferogram(scan, model_for(cfg, {"delay_offset", "amplitude", "background"}));
    REQUIRE(fit.converged);
    const double bg = fit.params.at("background");
    const double ci = fit.ci95.at("background");
    CHECK_THAT(bg, Catch::Matchers::WithinAbs(150.0, 5.0 * ci));
    CHECK(ci < 30.0);
}

TEST_CASE("total quadratic phase is recovered from a detuned start") {
    const auto cfg = preset("fig3d");  // data carry -7.4 ps^2
    const auto scan = simulate_scan(cfg, 104);
    auto model = model_for(cfg, {"delay_offset", "amplitude", "beta2l"});
    model.signal.quad_dispersion_ps2 = -6.0;  // start away from the truth
    const auto fit = fit_interferogram(scan, model);
    REQUIRE(fit.converged);
    const double b2l = fit.params.at("beta2l_ps2");
    const double ci = fit.ci95.at("beta2l_ps2");
    CHECK_THAT(b2l, Catch::Matchers::WithinAbs(-7.4, 5.0 * ci));
    CHECK(ci < 0.5);
}

TEST_CASE("drive-phase scans fit the phase directly") {
    auto cfg = preset("fig3a");
    cfg.idler.rf_phase_rad = 1.0;
    cfg.scan = {ScanKind::rf_phase, ScanArm::signal, 0.0, 6.28, 0.04};
    const auto scan = simulate_scan(cfg, 105);
    const auto fit = fit_interferogram(scan, model_for(cfg, {"rf_phase", "amplitude"}));
    REQUIRE(fit.converged);
    const double phase = fit.params.at("rf_phase_rad");
    const double ci = fit.ci95.at("rf_phase_rad");
    // peak sits where the scanned phase cancels the idler phase up to pi
    CHECK_THAT(phase, Catch::Matchers::WithinAbs(pi + 1.0, 5.0 * ci));
    CHECK(ci < 0.05);
}

TEST_CASE("fit input validation") {
    const auto cfg = preset("fig3a");
    const auto noiseless = simulate_scan(cfg, std::nullopt);
    CHECK_THROWS_AS(fit_interferogram(noiseless, model_for(cfg)), std::invalid_argument);

    const auto scan = simulate_scan(cfg, 106);
    CHECK_THROWS_AS(fit_interferogram(scan, model_for(cfg, {"volume"})), std::invalid_argument);
    CHECK_THROWS_AS(fit_interferogram(scan, model_for(cfg, {"delay_offset", "rf_phase"})),
                    std::invalid_argument);
    // rf_phase only applies to phase scans
    CHECK_THROWS_AS(fit_interferogram(scan, model_for(cfg, {"rf_phase", "amplitude"})),
                    std::invalid_argument);

    auto tiny = scan;
    tiny.axis.resize(2);
    tiny.expected.resize(2);
    tiny.counts.resize(2);
    CHECK_THROWS_AS(fit_interferogram(tiny, model_for(cfg)), std::invalid_argument);
}

TEST_CASE("a structureless trace cannot be fit") {
    auto cfg = preset("fig3a");
    cfg.half_dim = 0;  // single bin: flat trace
    const auto scan = simulate_scan(cfg, 107);
    CHECK_THROWS_AS(fit_interferogram(scan, model_for(cfg)), std::runtime_error);
}

TEST_CASE("gaussian histogram fit recovers centre and width") {
    const double sigma = 58.7;
    const auto hist = simulate_histogram(5014.65, sigma, 20000, 2.0, 600.0, 31);
    const auto fit = fit_gaussian_histogram(hist);
    REQUIRE(fit.converged);
    const double center = fit.params.at("center_ps");
    const double width = fit.params.at("width_ps");
    CHECK_THAT(center, Catch::Matchers::WithinAbs(5014.65, 5.0 * fit.ci95.at("center_ps")));
    // width relates to the jitter as sqrt(2) sigma
    CHECK_THAT(width, Catch::Matchers::WithinAbs(std::sqrt(2.0) * sigma, 3.0));
    CHECK(fit.params.at("amplitude") > 0.0);
}

TEST_CASE("histogram fit rejects unusable inputs") {
    TimeTagHistogram sparse;
    sparse.bin_width_ps = 2.0;
    sparse.bin_centers = {1.0, 3.0, 5.0, 7.0, 9.0};
    sparse.counts = {0, 0, 500, 0, 0};
    CHECK_THROWS_AS(fit_gaussian_histogram(sparse), std::invalid_argument);

    TimeTagHistogram spike;
    spike.bin_width_ps = 2.0;
    spike.bin_centers = {1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0};
    spike.counts = {1, 1, 400, 1, 1, 0, 0};
    CHECK_THROWS_AS(fit_gaussian_histogram(spike), std::runtime_error);
}

TEST_CASE("period counting against the repetition slots") {
    const auto res = disambiguate(5002.0, 0.0, 14.65, 0.0, 50.0, 0.03, 0.04);
    CHECK(res.period_count == 100);
    CHECK_THAT(res.coarse_diff_ps, Catch::Matchers::WithinAbs(5002.0, 1e-12));
    CHECK_THAT(res.total_delay_ps, Catch::Matchers::WithinAbs(5014.65, 1e-9));
    CHECK_THAT(res.ci95_half_width_ps, Catch::Matchers::WithinAbs(0.05, 1e-12));

    const auto neg = disambiguate(-5002.0, 0.0, -14.65, 0.0, 50.0);
    CHECK(neg.period_count == -100);
    CHECK_THAT(neg.total_delay_ps, Catch::Matchers::WithinAbs(-5014.65, 1e-9));

    const auto zero = disambiguate(1.0, 0.0, 0.2, 0.1, 50.0);
    CHECK(zero.period_count == 0);
    CHECK_THAT(zero.total_delay_ps, Catch::Matchers::WithinAbs(0.1, 1e-12));
}

TEST_CASE("coarse residuals beyond a quarter period are rejected") {
    CHECK_THROWS_AS(disambiguate(5013.0, 0.0, 14.65, 0.0, 50.0), AmbiguityError);
    CHECK_THROWS_AS(disambiguate(37.0, 0.0, 0.0, 0.0, 50.0), AmbiguityError);
    CHECK_NOTHROW(disambiguate(5012.0, 0.0, 14.65, 0.0, 50.0));
    CHECK_THROWS_AS(disambiguate(1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("round trip: true delays map to exact period counts") {
    // fine parts kept inside the quarter-period acceptance window, with
    // histogram-level noise well below the window margin
    const double t_rep = 50.0;
    Rng rng(55);
    for (int i = 0; i < 10000; ++i) {
        const auto k_true = static_cast<long long>(std::floor(rng.uniform() * 400.0)) - 200;
        const double fine_true = (rng.uniform() - 0.5) * 20.0;
        const double truth = static_cast<double>(k_true) * t_rep + fine_true;
        const double coarse = truth + 0.5 * rng.normal();
        const auto res = disambiguate(coarse, 0.0, fine_true, 0.0, t_rep);
        CHECK(res.period_count == k_true);
        CHECK_THAT(res.total_delay_ps, Catch::Matchers::WithinAbs(truth, 1e-9));
    }
}

TEST_CASE("drive phase from the trace displacement") {
    // a -8.854 ps displacement at 32 GHz spacing is a 102.0 degree phase
    const double phase = estimate_rf_phase(-8.854, 0.0, 32.0);
    CHECK_THAT(phase * 180.0 / pi, Catch::Matchers::WithinAbs(102.0, 0.05));
    CHECK(phase >= 0.0);
    CHECK(phase < two_pi);

    // displacement equivalence under shifts of the reference
    CHECK_THAT(estimate_rf_phase(-5.0, 3.854, 32.0), Catch::Matchers::WithinAbs(phase, 1e-12));
    CHECK_THROWS_AS(estimate_rf_phase(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("interval combination in quadrature") {
    const double total = combine_ci(std::vector<double>{0.0686, 0.0490},
                                    std::vector<double>{0.0017, 0.0017});
    CHECK_THAT(total, Catch::Matchers::WithinAbs(0.0848, 5e-5));

    CHECK(combine_ci(std::vector<double>{}, std::vector<double>{}) == 0.0);
    CHECK_THAT(combine_ci(std::vector<double>{0.3}, std::vector<double>{}),
               Catch::Matchers::WithinAbs(0.3, 1e-15));
    // a bare standard error scales by the full 95% width factor
    CHECK_THAT(combine_ci(std::vector<double>{}, std::vector<double>{0.01}),
               Catch::Matchers::WithinAbs(0.0392, 1e-12));
    CHECK_THROWS_AS(combine_ci(std::vector<double>{-0.1}, std::vector<double>{}),
                    std::invalid_argument);
}
