#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bfc/model.hpp"
#include "bfc/noise.hpp"
#include "bfc/oracle.hpp"

using namespace bfc;

namespace {

// Peak-normalised sup deviation between the filtered integral and the
// isolated-bin trace, both scanned over the signal delay.
double sup_deviation(const BfcState& state, ChannelSettings signal, const ChannelSettings& idler,
                     double filter_width_ghz, int grid_points, int delay_points) {
    const auto mixing =
        mixing_coefficients(signal.mod_depth_rad, idler.mod_depth_rad, state.half_dim);
    std::vector<double> axis(static_cast<std::size_t>(delay_points));
    for (int i = 0; i < delay_points; ++i)
        axis[static_cast<std::size_t>(i)] = state.t_rep_ps() * static_cast<double>(i) / delay_points;
    const auto closed =
        scan_expected(state, mixing, signal, idler, axis, ScanKind::delay, ScanArm::signal);

    std::vector<double> integral(axis.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        signal.delay_ps = axis[i];
        integral[i] = oracle_filter_integral(state, signal, idler, filter_width_ghz, grid_points).value;
        peak = std::max(peak, integral[i]);
    }
    REQUIRE(peak > 0.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i)
        dev = std::max(dev, std::abs(integral[i] / peak - closed.expected[i]));
    return dev;
}

ChannelSettings modulated() {
    ChannelSettings ch;
    ch.mod_depth_rad = 4.48;
    return ch;
}

}  // namespace

TEST_CASE("narrow filters reproduce the isolated-bin trace") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    CHECK(sup_deviation(state, modulated(), modulated(), 0.32, 301, 25) < 1e-3);
}

TEST_CASE("realistic filter width stays within percent-level agreement") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    CHECK(sup_deviation(state, modulated(), modulated(), 15.0, 301, 25) < 0.02);
}

TEST_CASE("drive phase and shaper phase shift the integrated trace like the model") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    auto signal = modulated();
    signal.rf_phase_rad = 1.1;
    signal.linear_phase_increment_rad = 0.6;
    CHECK(sup_deviation(state, signal, modulated(), 0.32, 301, 25) < 1e-3);
}

TEST_CASE("quadratic dispersion is reproduced by the filtered integral") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    auto signal = modulated();
    signal.quad_dispersion_ps2 = -7.4;
    CHECK(sup_deviation(state, signal, modulated(), 0.32, 501, 25) < 2e-3);
}

TEST_CASE("quadrature is converged at the default grid") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    auto signal = modulated();
    signal.delay_ps = 4.7;
    const double coarse = oracle_filter_integral(state, signal, modulated(), 15.0, 301).value;
    const double fine = oracle_filter_integral(state, signal, modulated(), 15.0, 2001).value;
    CHECK_THAT(coarse, Catch::Matchers::WithinRel(fine, 1e-7));
}

TEST_CASE("input guards and the wide-filter warning") {
    const auto state = BfcState::uniform(4, 32.0, 608.0);
    CHECK_THROWS_AS(oracle_filter_integral(state, modulated(), modulated(), 0.0, 301),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle_filter_integral(state, modulated(), modulated(), 15.0, 99),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle_filter_integral(state, modulated(), modulated(), 33.0, 301),
                    std::invalid_argument);

    CHECK_FALSE(oracle_filter_integral(state, modulated(), modulated(), 15.0, 301).regime_warning);
    CHECK(oracle_filter_integral(state, modulated(), modulated(), 16.0, 301).regime_warning);
    CHECK(oracle_filter_integral(state, modulated(), modulated(), 31.9, 301).regime_warning);
}
