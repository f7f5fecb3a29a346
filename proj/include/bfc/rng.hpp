// rng.hpp - seeded sampling with portable output.
//
// The engine is mt19937_64 (bit-exact by standard); the uniform, normal and
// Poisson transforms are written out here because the std::*_distribution
// adaptors are implementation-defined and the CSV outputs promise
// byte-identical reruns per seed.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace bfc {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; draws come in pairs, the partner is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Poisson sample: sequential inversion below mean 30, transformed
    // rejection (PTRD) above it.
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0) || !std::isfinite(mean))
            throw std::invalid_argument("Rng::poisson: mean must be finite and >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrd(mean);
    }

  private:
    std::int64_t poisson_inversion(double mean) {
        const double u = uniform();
        double p = std::exp(-mean);
        double cum = p;
        std::int64_t k = 0;
        while (u > cum && k < 2000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    // Hoermann's PTRD rejection sampler; exact for mean >= 10.
    std::int64_t poisson_ptrd(double mean) {
        const double smu = std::sqrt(mean);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        constexpr double log_sqrt_2pi = 0.91893853320467274178;
        for (;;) {
            double u;
            double v = uniform();
            if (v <= 0.86 * v_r) {
                u = v / v_r - 0.43;
                return static_cast<std::int64_t>(
                    std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + mean + 0.445));
            }
            if (v >= v_r) {
                u = uniform() - 0.5;
            } else {
                u = v / v_r - 0.93;
                u = (u < 0.0 ? -0.5 : 0.5) - u;
                v = uniform() * v_r;
            }
            const double us = 0.5 - std::abs(u);
            if (us < 0.013 && v > us) continue;
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.445);
            v = v * inv_alpha / (a / (us * us) + b);
            if (kf >= 10.0) {
                const double ik = 1.0 / kf;
                if (std::log(v * smu) <=
                    (kf + 0.5) * std::log(mean * ik) - mean - log_sqrt_2pi + kf -
                        (1.0 / 12.0 - ik * ik / 360.0) * ik)
                    return static_cast<std::int64_t>(kf);
            } else if (kf >= 0.0) {
                if (std::log(v) <= kf * std::log(mean) - mean - std::lgamma(kf + 1.0))
                    return static_cast<std::int64_t>(kf);
            }
        }
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bfc
