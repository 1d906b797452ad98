#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "rough/optics.hpp"

using namespace rough;

namespace {

// Simpson rule on [0, b] with n (even) intervals.
template <typename F>
auto simpson(F&& f, double b, int n) {
    const double h = b / n;
    auto acc = f(0.0) + f(b);
    for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

// Focal-plane radial LG mode: phi_q(r) = sqrt(2/pi)/w0 L_q(2 r^2/w0^2) e^{-r^2/w0^2}.
double lg_mode(const OpticalConfig& cfg, unsigned q, double r) {
    const double t = 2.0 * r * r / (cfg.omega0 * cfg.omega0);
    return std::sqrt(2.0 / M_PI) / cfg.omega0 * std::laguerre(q, t) * std::exp(-t / 2.0);
}

// Fresnel-propagated fundamental at defocus z (up to a global Gouy gauge):
// psi_z(r) = sqrt(2/pi) / (w0 (1 + i u)) exp(-r^2 / (w0^2 (1 + i u))), u = z/z_R.
std::complex<double> defocused_fundamental(const OpticalConfig& cfg, double z, double r) {
    const std::complex<double> one_iu(1.0, z / cfg.rayleigh_range);
    return std::sqrt(2.0 / M_PI) / (cfg.omega0 * one_iu) *
           std::exp(-r * r / (cfg.omega0 * cfg.omega0 * one_iu));
}

} // namespace

TEST_CASE("optical config validation") {
    CHECK_NOTHROW(validate(OpticalConfig{}));
    CHECK_THROWS_AS(validate(OpticalConfig{-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(OpticalConfig{1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(OpticalConfig{1.0, std::nan("")}), std::invalid_argument);
    CHECK(OpticalConfig{2.0, 3.0}.wave_number() == doctest::Approx(2.0 * 3.0 / 4.0));
}

TEST_CASE("beam width") {
    const OpticalConfig cfg{1.0, 1.0};
    CHECK(beam_width(cfg, 0.0) == 1.0);
    CHECK(beam_width(cfg, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(beam_width(cfg, -2.0) == beam_width(cfg, 2.0));
    const OpticalConfig wide{3.0, 2.0};
    CHECK(beam_width(wide, 2.0) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("psf intensity: frozen value, normalization, and radial moments") {
    const OpticalConfig cfg{1.0, 1.0};
    CHECK(psf_intensity(cfg, 1.0, 0.0) ==
          doctest::Approx(0.086157117207394519).epsilon(1e-14));

    for (double z : {0.0, 0.4, 1.3}) {
        const double w = beam_width(cfg, z);
        const auto radial = [&](unsigned pow) {
            return simpson(
                [&](double r) {
                    return 2.0 * M_PI * r * std::pow(r, pow) * psf_intensity(cfg, r, z);
                },
                8.0 * w, 4000);
        };
        CHECK(radial(0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(radial(2) == doctest::Approx(w * w / 2.0).epsilon(1e-10));
        CHECK(radial(4) == doctest::Approx(w * w * w * w / 2.0).epsilon(1e-10));
    }
}

TEST_CASE("geometric ratio") {
    const OpticalConfig cfg{1.0, 1.0};
    CHECK(geometric_ratio(cfg, 0.0) == 0.0);
    CHECK(geometric_ratio(cfg, 0.05) ==
          doctest::Approx(6.2460961898813241724e-4).epsilon(1e-14));
    CHECK(geometric_ratio(cfg, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    const OpticalConfig cfg2{0.7, 2.0};
    const double z = 0.9;
    CHECK(geometric_ratio(cfg2, z) ==
          doctest::Approx(z * z / (z * z + 4.0 * 2.0 * 2.0)).epsilon(1e-15));
}

TEST_CASE("mode overlap: frozen values and geometric law") {
    const OpticalConfig cfg{1.0, 1.0};
    CHECK(mode_overlap_prob(cfg, 0, 0.5) ==
          doctest::Approx(16.0 / 17.0).epsilon(1e-15));
    CHECK(mode_overlap_prob(cfg, 1, 0.5) ==
          doctest::Approx(16.0 / 289.0).epsilon(1e-15));
    CHECK(mode_overlap_prob(cfg, 0, 0.0) == 1.0);
    CHECK(mode_overlap_prob(cfg, 3, 0.0) == 0.0);

    for (const OpticalConfig c : {OpticalConfig{1.0, 1.0}, OpticalConfig{0.8, 0.6}}) {
        for (double z = -2.0 * c.rayleigh_range; z <= 2.0 * c.rayleigh_range;
             z += 0.25 * c.rayleigh_range) {
            const double xi = geometric_ratio(c, z);
            double partial = 0.0;
            for (unsigned q = 0; q <= 50; ++q) {
                const double h = mode_overlap_prob(c, q, z);
                CHECK(std::fabs(h - (1.0 - xi) * std::pow(xi, q)) <= 1e-12);
                partial += h;
            }
            CHECK(std::fabs(partial - (1.0 - std::pow(xi, 51))) <= 1e-12);
        }
    }
}

TEST_CASE("mode overlap matches the Laguerre-Gauss projection integral") {
    // Independent oracle: project the propagated fundamental onto the focal
    // LG modes by quadrature and square the modulus.
    for (const OpticalConfig cfg : {OpticalConfig{1.0, 1.0}, OpticalConfig{1.4, 0.8}}) {
        for (double z : {0.3, 0.9, 1.7}) {
            const double cut = 8.0 * std::max(cfg.omega0, beam_width(cfg, z));
            for (unsigned q = 0; q <= 10; ++q) {
                const std::complex<double> ov = simpson(
                    [&](double r) {
                        return 2.0 * M_PI * r * lg_mode(cfg, q, r) *
                               defocused_fundamental(cfg, z, r);
                    },
                    cut, 6000);
                CHECK(mode_overlap_prob(cfg, q, z) ==
                      doctest::Approx(std::norm(ov)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("mode overlap stays finite and monotone deep in the tail") {
    const OpticalConfig cfg{1.0, 1.0};
    double prev = mode_overlap_prob(cfg, 900, 2.0);
    for (unsigned q = 901; q < 1200; ++q) {
        const double h = mode_overlap_prob(cfg, q, 2.0);
        CHECK(std::isfinite(h));
        // allow a one-ulp wiggle where the evaluation switches to log space
        CHECK(h <= prev * (1.0 + 1e-12));
        prev = h;
    }
    // xi = 0.5 at z = 2 z_R: H(q) = 0.5^(q+1) underflows gracefully far out.
    CHECK(mode_overlap_prob(cfg, 5000, 2.0) == 0.0);
}

TEST_CASE("psf overlap: modulus law and quadrature oracle") {
    const OpticalConfig cfg{1.0, 1.0};
    CHECK(std::abs(psf_overlap(cfg, 0.3, 0.3) - 1.0) <= 1e-15);

    // |<psi_a|psi_b>|^2 depends only on b - a (unitary displacement orbit)
    // and reproduces 1 - |ov|^2 = v^2/(4 z_R^2 + v^2).
    for (double a : {-0.7, 0.0, 0.4}) {
        for (double v : {0.05, 0.3, 1.1}) {
            const double m2 = std::norm(psf_overlap(cfg, a, a + v));
            CHECK(1.0 - m2 ==
                  doctest::Approx(v * v / (4.0 + v * v)).epsilon(1e-13));
            CHECK(m2 == doctest::Approx(std::norm(psf_overlap(cfg, 0.0, v))).epsilon(1e-13));
        }
    }
    CHECK(std::norm(psf_overlap(cfg, 0.0, 0.5)) ==
          doctest::Approx(mode_overlap_prob(cfg, 0, 0.5)).epsilon(1e-14));

    // Modulus against the propagated-field quadrature (phase is gauge).
    const OpticalConfig cfg2{0.9, 1.3};
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.2, 0.8}, {-0.5, 1.0}}) {
        const double cut = 8.0 * std::max(beam_width(cfg2, a), beam_width(cfg2, b));
        const std::complex<double> ov = simpson(
            [&](double r) {
                return 2.0 * M_PI * r * std::conj(defocused_fundamental(cfg2, a, r)) *
                       defocused_fundamental(cfg2, b, r);
            },
            cut, 6000);
        CHECK(std::abs(psf_overlap(cfg2, a, b)) ==
              doctest::Approx(std::abs(ov)).epsilon(1e-9));
    }
}

TEST_CASE("generator variance") {
    CHECK(generator_variance(OpticalConfig{1.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(generator_variance(OpticalConfig{1.0, 2.0}) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    // Independent of the waist: the generator is scaled by 1/k.
    CHECK(generator_variance(OpticalConfig{0.3, 1.5}) ==
          generator_variance(OpticalConfig{2.7, 1.5}));
}
