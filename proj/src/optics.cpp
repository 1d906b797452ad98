#include "rough/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace rough {

void validate(const OpticalConfig& cfg) {
    if (!std::isfinite(cfg.omega0) || cfg.omega0 <= 0.0)
        throw std::invalid_argument("optics: omega0 must be finite and > 0");
    if (!std::isfinite(cfg.rayleigh_range) || cfg.rayleigh_range <= 0.0)
        throw std::invalid_argument("optics: rayleigh_range must be finite and > 0");
}

double beam_width(const OpticalConfig& cfg, double z) {
    const double u = z / cfg.rayleigh_range;
    return cfg.omega0 * std::sqrt(1.0 + u * u);
}

double psf_intensity(const OpticalConfig& cfg, double r, double z) {
    const double w = beam_width(cfg, z);
    const double w2 = w * w;
    return 2.0 / (M_PI * w2) * std::exp(-2.0 * r * r / w2);
}

double geometric_ratio(const OpticalConfig& cfg, double z) {
    const double z2 = z * z;
    const double zr2 = cfg.rayleigh_range * cfg.rayleigh_range;
    return z2 / (z2 + 4.0 * zr2);
}

double mode_overlap_prob(const OpticalConfig& cfg, unsigned q, double z) {
    const double xi = geometric_ratio(cfg, z);
    if (xi == 0.0) return q == 0 ? 1.0 : 0.0;
    // Past q ~ 1000 the direct power underflows through subnormals; the log
    // form keeps the geometric law smooth all the way to zero.
    if (q > 1000) return std::exp(static_cast<double>(q) * std::log(xi) + std::log1p(-xi));
    return (1.0 - xi) * std::pow(xi, static_cast<double>(q));
}

std::complex<double> psf_overlap(const OpticalConfig& cfg, double a, double b) {
    const double ua = a / cfg.rayleigh_range;
    const double ub = b / cfg.rayleigh_range;
    const double na = 1.0 + ua * ua;
    const double nb = 1.0 + ub * ub;
    const std::complex<double> den(2.0 + ua * ua + ub * ub, (ub - ua) * (1.0 - ua * ub));
    return 2.0 * std::sqrt(na * nb) / den;
}

double generator_variance(const OpticalConfig& cfg) {
    const double zr = cfg.rayleigh_range;
    return 1.0 / (4.0 * zr * zr);
}

} // namespace rough
