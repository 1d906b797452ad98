#pragma once

#include <complex>

namespace rough {

// Gaussian imaging channel. Lengths are measured in units of the beam waist
// omega0 (default 1); the wave number is then fixed by k = 2 z_R / omega0^2,
// i.e. z_R = k omega0^2 / 2 is the Rayleigh range of the imaged beam.
struct OpticalConfig {
    double omega0 = 1.0;
    double rayleigh_range = 1.0;

    double wave_number() const { return 2.0 * rayleigh_range / (omega0 * omega0); }
};

// Throws std::invalid_argument unless both lengths are finite and > 0.
void validate(const OpticalConfig& cfg);

// omega(z) = omega0 sqrt(1 + z^2/z_R^2)
double beam_width(const OpticalConfig& cfg, double z);

// |psi(r,z)|^2 = 2/(pi omega(z)^2) exp(-2 r^2/omega(z)^2): the image-plane
// intensity of a point source defocused by z, normalized over the plane.
double psf_intensity(const OpticalConfig& cfg, double r, double z);

// xi(z) = z^2 / (z^2 + 4 z_R^2), the ratio of the geometric law below.
double geometric_ratio(const OpticalConfig& cfg, double z);

// Overlap probability with the q-th radial Laguerre-Gauss mode:
//   H(q;z) = 4 z_R^2 z^(2q) / (z^2 + 4 z_R^2)^(q+1) = (1 - xi) xi^q.
// Evaluated in log space once q is large enough for xi^q to underflow
// gracefully; exact geometric form otherwise.
double mode_overlap_prob(const OpticalConfig& cfg, unsigned q, double z);

// <psi_a|psi_b> for two defocused PSFs; with u = z/z_R,
//   2 sqrt((1+ua^2)(1+ub^2)) / [(2+ua^2+ub^2) + i (ub-ua)(1-ua ub)].
// Closed Gaussian integral, independent of omega0. |psf_overlap(0,z)|^2
// reproduces H(0;z).
std::complex<double> psf_overlap(const OpticalConfig& cfg, double a, double b);

// Variance of the defocus generator G = (1/2k) Laplacian_perp in the focused
// mode: Delta0 G^2 = 1/(4 z_R^2). This single number sets every quantum
// bound in the project.
double generator_variance(const OpticalConfig& cfg);

} // namespace rough
