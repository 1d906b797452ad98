#pragma once

#include <cstdint>
#include <span>

#include "rough/estimator.hpp"
#include "rough/matrix.hpp"
#include "rough/sources.hpp"

namespace rough {

// Moment map phi = C theta between even object moments (theta_0, theta_2,
// ..., theta_2K) and even image moments (phi_0, phi_2, ..., phi_2K):
//   [C]_ij = (i!/2^i) binom(i,j) omega0^(2i) / z_R^(2j),   j <= i.
// Lower triangular; entries are assembled with the scale factors applied to
// a binomial core so conditioning is flat in z_R.
Matrix c_matrix(const OpticalConfig& cfg, unsigned K);

// Closed-form inverse of the moment map:
//   [C^-1]_ij = (-1)^(i-j) binom(i,j) (2^j/j!) z_R^(2i) / omega0^(2j),  j <= i.
Matrix c_inverse(const OpticalConfig& cfg, unsigned K);

// max_ij |[C C^-1 - I]_ij|, with the diagonal scale factors cancelled
// analytically and the binomial core summed in 128-bit integers. A naive
// product of the stored entries would bury the identity under ~1e-3 of
// alternating-sum rounding at K = 16; this evaluation is exact for K <= 64.
double c_identity_residual(const OpticalConfig& cfg, unsigned K);

// Image-moment covariance kernel [U]_ij = phi_{2(i+j)} - phi_{2i} phi_{2j}.
// phi0 must carry even moments up to order 4K (i.e. phi0.order >= 2K).
Matrix u_matrix(const MomentVector& phi0, unsigned K);

// Direct-imaging CRB for the even object moments: V = C^-1 U C^-T,
// evaluated at F0. Entry (1,1) is the theta2 variance bound.
Matrix di_moment_crb(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K);

// Direct-imaging roughness bound for a centered distribution:
//   V_sigma = z_R^4 (phi_4 - phi_2^2) / (omega0^4 sigma^2).
// Throws invalid_argument if theta1 != 0, singular_parametrization_error
// if sigma = 0.
double di_roughness_crb(const SourceDistribution& f0, const OpticalConfig& cfg);

// Influence-function estimate from image-plane radii. Linearized at F0:
//   beta_hat = beta(F0) + mean_m[ (dbeta^T C^-1)(R(r_m) - phi0) ]
// with R(r) = (1, r^2, ..., r^2K). K is the moment truncation of the
// influence function (K = 1 suffices for theta2/roughness and is the
// default). mean_height raises estimator_error: the image law is even in z,
// so the centroid never reaches the data.
double di_influence_estimate(std::span<const double> radii, const SourceDistribution& f0,
                             const OpticalConfig& cfg, EstimatorTarget target, unsigned K = 1);

// Same estimate from pre-accumulated empirical even moments (values[j] =
// mean of r^(2j)). Lets callers stream photons without materializing them;
// algebraically identical to the span form.
double di_influence_estimate(const MomentVector& empirical_phi, const SourceDistribution& f0,
                             const OpticalConfig& cfg, EstimatorTarget target, unsigned K = 1);

struct DiCrbReport {
    unsigned truncation = 1;
    Matrix c;
    Matrix c_inv;
    double identity_residual = 0.0;
    double condition_onenorm = 0.0; // ||C||_1 ||C^-1||_1
    Matrix moment_crb;
    double roughness_crb = 0.0;
};

DiCrbReport make_di_report(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K);

} // namespace rough
