#pragma once

#include <cstdint>
#include <span>

#include "rough/estimator.hpp"
#include "rough/matrix.hpp"
#include "rough/sources.hpp"

namespace rough {

// Mode map f = W theta between even object moments and LG mode intensities:
//   [W]_qk = (-1)^(k-q) binom(k,q) / (2 z_R)^(2k),   k >= q.
// Row q gives the series for mode q in theta_0, theta_2, ..., theta_2K.
Matrix w_matrix(const OpticalConfig& cfg, unsigned K);

// Closed-form inverse, stored with rows = moment order k, columns = mode q:
//   [W^-1]_kq = (2 z_R)^(2k) binom(q,k),   q >= k,
// so that theta = W^-1 f. Row 1 is the theta2 extractor 4 z_R^2 q.
Matrix w_inverse(const OpticalConfig& cfg, unsigned K);

// Rectangular (K+1) x (Q+1) extension of w_inverse for contractions against
// mode histograms truncated at Q >= K.
Matrix w_inverse_rect(const OpticalConfig& cfg, unsigned K, unsigned Q);

// max_ij |[W W^-1 - I]_ij| with the (2 z_R)^(2k) factors cancelled
// analytically; exact for K <= 64 (see c_identity_residual for why the
// naive product is not usable as a check).
double w_identity_residual(const OpticalConfig& cfg, unsigned K);

// Multinomial covariance of the mode record: [D]_qp = delta_qp f_q - f_q f_p.
Matrix d_matrix(const MomentVector& f, unsigned Q);

// SPADE CRB for the even object moments, closed form:
//   [V]_ij = sum_{k<=min(i,j)} binom(i+j-k,j) binom(j,k) (2 z_R)^(2k)
//            theta_{2(i+j-k)}  -  theta_{2i} theta_{2j}.
// Entry (1,1) = 2 theta4 + 4 z_R^2 theta2 - theta2^2.
Matrix spade_moment_crb(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K);

// Same quantity through the W^-1 D W^-T product over an explicit mode
// truncation. The cutoff bounds the binom(q, K)^2-weighted tail below
// tail_tol relative to the recovered sum; a plain mass criterion would drop
// modes the contraction still amplifies. Kept as the cross-check path; the
// closed form above is authoritative.
Matrix spade_moment_crb_product(const SourceDistribution& f0, const OpticalConfig& cfg,
                                unsigned K, double tail_tol = 1e-14);

// SPADE roughness bound for a centered distribution:
//   V_sigma = z_R^2 + theta4/(2 theta2) - theta2/4.
// Saturates the quantum bound z_R^2 as theta2 -> 0. Errors mirror
// di_roughness_crb.
double spade_roughness_crb(const SourceDistribution& f0, const OpticalConfig& cfg);

// Influence-function estimate from a mode-count histogram (counts[q] =
// photons seen in mode q; callers may merge overflow into the last bin,
// which under the adaptive truncation rule carries < 1e-14 expected mass).
// For a centered F0 the theta2 estimate reduces to 4 z_R^2 * (mean mode
// index) and roughness to sigma0 + (theta2_hat - theta2_0)/(2 sigma0).
double spade_influence_estimate(std::span<const std::uint64_t> counts,
                                const SourceDistribution& f0, const OpticalConfig& cfg,
                                EstimatorTarget target);

// Plug-in alternative sigma_hat = sqrt(max(theta2_hat, 0)); same asymptotic
// variance as the linearized form, kept for comparison runs.
double spade_plugin_roughness(std::span<const std::uint64_t> counts, const OpticalConfig& cfg);

struct SpadeCrbReport {
    unsigned truncation = 1;
    unsigned mode_truncation = 0;
    double tail_mass = 0.0;
    Matrix w;
    Matrix w_inv;
    double identity_residual = 0.0;
    Matrix mode_covariance;
    Matrix moment_crb;
    double roughness_crb = 0.0;
};

SpadeCrbReport make_spade_report(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K);

} // namespace rough
