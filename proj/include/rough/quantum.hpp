#pragma once

#include <span>

#include "rough/matrix.hpp"
#include "rough/sources.hpp"

namespace rough {

// Quantum Fisher information for joint small displacements of the sources,
// in the sub-diffraction limit: K = 4 Delta0G^2 diag(p), i.e. p_j / z_R^2
// on the diagonal.
Matrix qfi_displacements_closed_form(const SourceDistribution& f, const OpticalConfig& cfg);

// The same matrix recovered numerically from the metrology matrix
// M(0, dlam)_ij = sqrt(p_i p_j) <psi_0|psi_dlam_j>, whose trace norm obeys
// dlam^T K dlam = 8 (1 - ||M||_1) + o(dlam^2). M is rank one at focus, so
// ||M||_1 = sqrt(sum_j p_j |<psi_0|psi_dlam_j>|^2); entries are recovered by
// probing coordinate directions and pairs (polarization identity). dz is
// the probe step; dz <= 0 throws.
Matrix metrology_matrix_qfi(const SourceDistribution& f, const OpticalConfig& cfg, double dz);

// 1 - ||M(0, v)||_1 for an explicit displacement vector v; exposed for the
// quadratic-coefficient checks.
double metrology_trace_norm_defect(const SourceDistribution& f, const OpticalConfig& cfg,
                                   std::span<const double> v);

// Inverse moment QFI, K x K over theta_1..theta_K:
//   [K^-1]_ij = i j theta_{i+j-2} / (4 Delta0G^2),  i,j = 1..K   (1-indexed;
// stored at (i-1, j-1)). theta must carry moments up to order 2K-2.
Matrix inverse_qfi_moments(const MomentVector& theta, const OpticalConfig& cfg, unsigned K);

// Quantum bound on the mean height: [K^-1]_11 = z_R^2 exactly.
double quantum_bound_mean(const OpticalConfig& cfg);

// Quantum bound on the roughness, via the chain rule through (theta1,
// theta2): dbeta^T K^-1 dbeta with dbeta = (-theta1/sigma, 1/(2 sigma)).
// Collapses algebraically to z_R^2 for every distribution; the pipeline is
// evaluated literally so tests can confirm the collapse. sigma = 0 throws
// singular_parametrization_error.
double quantum_bound_roughness(const SourceDistribution& f, const OpticalConfig& cfg);

struct QfiReport {
    Matrix displacement_qfi;    // numeric, via metrology matrix
    Matrix inverse_moment_qfi;  // K x K
    double bound_mean = 0.0;
    double bound_roughness = 0.0;
    double probe_dz = 0.0;          // regime fields: probe step used
    double max_abs_position = 0.0;  // and how far F sits from focus
};

// dz defaults to 1e-4 z_R inside; K is the moment truncation of the report.
QfiReport make_qfi_report(const SourceDistribution& f, const OpticalConfig& cfg, unsigned K);

} // namespace rough
