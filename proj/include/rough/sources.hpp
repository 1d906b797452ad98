#pragma once

#include <vector>

#include "rough/optics.hpp"

namespace rough {

// Incoherent point sources on the optical axis: weight p_i at axial offset
// z_i from focus. Weights are known inputs throughout (only the positions'
// statistics are being estimated).
struct SourceDistribution {
    std::vector<double> positions;
    std::vector<double> weights;
};

// Throws std::invalid_argument unless: sizes match, at least one source,
// all entries finite, weights nonnegative and summing to 1 within 1e-12.
void validate(const SourceDistribution& f);

// Equal-weight pair at +-s; the workhorse configuration of the scans.
SourceDistribution two_point(double s);

// Shift all positions by -theta1 so the distribution is centered.
SourceDistribution centered(const SourceDistribution& f);

// A truncated moment sequence. The three kinds index differently:
//   object_theta: values[l] = theta_l = sum_i p_i z_i^l      (l = 0..order)
//   image_phi:    values[j] = phi_{2j}, even image moments   (j = 0..order)
//   mode_f:       values[q] = f_q, LG mode intensities       (q = 0..order)
enum class MomentKind { object_theta, image_phi, mode_f };

struct MomentVector {
    MomentKind kind = MomentKind::object_theta;
    unsigned order = 0;
    std::vector<double> values;
};

// Checks size = order+1, finiteness, and the kind-specific normalization
// (theta_0 = 1; phi_0 = 1; f entries in [0,1] with sum <= 1).
void validate(const MomentVector& m);

// theta_l via Neumaier-compensated summation (moment sums mix scales badly
// once l is large, and these feed directly into CRB formulas).
double axial_moment(const SourceDistribution& f, unsigned l);

// theta_0..theta_K as an object_theta MomentVector.
MomentVector object_moments(const SourceDistribution& f, unsigned K);

// sigma = sqrt(sum_i p_i (z_i - theta1)^2), computed in centered form.
double roughness(const SourceDistribution& f);

// Even image-plane moments phi_{2j}, j = 0..K, of the direct-imaging
// intensity for source distribution f. Computed through the moment map
// phi = C theta, which is exact for discrete sources (the map is a finite
// triangular sum, not a truncated series).
MomentVector image_moments_di(const SourceDistribution& f, const OpticalConfig& cfg, unsigned K);

// SPADE mode intensities f_q = sum_i p_i H(q; z_i), q = 0..Q.
MomentVector mode_intensities_spade(const SourceDistribution& f, const OpticalConfig& cfg, unsigned Q);

// Mass beyond mode Q: sum_i p_i xi_i^(Q+1). Closed form of the geometric tail.
double spade_tail_mass(const SourceDistribution& f, const OpticalConfig& cfg, unsigned Q);

// Smallest Q whose tail mass is < tail_tol (simulation histograms add one
// guard bin above this).
unsigned adaptive_mode_truncation(const SourceDistribution& f, const OpticalConfig& cfg,
                                  double tail_tol = 1e-14);

} // namespace rough
