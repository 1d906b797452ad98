#include "rough/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rough/errors.hpp"

namespace rough {

namespace {

// 1 - ||M||_1 for the rank-one M at focus: ||M||_1 = ||c||_2 with
// c_j = sqrt(p_j) <psi_0|psi_v_j>. Computed as (1 - ||c||^2)/(1 + ||c||),
// with 1 - |ov|^2 formed per source before summation; the direct
// 1 - sqrt(...) would lose eight digits at probe scale.
double trace_norm_defect_impl(const SourceDistribution& f, const OpticalConfig& cfg,
                              std::span<const double> v) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.weights.size(); ++j) {
        const double m2 = std::norm(psf_overlap(cfg, 0.0, v[j]));
        s += f.weights[j] * (1.0 - m2);
    }
    const double nrm = std::sqrt(std::max(1.0 - s, 0.0));
    return s / (1.0 + nrm);
}

} // namespace

Matrix qfi_displacements_closed_form(const SourceDistribution& f, const OpticalConfig& cfg) {
    validate(f);
    validate(cfg);
    const std::size_t n = f.weights.size();
    const double four_var = 4.0 * generator_variance(cfg);
    Matrix k(n, n);
    for (std::size_t j = 0; j < n; ++j) k(j, j) = four_var * f.weights[j];
    return k;
}

double metrology_trace_norm_defect(const SourceDistribution& f, const OpticalConfig& cfg,
                                   std::span<const double> v) {
    validate(f);
    validate(cfg);
    if (v.size() != f.weights.size())
        throw std::invalid_argument("metrology defect: displacement size mismatch");
    return trace_norm_defect_impl(f, cfg, v);
}

Matrix metrology_matrix_qfi(const SourceDistribution& f, const OpticalConfig& cfg, double dz) {
    validate(f);
    validate(cfg);
    if (!(dz > 0.0) || !std::isfinite(dz))
        throw std::invalid_argument("metrology QFI: probe step dz must be finite and > 0");
    const std::size_t n = f.weights.size();
    std::vector<double> v(n, 0.0);
    const auto quad = [&](void) { return 8.0 * trace_norm_defect_impl(f, cfg, v); };

    std::vector<double> diag_q(n);
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = dz;
        diag_q[i] = quad();
        v[i] = 0.0;
        k(i, i) = diag_q[i] / (dz * dz);
    }
    // Polarization identity for the off-diagonals: probes along e_i + e_j.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            v[i] = dz;
            v[j] = dz;
            const double pair_q = quad();
            v[i] = 0.0;
            v[j] = 0.0;
            const double off = (pair_q - diag_q[i] - diag_q[j]) / (2.0 * dz * dz);
            k(i, j) = off;
            k(j, i) = off;
        }
    return k;
}

Matrix inverse_qfi_moments(const MomentVector& theta, const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    if (K < 1) throw std::invalid_argument("inverse moment QFI: K must be >= 1");
    if (theta.kind != MomentKind::object_theta)
        throw std::invalid_argument("inverse moment QFI: needs object_theta moments");
    if (theta.order + 2 < 2 * K)
        throw std::invalid_argument("inverse moment QFI: theta must extend to order 2K-2");
    validate(theta);
    const double scale = 1.0 / (4.0 * generator_variance(cfg));
    Matrix kinv(K, K);
    for (unsigned i = 1; i <= K; ++i)
        for (unsigned j = 1; j <= K; ++j)
            kinv(i - 1, j - 1) =
                scale * static_cast<double>(i) * static_cast<double>(j) * theta.values[i + j - 2];
    return kinv;
}

double quantum_bound_mean(const OpticalConfig& cfg) {
    validate(cfg);
    return cfg.rayleigh_range * cfg.rayleigh_range;
}

double quantum_bound_roughness(const SourceDistribution& f, const OpticalConfig& cfg) {
    validate(f);
    validate(cfg);
    const double sigma = roughness(f);
    if (sigma == 0.0)
        throw singular_parametrization_error(
            "quantum_bound_roughness: sigma = 0, the roughness bound diverges");
    const MomentVector theta = object_moments(f, 2);
    const Matrix kinv = inverse_qfi_moments(theta, cfg, 2);
    const double d1 = -theta.values[1] / sigma;
    const double d2 = 1.0 / (2.0 * sigma);
    return d1 * (kinv(0, 0) * d1 + kinv(0, 1) * d2) + d2 * (kinv(1, 0) * d1 + kinv(1, 1) * d2);
}

QfiReport make_qfi_report(const SourceDistribution& f, const OpticalConfig& cfg, unsigned K) {
    QfiReport rep;
    rep.probe_dz = 1e-4 * cfg.rayleigh_range;
    rep.displacement_qfi = metrology_matrix_qfi(f, cfg, rep.probe_dz);
    rep.inverse_moment_qfi = inverse_qfi_moments(object_moments(f, 2 * K), cfg, K);
    rep.bound_mean = quantum_bound_mean(cfg);
    rep.bound_roughness = quantum_bound_roughness(f, cfg);
    for (double z : f.positions) rep.max_abs_position = std::max(rep.max_abs_position, std::fabs(z));
    return rep;
}

} // namespace rough
