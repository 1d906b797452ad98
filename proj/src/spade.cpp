#include "rough/spade.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rough/errors.hpp"

namespace rough {

namespace {

// Pascal triangle in __int128: the closed-form CRB needs binom(i+j-k, j) up
// to row 2K = 128, whose central entry (~2.4e37) overflows 64-bit but not
// 128-bit integers.
std::vector<std::vector<__int128>> binom_table(unsigned n) {
    std::vector<std::vector<__int128>> b(n + 1);
    for (unsigned i = 0; i <= n; ++i) {
        b[i].assign(i + 1, 1);
        for (unsigned j = 1; j < i; ++j) b[i][j] = b[i - 1][j - 1] + b[i - 1][j];
    }
    return b;
}

void check_truncation(unsigned K) {
    if (K > 64)
        throw std::invalid_argument(
            "truncation K > 64: factorial scales overflow double precision there");
}

double pow2k(const OpticalConfig& cfg, int k) {
    // (2 z_R)^(2k); log form far from focus-scale optics, exact pow otherwise.
    const double b = 2.0 * cfg.rayleigh_range;
    const double e = 2.0 * k;
    if (std::fabs(e * std::log(b)) > 600.0) return std::exp(e * std::log(b));
    return std::pow(b, e);
}

double neumaier_dot(const std::vector<double>& terms) {
    double sum = 0.0, comp = 0.0;
    for (double x : terms) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

// Mode cutoff for the covariance recovery. Contracting W^-1 on both sides
// amplifies mode q by binom(q, K)^2 (2 z_R)^{4K}, so a mass-only tail
// criterion stops orders of magnitude too early. Grows Q until a geometric
// bound on the weighted tail sum_{q>Q} binom(q, K)^2 f_q drops below tol
// relative to the weighted sum accumulated so far; the (2 z_R)^{4K} factor
// cancels in that comparison.
unsigned weighted_mode_truncation(const SourceDistribution& f, const OpticalConfig& cfg,
                                  unsigned K, double tol) {
    constexpr unsigned kMaxModes = 200000;
    std::vector<double> xi, lw, lx;
    for (std::size_t s = 0; s < f.positions.size(); ++s) {
        const double x = geometric_ratio(cfg, f.positions[s]);
        if (x == 0.0) continue; // focused source: nothing past q = 0
        xi.push_back(x);
        lw.push_back(std::log(f.weights[s] * (1.0 - x)));
        lx.push_back(std::log(x));
    }
    const double lfactK = std::lgamma(K + 1.0);
    double weighted_sum = 0.0;
    for (unsigned Q = K; Q < kMaxModes; ++Q) {
        const double lb = std::lgamma(Q + 1.0) - lfactK - std::lgamma(Q - K + 1.0);
        double fq = 0.0;
        for (std::size_t s = 0; s < xi.size(); ++s) fq += std::exp(lw[s] + Q * lx[s]);
        weighted_sum += std::exp(2.0 * lb) * fq;

        // Past q = Q the term ratio is at most rho, so the tail is bounded by
        // the first omitted term times 1 / (1 - rho) once rho < 1.
        const double lb1 = std::lgamma(Q + 2.0) - lfactK - std::lgamma(Q + 2.0 - K);
        double bound = 0.0;
        bool usable = true;
        for (std::size_t s = 0; s < xi.size(); ++s) {
            const double g = (Q + 2.0) / (Q + 2.0 - K);
            const double rho = xi[s] * g * g;
            if (rho >= 1.0) {
                usable = false;
                break;
            }
            bound += std::exp(lw[s] + 2.0 * lb1 + (Q + 1.0) * lx[s] - std::log1p(-rho));
        }
        if (usable && bound <= tol * weighted_sum) return Q;
    }
    return kMaxModes;
}

void require_centered(const SourceDistribution& f, const char* who) {
    double maxabs = 0.0;
    for (double z : f.positions) maxabs = std::max(maxabs, std::fabs(z));
    const double theta1 = axial_moment(f, 1);
    if (std::fabs(theta1) > 1e-12 * std::max(1.0, maxabs))
        throw std::invalid_argument(std::string(who) +
                                    ": distribution must be centered (theta_1 = 0); shift "
                                    "positions by -theta_1 first");
}

} // namespace

Matrix w_matrix(const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(K);
    Matrix w(K + 1, K + 1);
    for (unsigned q = 0; q <= K; ++q)
        for (unsigned k = q; k <= K; ++k) {
            const double sign = ((k - q) % 2 == 0) ? 1.0 : -1.0;
            w(q, k) = sign * static_cast<double>(binom[k][q]) / pow2k(cfg, static_cast<int>(k));
        }
    return w;
}

Matrix w_inverse(const OpticalConfig& cfg, unsigned K) {
    return w_inverse_rect(cfg, K, K);
}

Matrix w_inverse_rect(const OpticalConfig& cfg, unsigned K, unsigned Q) {
    validate(cfg);
    check_truncation(K);
    if (Q < K) throw std::invalid_argument("w_inverse_rect: mode truncation must be >= K");
    const auto binom = binom_table(Q);
    Matrix inv(K + 1, Q + 1);
    for (unsigned k = 0; k <= K; ++k) {
        const double row = pow2k(cfg, static_cast<int>(k));
        for (unsigned q = k; q <= Q; ++q)
            inv(k, q) = row * static_cast<double>(binom[q][k]);
    }
    return inv;
}

double w_identity_residual(const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(K);
    // [W W^-1]_qj = sum_k (-1)^(k-q) binom(k,q) binom(j,k); the (2 z_R)^(±2k)
    // factors cancel per term and the rest is an exact integer sum.
    double worst = 0.0;
    for (unsigned q = 0; q <= K; ++q)
        for (unsigned j = 0; j <= K; ++j) {
            __int128 t = 0;
            for (unsigned k = q; k <= j; ++k) {
                const __int128 term = binom[k][q] * binom[j][k];
                t += ((k - q) % 2 == 0) ? term : -term;
            }
            const double target = (q == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::fabs(static_cast<double>(t) - target));
        }
    return worst;
}

Matrix d_matrix(const MomentVector& f, unsigned Q) {
    if (f.kind != MomentKind::mode_f)
        throw std::invalid_argument("d_matrix: needs mode_f intensities");
    if (f.order < Q) throw std::invalid_argument("d_matrix: intensities must extend to Q");
    validate(f);
    Matrix d(Q + 1, Q + 1);
    for (unsigned q = 0; q <= Q; ++q)
        for (unsigned p = 0; p <= Q; ++p)
            d(q, p) = (q == p ? f.values[q] : 0.0) - f.values[q] * f.values[p];
    return d;
}

Matrix spade_moment_crb(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K) {
    validate(f0);
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(2 * K);
    std::vector<double> theta(2 * 2 * K + 1);
    for (unsigned l = 0; l < theta.size(); ++l) theta[l] = axial_moment(f0, l);
    Matrix v(K + 1, K + 1);
    for (unsigned i = 0; i <= K; ++i)
        for (unsigned j = 0; j <= K; ++j) {
            std::vector<double> terms;
            terms.reserve(std::min(i, j) + 2);
            for (unsigned k = 0; k <= std::min(i, j); ++k) {
                const double coeff = static_cast<double>(binom[i + j - k][j]) *
                                     static_cast<double>(binom[j][k]) *
                                     pow2k(cfg, static_cast<int>(k));
                terms.push_back(coeff * theta[2 * (i + j - k)]);
            }
            terms.push_back(-theta[2 * i] * theta[2 * j]);
            v(i, j) = neumaier_dot(terms);
        }
    return v;
}

Matrix spade_moment_crb_product(const SourceDistribution& f0, const OpticalConfig& cfg,
                                unsigned K, double tail_tol) {
    validate(f0);
    validate(cfg);
    check_truncation(K);
    if (!(tail_tol > 0.0))
        throw std::invalid_argument("spade_moment_crb_product: tail_tol must be > 0");
    const unsigned Q = weighted_mode_truncation(f0, cfg, K, tail_tol);
    const MomentVector f = mode_intensities_spade(f0, cfg, Q);
    const Matrix d = d_matrix(f, Q);
    const Matrix inv = w_inverse_rect(cfg, K, Q);
    return inv * d * inv.transposed();
}

double spade_roughness_crb(const SourceDistribution& f0, const OpticalConfig& cfg) {
    validate(f0);
    validate(cfg);
    require_centered(f0, "spade_roughness_crb");
    const double sigma = roughness(f0);
    if (sigma == 0.0)
        throw singular_parametrization_error(
            "spade_roughness_crb: sigma = 0, the roughness bound diverges");
    const double theta2 = axial_moment(f0, 2);
    const double theta4 = axial_moment(f0, 4);
    const double zr2 = cfg.rayleigh_range * cfg.rayleigh_range;
    return zr2 + theta4 / (2.0 * theta2) - theta2 / 4.0;
}

double spade_influence_estimate(std::span<const std::uint64_t> counts,
                                const SourceDistribution& f0, const OpticalConfig& cfg,
                                EstimatorTarget target) {
    validate(f0);
    validate(cfg);
    if (counts.empty()) throw std::invalid_argument("spade_influence_estimate: empty histogram");
    if (target == EstimatorTarget::mean_height)
        throw estimator_error(
            "mean height is unidentifiable under the SPADE channel: mode intensities "
            "depend only on even moments of the axial offsets");

    unsigned __int128 total = 0, weighted = 0;
    for (std::size_t q = 0; q < counts.size(); ++q) {
        total += counts[q];
        weighted += static_cast<unsigned __int128>(counts[q]) * q;
    }
    if (total == 0) throw std::invalid_argument("spade_influence_estimate: no photons recorded");
    const double mean_mode = static_cast<double>(weighted) / static_cast<double>(total);
    const double zr2 = cfg.rayleigh_range * cfg.rayleigh_range;
    const double theta2_hat = 4.0 * zr2 * mean_mode;

    if (target == EstimatorTarget::second_moment) return theta2_hat;

    require_centered(f0, "spade_influence_estimate");
    const double sigma0 = roughness(f0);
    if (sigma0 == 0.0)
        throw singular_parametrization_error(
            "spade_influence_estimate: sigma = 0, roughness is not locally identifiable");
    const double theta2_0 = axial_moment(f0, 2);
    return sigma0 + (theta2_hat - theta2_0) / (2.0 * sigma0);
}

double spade_plugin_roughness(std::span<const std::uint64_t> counts, const OpticalConfig& cfg) {
    validate(cfg);
    unsigned __int128 total = 0, weighted = 0;
    for (std::size_t q = 0; q < counts.size(); ++q) {
        total += counts[q];
        weighted += static_cast<unsigned __int128>(counts[q]) * q;
    }
    if (total == 0) throw std::invalid_argument("spade_plugin_roughness: no photons recorded");
    const double mean_mode = static_cast<double>(weighted) / static_cast<double>(total);
    const double zr2 = cfg.rayleigh_range * cfg.rayleigh_range;
    return std::sqrt(std::max(4.0 * zr2 * mean_mode, 0.0));
}

SpadeCrbReport make_spade_report(const SourceDistribution& f0, const OpticalConfig& cfg,
                                 unsigned K) {
    SpadeCrbReport rep;
    rep.truncation = K;
    rep.mode_truncation = std::max(adaptive_mode_truncation(f0, cfg), K);
    rep.tail_mass = spade_tail_mass(f0, cfg, rep.mode_truncation);
    rep.w = w_matrix(cfg, K);
    rep.w_inv = w_inverse(cfg, K);
    rep.identity_residual = w_identity_residual(cfg, K);
    rep.mode_covariance = d_matrix(mode_intensities_spade(f0, cfg, rep.mode_truncation),
                                   rep.mode_truncation);
    rep.moment_crb = spade_moment_crb(f0, cfg, K);
    rep.roughness_crb = spade_roughness_crb(f0, cfg);
    return rep;
}

} // namespace rough
