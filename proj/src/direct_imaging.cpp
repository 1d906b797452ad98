#include "rough/direct_imaging.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rough/errors.hpp"

namespace rough {

namespace {

// Pascal triangle in exact integers. n <= 66 keeps every entry below 2^63;
// callers never exceed 65 (truncation cap 64 plus one).
std::vector<std::vector<std::int64_t>> binom_table(unsigned n) {
    std::vector<std::vector<std::int64_t>> b(n + 1);
    for (unsigned i = 0; i <= n; ++i) {
        b[i].assign(i + 1, 1);
        for (unsigned j = 1; j < i; ++j) b[i][j] = b[i - 1][j - 1] + b[i - 1][j];
    }
    return b;
}

// d_i = i!/2^i, the row scale of C (and reciprocal column scale of C^-1).
std::vector<double> half_factorials(unsigned n) {
    std::vector<double> d(n + 1);
    d[0] = 1.0;
    for (unsigned i = 1; i <= n; ++i) d[i] = d[i - 1] * (static_cast<double>(i) / 2.0);
    return d;
}

void check_truncation(unsigned K) {
    if (K > 64)
        throw std::invalid_argument(
            "truncation K > 64: factorial scales overflow double precision there");
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

// Shared centering/scale check for the sigma-target entry points.
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

Matrix c_matrix(const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(K);
    const auto d = half_factorials(K);
    Matrix c(K + 1, K + 1);
    for (unsigned i = 0; i <= K; ++i) {
        const double row = d[i] * std::pow(cfg.omega0, 2.0 * i);
        for (unsigned j = 0; j <= i; ++j)
            c(i, j) = row * static_cast<double>(binom[i][j]) *
                      std::pow(cfg.rayleigh_range, -2.0 * j);
    }
    return c;
}

Matrix c_inverse(const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(K);
    const auto d = half_factorials(K);
    Matrix inv(K + 1, K + 1);
    for (unsigned i = 0; i <= K; ++i) {
        const double row = std::pow(cfg.rayleigh_range, 2.0 * i);
        for (unsigned j = 0; j <= i; ++j) {
            const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
            inv(i, j) = sign * row * static_cast<double>(binom[i][j]) /
                        (d[j] * std::pow(cfg.omega0, 2.0 * j));
        }
    }
    return inv;
}

double c_identity_residual(const OpticalConfig& cfg, unsigned K) {
    validate(cfg);
    check_truncation(K);
    const auto binom = binom_table(K);
    const auto d = half_factorials(K);
    // [C C^-1]_ij = (d_i/d_j) w0^(2(i-j)) sum_k (-1)^(k-j) binom(i,k) binom(k,j);
    // the z_R^(±2k) factors cancel per term, so they are dropped before any
    // floating-point work and the binomial sum runs in exact 128-bit integers.
    double worst = 0.0;
    for (unsigned i = 0; i <= K; ++i)
        for (unsigned j = 0; j <= K; ++j) {
            __int128 t = 0;
            for (unsigned k = j; k <= i; ++k) {
                const __int128 term =
                    static_cast<__int128>(binom[i][k]) * static_cast<__int128>(binom[k][j]);
                t += ((k - j) % 2 == 0) ? term : -term;
            }
            const double scale = (d[i] / d[j]) * std::pow(cfg.omega0, 2.0 * (static_cast<double>(i) -
                                                                             static_cast<double>(j)));
            const double entry = scale * static_cast<double>(t);
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::fabs(entry - target));
        }
    return worst;
}

Matrix u_matrix(const MomentVector& phi0, unsigned K) {
    if (phi0.kind != MomentKind::image_phi)
        throw std::invalid_argument("u_matrix: needs image_phi moments");
    if (phi0.order < 2 * K)
        throw std::invalid_argument("u_matrix: phi moments must extend to order 4K");
    validate(phi0);
    Matrix u(K + 1, K + 1);
    for (unsigned i = 0; i <= K; ++i)
        for (unsigned j = 0; j <= K; ++j)
            u(i, j) = phi0.values[i + j] - phi0.values[i] * phi0.values[j];
    return u;
}

Matrix di_moment_crb(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K) {
    const MomentVector phi0 = image_moments_di(f0, cfg, 2 * K);
    const Matrix u = u_matrix(phi0, K);
    const Matrix inv = c_inverse(cfg, K);
    return inv * u * inv.transposed();
}

double di_roughness_crb(const SourceDistribution& f0, const OpticalConfig& cfg) {
    validate(f0);
    validate(cfg);
    require_centered(f0, "di_roughness_crb");
    const double sigma = roughness(f0);
    if (sigma == 0.0)
        throw singular_parametrization_error(
            "di_roughness_crb: sigma = 0, the roughness bound diverges");
    const MomentVector phi = image_moments_di(f0, cfg, 2);
    const double v = phi.values[2] - phi.values[1] * phi.values[1];
    const double zr2 = cfg.rayleigh_range * cfg.rayleigh_range;
    const double w02 = cfg.omega0 * cfg.omega0;
    return zr2 * zr2 * v / (w02 * w02 * sigma * sigma);
}

double di_influence_estimate(const MomentVector& empirical_phi, const SourceDistribution& f0,
                             const OpticalConfig& cfg, EstimatorTarget target, unsigned K) {
    validate(f0);
    validate(cfg);
    if (K < 1) throw std::invalid_argument("di_influence_estimate: truncation must be >= 1");
    check_truncation(K);
    if (empirical_phi.kind != MomentKind::image_phi || empirical_phi.order < K)
        throw std::invalid_argument(
            "di_influence_estimate: empirical moments must be image_phi of order >= K");
    if (target == EstimatorTarget::mean_height)
        throw estimator_error(
            "mean height is unidentifiable under the direct-imaging channel: the image "
            "law is even in the axial offset");

    // dbeta has a single nonzero at the theta2 slot (position 1 of the even
    // moment vector); its weight distinguishes the two identifiable targets.
    double beta0 = 0.0;
    double dbeta1 = 0.0;
    const double theta2 = axial_moment(f0, 2);
    if (target == EstimatorTarget::second_moment) {
        beta0 = theta2;
        dbeta1 = 1.0;
    } else {
        require_centered(f0, "di_influence_estimate");
        const double sigma = roughness(f0);
        if (sigma == 0.0)
            throw singular_parametrization_error(
                "di_influence_estimate: sigma = 0, roughness is not locally identifiable");
        beta0 = sigma;
        dbeta1 = 1.0 / (2.0 * sigma);
    }

    const Matrix inv = c_inverse(cfg, K);
    const MomentVector phi0 = image_moments_di(f0, cfg, K);
    std::vector<double> terms;
    terms.reserve(K + 1);
    for (unsigned j = 0; j <= K; ++j) {
        const double coeff = dbeta1 * inv(1, j); // row 1 of C^-1: the theta2 extractor
        terms.push_back(coeff * (empirical_phi.values[j] - phi0.values[j]));
    }
    return beta0 + neumaier_dot(terms);
}

double di_influence_estimate(std::span<const double> radii, const SourceDistribution& f0,
                             const OpticalConfig& cfg, EstimatorTarget target, unsigned K) {
    if (radii.empty()) throw std::invalid_argument("di_influence_estimate: no samples");
    check_truncation(K);
    // Accumulate mean r^(2j) in sample order (deterministic), compensated.
    std::vector<double> sum(K + 1, 0.0), comp(K + 1, 0.0);
    for (double r : radii) {
        const double r2 = r * r;
        double p = 1.0;
        for (unsigned j = 0; j <= K; ++j) {
            const double t = sum[j] + p;
            if (std::fabs(sum[j]) >= std::fabs(p))
                comp[j] += (sum[j] - t) + p;
            else
                comp[j] += (p - t) + sum[j];
            sum[j] = t;
            p *= r2;
        }
    }
    MomentVector emp;
    emp.kind = MomentKind::image_phi;
    emp.order = K;
    emp.values.resize(K + 1);
    const double n = static_cast<double>(radii.size());
    for (unsigned j = 0; j <= K; ++j) emp.values[j] = (sum[j] + comp[j]) / n;
    return di_influence_estimate(emp, f0, cfg, target, K);
}

DiCrbReport make_di_report(const SourceDistribution& f0, const OpticalConfig& cfg, unsigned K) {
    DiCrbReport rep;
    rep.truncation = K;
    rep.c = c_matrix(cfg, K);
    rep.c_inv = c_inverse(cfg, K);
    rep.identity_residual = c_identity_residual(cfg, K);
    double cn = 0.0, in = 0.0;
    for (unsigned j = 0; j <= K; ++j) {
        double a = 0.0, b = 0.0;
        for (unsigned i = 0; i <= K; ++i) {
            a += std::fabs(rep.c(i, j));
            b += std::fabs(rep.c_inv(i, j));
        }
        cn = std::max(cn, a);
        in = std::max(in, b);
    }
    rep.condition_onenorm = cn * in;
    rep.moment_crb = di_moment_crb(f0, cfg, K);
    rep.roughness_crb = di_roughness_crb(f0, cfg);
    return rep;
}

} // namespace rough
