#include "rough/sources.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rough/direct_imaging.hpp"

namespace rough {

namespace {

// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

double pow_int(double x, unsigned n) {
    double acc = 1.0;
    double base = x;
    for (unsigned e = n; e != 0; e >>= 1) {
        if (e & 1u) acc *= base;
        base *= base;
    }
    return acc;
}

} // namespace

void validate(const SourceDistribution& f) {
    if (f.positions.empty()) throw std::invalid_argument("distribution: needs at least one source");
    if (f.positions.size() != f.weights.size())
        throw std::invalid_argument("distribution: positions and weights differ in length");
    CompensatedSum total;
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
        if (!std::isfinite(f.positions[i]))
            throw std::invalid_argument("distribution: position " + std::to_string(i) + " is not finite");
        const double w = f.weights[i];
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("distribution: weight " + std::to_string(i) +
                                        " must be finite and >= 0");
        total.add(w);
    }
    if (std::fabs(total.value() - 1.0) > 1e-12)
        throw std::invalid_argument("distribution: weights must sum to 1 (got " +
                                    std::to_string(total.value()) + ")");
}

SourceDistribution two_point(double s) {
    return SourceDistribution{{-s, s}, {0.5, 0.5}};
}

SourceDistribution centered(const SourceDistribution& f) {
    validate(f);
    const double mean = axial_moment(f, 1);
    SourceDistribution g = f;
    for (double& z : g.positions) z -= mean;
    return g;
}

void validate(const MomentVector& m) {
    if (m.values.size() != static_cast<std::size_t>(m.order) + 1)
        throw std::invalid_argument("moments: values size must be order + 1");
    for (double v : m.values)
        if (!std::isfinite(v)) throw std::invalid_argument("moments: non-finite entry");
    switch (m.kind) {
        case MomentKind::object_theta:
            if (std::fabs(m.values[0] - 1.0) > 1e-12)
                throw std::invalid_argument("moments: theta_0 must be 1");
            break;
        case MomentKind::image_phi:
            if (std::fabs(m.values[0] - 1.0) > 1e-12)
                throw std::invalid_argument("moments: phi_0 must be 1");
            for (double v : m.values)
                if (v < 0.0) throw std::invalid_argument("moments: even image moments are >= 0");
            break;
        case MomentKind::mode_f: {
            CompensatedSum mass;
            for (double v : m.values) {
                if (v < 0.0 || v > 1.0)
                    throw std::invalid_argument("moments: mode intensities must lie in [0,1]");
                mass.add(v);
            }
            if (mass.value() > 1.0 + 1e-12)
                throw std::invalid_argument("moments: mode intensities sum past 1");
            break;
        }
    }
}

double axial_moment(const SourceDistribution& f, unsigned l) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < f.positions.size(); ++i)
        acc.add(f.weights[i] * pow_int(f.positions[i], l));
    return acc.value();
}

MomentVector object_moments(const SourceDistribution& f, unsigned K) {
    MomentVector m;
    m.kind = MomentKind::object_theta;
    m.order = K;
    m.values.resize(K + 1);
    for (unsigned l = 0; l <= K; ++l) m.values[l] = axial_moment(f, l);
    return m;
}

double roughness(const SourceDistribution& f) {
    const double mean = axial_moment(f, 1);
    CompensatedSum acc;
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
        const double d = f.positions[i] - mean;
        acc.add(f.weights[i] * d * d);
    }
    return std::sqrt(std::max(acc.value(), 0.0));
}

MomentVector image_moments_di(const SourceDistribution& f, const OpticalConfig& cfg, unsigned K) {
    validate(f);
    validate(cfg);
    const Matrix c = c_matrix(cfg, K);
    MomentVector phi;
    phi.kind = MomentKind::image_phi;
    phi.order = K;
    phi.values.resize(K + 1);
    // phi_2j = sum_{k<=j} C_jk theta_2k; exact for discrete sources.
    std::vector<double> theta_even(K + 1);
    for (unsigned k = 0; k <= K; ++k) theta_even[k] = axial_moment(f, 2 * k);
    for (unsigned j = 0; j <= K; ++j) {
        CompensatedSum acc;
        for (unsigned k = 0; k <= j; ++k) acc.add(c(j, k) * theta_even[k]);
        phi.values[j] = acc.value();
    }
    return phi;
}

MomentVector mode_intensities_spade(const SourceDistribution& f, const OpticalConfig& cfg,
                                    unsigned Q) {
    validate(f);
    validate(cfg);
    MomentVector modes;
    modes.kind = MomentKind::mode_f;
    modes.order = Q;
    modes.values.resize(Q + 1);
    for (unsigned q = 0; q <= Q; ++q) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < f.positions.size(); ++i)
            acc.add(f.weights[i] * mode_overlap_prob(cfg, q, f.positions[i]));
        modes.values[q] = acc.value();
    }
    return modes;
}

double spade_tail_mass(const SourceDistribution& f, const OpticalConfig& cfg, unsigned Q) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < f.positions.size(); ++i)
        acc.add(f.weights[i] * pow_int(geometric_ratio(cfg, f.positions[i]), Q + 1));
    return acc.value();
}

unsigned adaptive_mode_truncation(const SourceDistribution& f, const OpticalConfig& cfg,
                                  double tail_tol) {
    validate(f);
    validate(cfg);
    if (!(tail_tol > 0.0)) throw std::invalid_argument("mode truncation: tail_tol must be > 0");
    // xi < 1 always (z finite), so the loop terminates; the cap only guards
    // against tolerances below what doubles can resolve.
    constexpr unsigned kMaxModes = 200000;
    for (unsigned Q = 0; Q < kMaxModes; ++Q)
        if (spade_tail_mass(f, cfg, Q) < tail_tol) return Q;
    return kMaxModes;
}

} // namespace rough
