#include "rough/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rough/direct_imaging.hpp"
#include "rough/errors.hpp"
#include "rough/quantum.hpp"
#include "rough/spade.hpp"

namespace rough {

std::string to_string(Channel c) {
    switch (c) {
        case Channel::direct_imaging: return "direct-imaging";
        case Channel::spade: return "spade";
    }
    throw std::invalid_argument("unknown channel");
}

Channel channel_from_string(const std::string& name) {
    if (name == "direct-imaging") return Channel::direct_imaging;
    if (name == "spade") return Channel::spade;
    throw std::invalid_argument("unknown channel '" + name +
                                "' (expected direct-imaging or spade)");
}

void validate(const ExperimentConfig& cfg) {
    validate(cfg.distribution);
    validate(cfg.optics);
    if (cfg.photons_per_run < 1)
        throw std::invalid_argument("experiment: photons_per_run must be >= 1");
    if (cfg.repetitions < 1) throw std::invalid_argument("experiment: repetitions must be >= 1");
    if (cfg.estimator_truncation < 1 || cfg.estimator_truncation > 64)
        throw std::invalid_argument("experiment: estimator_truncation must be in [1, 64]");
}

double sample_source_position(const SourceDistribution& f, Xoshiro256pp& rng) {
    const double u = rng.uniform_pos();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.weights.size(); ++i) {
        acc += f.weights[i];
        if (u <= acc) return f.positions[i];
    }
    return f.positions.back(); // cumulative rounding fell short of 1
}

double sample_di_radius(const OpticalConfig& cfg, double z, Xoshiro256pp& rng) {
    // P(R > r) = exp(-2 r^2 / omega^2): invert on u in (0,1].
    const double u = rng.uniform_pos();
    return beam_width(cfg, z) * std::sqrt(-std::log(u) / 2.0);
}

std::uint64_t sample_spade_mode(const OpticalConfig& cfg, double z, Xoshiro256pp& rng) {
    const double xi = geometric_ratio(cfg, z);
    const double u = rng.uniform_pos();
    if (xi == 0.0) return 0;
    // P(Q >= n) = xi^n; u = 1 lands in the fundamental.
    const double q = std::floor(std::log(u) / std::log(xi));
    return static_cast<std::uint64_t>(std::min(q, 9e15));
}

namespace {

struct RepOutcome {
    double estimate = 0.0;
    std::uint64_t guard = 0;
};

RepOutcome run_one_repetition(const ExperimentConfig& cfg, unsigned mode_truncation,
                              std::uint64_t rep) {
    Xoshiro256pp rng = repetition_stream(cfg.seed, rep);
    RepOutcome out;
    if (cfg.channel == Channel::direct_imaging) {
        // Stream photons into compensated sums of r^(2j); the estimator then
        // consumes the empirical moments (identical to feeding it samples).
        const unsigned K = cfg.estimator_truncation;
        std::vector<double> sum(K + 1, 0.0), comp(K + 1, 0.0);
        for (std::uint64_t n = 0; n < cfg.photons_per_run; ++n) {
            const double z = sample_source_position(cfg.distribution, rng);
            const double r = sample_di_radius(cfg.optics, z, rng);
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
        for (unsigned j = 0; j <= K; ++j)
            emp.values[j] = (sum[j] + comp[j]) / static_cast<double>(cfg.photons_per_run);
        out.estimate = di_influence_estimate(emp, cfg.distribution, cfg.optics, cfg.target, K);
    } else {
        std::vector<std::uint64_t> hist(mode_truncation + 2, 0);
        const std::uint64_t guard_bin = mode_truncation + 1;
        for (std::uint64_t n = 0; n < cfg.photons_per_run; ++n) {
            const double z = sample_source_position(cfg.distribution, rng);
            const std::uint64_t q = sample_spade_mode(cfg.optics, z, rng);
            ++hist[std::min(q, guard_bin)];
        }
        out.guard = hist[guard_bin];
        out.estimate = spade_influence_estimate(hist, cfg.distribution, cfg.optics, cfg.target);
    }
    return out;
}

ExperimentResult run_impl(const ExperimentConfig& cfg, int threads, bool parallel) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    // Fail fast on the unidentifiable target, through the channel's own
    // estimator so the message stays in one place.
    if (cfg.target == EstimatorTarget::mean_height) {
        if (cfg.channel == Channel::direct_imaging) {
            const double r[1] = {0.0};
            di_influence_estimate(std::span<const double>(r, 1), cfg.distribution, cfg.optics,
                                  cfg.target, cfg.estimator_truncation);
        } else {
            const std::uint64_t c[1] = {1};
            spade_influence_estimate(std::span<const std::uint64_t>(c, 1), cfg.distribution,
                                     cfg.optics, cfg.target);
        }
    }

    ExperimentResult res{};
    res.mode_truncation = 0;
    unsigned mode_truncation = 0;
    if (cfg.channel == Channel::spade) {
        mode_truncation = adaptive_mode_truncation(cfg.distribution, cfg.optics);
        res.mode_truncation = mode_truncation;
    }

    // Analytic references for the requested target.
    if (cfg.target == EstimatorTarget::roughness) {
        res.reference_value = roughness(cfg.distribution);
        res.analytic_crb = (cfg.channel == Channel::direct_imaging)
                               ? di_roughness_crb(cfg.distribution, cfg.optics)
                               : spade_roughness_crb(cfg.distribution, cfg.optics);
        res.quantum_bound = quantum_bound_roughness(cfg.distribution, cfg.optics);
    } else {
        res.reference_value = axial_moment(cfg.distribution, 2);
        res.analytic_crb = (cfg.channel == Channel::direct_imaging)
                               ? di_moment_crb(cfg.distribution, cfg.optics, 1)(1, 1)
                               : spade_moment_crb(cfg.distribution, cfg.optics, 1)(1, 1);
        res.quantum_bound =
            inverse_qfi_moments(object_moments(cfg.distribution, 2), cfg.optics, 2)(1, 1);
    }

    const std::int64_t reps = cfg.repetitions;
    res.estimates.resize(cfg.repetitions);
    std::vector<std::uint64_t> guards(cfg.repetitions, 0);

    if (parallel) {
#ifdef _OPENMP
        const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
        for (std::int64_t rep = 0; rep < reps; ++rep) {
            const RepOutcome o = run_one_repetition(cfg, mode_truncation,
                                                    static_cast<std::uint64_t>(rep));
            res.estimates[rep] = o.estimate;
            guards[rep] = o.guard;
        }
#else
        (void)threads;
        for (std::int64_t rep = 0; rep < reps; ++rep) {
            const RepOutcome o = run_one_repetition(cfg, mode_truncation,
                                                    static_cast<std::uint64_t>(rep));
            res.estimates[rep] = o.estimate;
            guards[rep] = o.guard;
        }
#endif
    } else {
        for (std::int64_t rep = 0; rep < reps; ++rep) {
            const RepOutcome o = run_one_repetition(cfg, mode_truncation,
                                                    static_cast<std::uint64_t>(rep));
            res.estimates[rep] = o.estimate;
            guards[rep] = o.guard;
        }
    }

    res.guard_count = 0;
    for (std::uint64_t g : guards) res.guard_count += g;

    // Mean and (n-1)-normalized variance, accumulated in repetition order.
    double msum = 0.0, mcomp = 0.0;
    for (double e : res.estimates) {
        const double t = msum + e;
        if (std::fabs(msum) >= std::fabs(e))
            mcomp += (msum - t) + e;
        else
            mcomp += (e - t) + msum;
        msum = t;
    }
    res.mean_estimate = (msum + mcomp) / static_cast<double>(cfg.repetitions);
    res.insufficient_repetitions = cfg.repetitions < 2;
    res.low_confidence = cfg.repetitions < 30;
    double variance = 0.0;
    if (!res.insufficient_repetitions) {
        double vsum = 0.0, vcomp = 0.0;
        for (double e : res.estimates) {
            const double d = e - res.mean_estimate;
            const double x = d * d;
            const double t = vsum + x;
            if (std::fabs(vsum) >= std::fabs(x))
                vcomp += (vsum - t) + x;
            else
                vcomp += (x - t) + vsum;
            vsum = t;
        }
        variance = (vsum + vcomp) / static_cast<double>(cfg.repetitions - 1);
    }
    res.empirical_rescaled_variance = static_cast<double>(cfg.photons_per_run) * variance;

    res.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    return run_impl(cfg, threads, true);
}

ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) {
    return run_impl(cfg, 0, false);
}

} // namespace rough
