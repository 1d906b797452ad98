#pragma once

#include <cstdint>
#include <vector>

#include "rough/estimator.hpp"
#include "rough/optics.hpp"
#include "rough/rng.hpp"
#include "rough/sources.hpp"

namespace rough {

enum class Channel { direct_imaging, spade };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& name);

struct ExperimentConfig {
    SourceDistribution distribution;
    OpticalConfig optics;
    Channel channel = Channel::spade;
    std::uint64_t photons_per_run = 1'000'000; // exactly this many per repetition
    std::uint32_t repetitions = 200;
    std::uint64_t seed = 1;
    EstimatorTarget target = EstimatorTarget::roughness;
    unsigned estimator_truncation = 1; // moment order of the DI influence function
};

void validate(const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<double> estimates;      // one per repetition, indexed by repetition
    double empirical_rescaled_variance; // m * Var(estimates), (n-1) normalization
    double analytic_crb;                // channel CRB for the target at F0
    double quantum_bound;               // quantum limit for the target at F0
    double mean_estimate;
    double reference_value;             // beta(F0)
    std::uint64_t guard_count;          // SPADE photons above the histogram truncation
    unsigned mode_truncation;           // SPADE histogram size (0 for DI)
    bool insufficient_repetitions;      // repetitions < 2: variance reported as 0
    bool low_confidence;                // repetitions < 30
    double wall_time_seconds;           // in-memory only; never serialized (outputs
                                        // must be byte-identical across thread counts)
};

// One photon's source position; cumulative-weight inversion.
double sample_source_position(const SourceDistribution& f, Xoshiro256pp& rng);

// Image-plane radius under direct imaging of a source at z: inverse CDF of
// the radial PSF law, r = omega(z) sqrt(-ln u / 2).
double sample_di_radius(const OpticalConfig& cfg, double z, Xoshiro256pp& rng);

// LG mode index under SPADE sorting of a source at z: geometric with ratio
// xi(z), q = floor(ln u / ln xi); z = 0 always lands in the fundamental.
std::uint64_t sample_spade_mode(const OpticalConfig& cfg, double z, Xoshiro256pp& rng);

// Run the experiment: repetitions are independent work units, each driven
// by repetition_stream(seed, rep), so results are invariant under thread
// count and scheduling. threads = 0 means the OpenMP default.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

// Reference implementation: same per-repetition body, plain loop, no OpenMP.
// Kept for tests and the benchmark; must agree with run_experiment exactly.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

} // namespace rough
