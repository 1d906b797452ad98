// Compares the serial reference Monte Carlo driver against the OpenMP one
// and reports throughput. The estimate vectors must agree bit for bit; any
// mismatch is a scheduling bug, not noise.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rough/montecarlo.hpp"

namespace {

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t photons = 1'000'000;
    std::uint32_t repetitions = 200;
    if (argc > 1) photons = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) repetitions = static_cast<std::uint32_t>(std::strtoul(argv[2], nullptr, 10));

    rough::ExperimentConfig cfg;
    cfg.distribution = rough::two_point(0.05);
    cfg.photons_per_run = photons;
    cfg.repetitions = repetitions;
    cfg.seed = 7;

    int max_threads = 1;
#ifdef _OPENMP
    max_threads = omp_get_max_threads();
#endif

    std::printf("channel=%s photons=%" PRIu64 " repetitions=%u\n",
                rough::to_string(cfg.channel).c_str(), cfg.photons_per_run, cfg.repetitions);
    std::printf("%-10s %12s %10s %8s\n", "driver", "wall_s", "reps/s", "match");

    const rough::ExperimentResult ref = rough::run_experiment_serial(cfg);
    std::printf("%-10s %12.4f %10.1f %8s\n", "serial", ref.wall_time_seconds,
                repetitions / ref.wall_time_seconds, "ref");

    int exit_code = 0;
    int prev = 0;
    for (int t : {1, 2, 4, max_threads}) {
        if (t > max_threads || t == prev) continue;
        prev = t;
        const rough::ExperimentResult r = rough::run_experiment(cfg, t);
        const bool ok = identical(r.estimates, ref.estimates);
        if (!ok) exit_code = 1;
        char label[32];
        std::snprintf(label, sizeof label, "omp(%d)", t);
        std::printf("%-10s %12.4f %10.1f %8s\n", label, r.wall_time_seconds,
                    repetitions / r.wall_time_seconds, ok ? "yes" : "NO");
    }
    return exit_code;
}
