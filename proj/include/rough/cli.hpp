#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rough/montecarlo.hpp"

namespace rough {

struct ScanSpec {
    enum class Axis { separation, photons, rayleigh_range };
    Axis axis = Axis::separation;
    std::vector<double> values; // strictly monotone, >= 2 points
    bool empirical = false;     // append a Monte Carlo column (default on for photons)
};

std::string to_string(ScanSpec::Axis a);
ScanSpec::Axis scan_axis_from_string(const std::string& name);

// Fully resolved invocation: defaults, then config file, then flags, in
// increasing precedence. Every output document embeds this (minus the
// output path) so it can be re-run from the output alone.
struct RunConfig {
    std::string command; // bounds | matrices | simulate | scan
    ExperimentConfig experiment;
    unsigned truncation = 20; // moment order of emitted reports/matrices
    std::optional<ScanSpec> scan;
    std::string output_path;          // empty = stdout
    std::string output_format = "json"; // json | csv (csv: scan and simulate only)
    int threads = 0;
};

// One row of a scan table; the parse side of the CSV round trip.
struct ScanTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

ScanTable parse_scan_csv(std::istream& in);

// Entry point used by both main() and the tests. args excludes argv[0].
// Exit codes: 0 success; 1 validation/parse failure; 2 singular
// parametrization (e.g. sigma = 0 bounds); 3 estimator failure at runtime.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rough
