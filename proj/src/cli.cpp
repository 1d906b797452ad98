#include "rough/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rough/direct_imaging.hpp"
#include "rough/errors.hpp"
#include "rough/quantum.hpp"
#include "rough/spade.hpp"

namespace rough {

using json = nlohmann::ordered_json;

std::string to_string(ScanSpec::Axis a) {
    switch (a) {
        case ScanSpec::Axis::separation: return "separation";
        case ScanSpec::Axis::photons: return "photons";
        case ScanSpec::Axis::rayleigh_range: return "rayleigh-range";
    }
    throw std::invalid_argument("unknown scan axis");
}

ScanSpec::Axis scan_axis_from_string(const std::string& name) {
    if (name == "separation") return ScanSpec::Axis::separation;
    if (name == "photons") return ScanSpec::Axis::photons;
    if (name == "rayleigh-range") return ScanSpec::Axis::rayleigh_range;
    throw std::invalid_argument("unknown scan axis '" + name +
                                "' (expected separation, photons, or rayleigh-range)");
}

namespace {

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

[[noreturn]] void config_error(const std::string& ptr, const std::string& what) {
    throw std::invalid_argument("config error at " + (ptr.empty() ? "/" : ptr) + ": " + what);
}

void reject_unknown(const json& obj, const std::string& ptr,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) config_error(ptr + "/" + item.key(), "unknown key");
    }
}

double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) config_error(ptr, "expected a number");
    return v.get<double>();
}

std::uint64_t as_uint(const json& v, const std::string& ptr) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    config_error(ptr, "expected a nonnegative integer");
}

std::string as_string(const json& v, const std::string& ptr) {
    if (!v.is_string()) config_error(ptr, "expected a string");
    return v.get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& ptr) {
    if (!v.is_array()) config_error(ptr, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_number(v[i], ptr + "/" + std::to_string(i)));
    return out;
}

void apply_config_file(RunConfig& rc, const json& doc) {
    if (!doc.is_object()) config_error("", "expected a JSON object");
    reject_unknown(doc, "",
                   {"command", "optics", "distribution", "channel", "photons_per_run",
                    "repetitions", "seed", "estimator_target", "estimator_truncation",
                    "truncation", "scan", "output_format"});
    // "command" is accepted so that an emitted config echo can be fed back in
    // unchanged; the subcommand on the command line wins.
    if (doc.contains("optics")) {
        const json& o = doc["optics"];
        if (!o.is_object()) config_error("/optics", "expected an object");
        reject_unknown(o, "/optics", {"rayleigh_range", "omega0"});
        if (o.contains("rayleigh_range"))
            rc.experiment.optics.rayleigh_range = as_number(o["rayleigh_range"], "/optics/rayleigh_range");
        if (o.contains("omega0"))
            rc.experiment.optics.omega0 = as_number(o["omega0"], "/optics/omega0");
    }
    if (doc.contains("distribution")) {
        const json& d = doc["distribution"];
        if (!d.is_object()) config_error("/distribution", "expected an object");
        reject_unknown(d, "/distribution", {"positions", "weights"});
        if (!d.contains("positions"))
            config_error("/distribution/positions", "missing required field");
        if (!d.contains("weights")) config_error("/distribution/weights", "missing required field");
        rc.experiment.distribution.positions =
            as_number_array(d["positions"], "/distribution/positions");
        rc.experiment.distribution.weights = as_number_array(d["weights"], "/distribution/weights");
    }
    if (doc.contains("channel")) {
        try {
            rc.experiment.channel = channel_from_string(as_string(doc["channel"], "/channel"));
        } catch (const std::invalid_argument& e) {
            config_error("/channel", e.what());
        }
    }
    if (doc.contains("photons_per_run")) {
        const std::uint64_t m = as_uint(doc["photons_per_run"], "/photons_per_run");
        if (m < 1) config_error("/photons_per_run", "must be >= 1");
        rc.experiment.photons_per_run = m;
    }
    if (doc.contains("repetitions")) {
        const std::uint64_t n = as_uint(doc["repetitions"], "/repetitions");
        if (n < 1 || n > 100'000'000) config_error("/repetitions", "must be in [1, 1e8]");
        rc.experiment.repetitions = static_cast<std::uint32_t>(n);
    }
    if (doc.contains("seed")) rc.experiment.seed = as_uint(doc["seed"], "/seed");
    if (doc.contains("estimator_target")) {
        try {
            rc.experiment.target = estimator_target_from_string(
                as_string(doc["estimator_target"], "/estimator_target"));
        } catch (const std::invalid_argument& e) {
            config_error("/estimator_target", e.what());
        }
    }
    if (doc.contains("estimator_truncation")) {
        const std::uint64_t k = as_uint(doc["estimator_truncation"], "/estimator_truncation");
        if (k < 1 || k > 64) config_error("/estimator_truncation", "must be in [1, 64]");
        rc.experiment.estimator_truncation = static_cast<unsigned>(k);
    }
    if (doc.contains("truncation")) {
        const std::uint64_t k = as_uint(doc["truncation"], "/truncation");
        if (k < 1) config_error("/truncation", "must be >= 1");
        rc.truncation = static_cast<unsigned>(k);
    }
    if (doc.contains("scan")) {
        const json& s = doc["scan"];
        if (s.is_null()) {
            rc.scan.reset();
        } else {
            if (!s.is_object()) config_error("/scan", "expected an object");
            reject_unknown(s, "/scan", {"axis", "values", "empirical"});
            if (!s.contains("axis")) config_error("/scan/axis", "missing required field");
            if (!s.contains("values")) config_error("/scan/values", "missing required field");
            ScanSpec spec;
            try {
                spec.axis = scan_axis_from_string(as_string(s["axis"], "/scan/axis"));
            } catch (const std::invalid_argument& e) {
                config_error("/scan/axis", e.what());
            }
            spec.values = as_number_array(s["values"], "/scan/values");
            spec.empirical = spec.axis == ScanSpec::Axis::photons;
            if (s.contains("empirical")) {
                if (!s["empirical"].is_boolean()) config_error("/scan/empirical", "expected a boolean");
                spec.empirical = s["empirical"].get<bool>();
            }
            rc.scan = spec;
        }
    }
    if (doc.contains("output_format"))
        rc.output_format = as_string(doc["output_format"], "/output_format");
}

void validate_scan(const ScanSpec& s) {
    if (s.values.size() < 2) config_error("/scan/values", "grid needs at least 2 points");
    const bool increasing = s.values[1] > s.values[0];
    for (std::size_t i = 1; i < s.values.size(); ++i) {
        const bool up = s.values[i] > s.values[i - 1];
        if (up != increasing || s.values[i] == s.values[i - 1])
            config_error("/scan/values", "grid must be strictly monotone");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const std::string ptr = "/scan/values/" + std::to_string(i);
        const double v = s.values[i];
        if (!std::isfinite(v)) config_error(ptr, "must be finite");
        switch (s.axis) {
            case ScanSpec::Axis::separation:
                if (v < 0.0) config_error(ptr, "separation must be >= 0");
                break;
            case ScanSpec::Axis::photons:
                if (v < 1.0 || v != std::floor(v)) config_error(ptr, "photon counts must be positive integers");
                break;
            case ScanSpec::Axis::rayleigh_range:
                if (v <= 0.0) config_error(ptr, "rayleigh range must be > 0");
                break;
        }
    }
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"order", m.rows() - 1}, {"size", m.rows()}, {"rows", std::move(rows)}};
}

json resolved_config_json(const RunConfig& rc) {
    json j;
    j["command"] = rc.command;
    j["optics"] = {{"rayleigh_range", rc.experiment.optics.rayleigh_range},
                   {"omega0", rc.experiment.optics.omega0}};
    j["distribution"] = {{"positions", rc.experiment.distribution.positions},
                         {"weights", rc.experiment.distribution.weights}};
    j["channel"] = to_string(rc.experiment.channel);
    j["photons_per_run"] = rc.experiment.photons_per_run;
    j["repetitions"] = rc.experiment.repetitions;
    j["seed"] = rc.experiment.seed;
    j["estimator_target"] = to_string(rc.experiment.target);
    j["estimator_truncation"] = rc.experiment.estimator_truncation;
    j["truncation"] = rc.truncation;
    if (rc.scan) {
        j["scan"] = {{"axis", to_string(rc.scan->axis)},
                     {"values", rc.scan->values},
                     {"empirical", rc.scan->empirical}};
    } else {
        j["scan"] = nullptr;
    }
    j["output_format"] = rc.output_format;
    return j;
}

// Writes the payload to --out (or `out` when no path was given) and the
// one-line summary to whichever of stdout/stderr is not carrying the payload.
void emit(const RunConfig& rc, const std::string& payload, const std::string& summary,
          std::ostream& out, std::ostream& err) {
    if (rc.output_path.empty()) {
        out << payload;
        if (!summary.empty()) err << summary << "\n";
    } else {
        std::ofstream file(rc.output_path, std::ios::binary);
        if (!file) throw std::invalid_argument("cannot open output path " + rc.output_path);
        file << payload;
        if (!file) throw std::invalid_argument("write failed for output path " + rc.output_path);
        if (!summary.empty()) out << summary << "\n";
    }
}

int cmd_bounds(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const SourceDistribution& f = rc.experiment.distribution;
    const OpticalConfig& optics = rc.experiment.optics;
    const QfiReport qr = make_qfi_report(f, optics, rc.truncation);
    json doc;
    doc["command"] = "bounds";
    doc["config"] = resolved_config_json(rc);
    doc["quantum"] = {{"mean", qr.bound_mean},
                      {"roughness", qr.bound_roughness},
                      {"probe_dz", qr.probe_dz},
                      {"max_abs_position", qr.max_abs_position},
                      {"displacement_qfi", matrix_json(qr.displacement_qfi)},
                      {"inverse_moment_qfi", matrix_json(qr.inverse_moment_qfi)}};
    doc["direct_imaging"] = {{"roughness", di_roughness_crb(f, optics)}};
    doc["spade"] = {{"roughness", spade_roughness_crb(f, optics)}};
    emit(rc, doc.dump(2) + "\n", "", out, err);
    return 0;
}

int cmd_matrices(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const OpticalConfig& optics = rc.experiment.optics;
    const unsigned K = rc.truncation;
    json doc;
    doc["command"] = "matrices";
    doc["config"] = resolved_config_json(rc);
    doc["c"] = matrix_json(c_matrix(optics, K));
    doc["c_inverse"] = matrix_json(c_inverse(optics, K));
    doc["w"] = matrix_json(w_matrix(optics, K));
    doc["w_inverse"] = matrix_json(w_inverse(optics, K));
    doc["residual_c"] = c_identity_residual(optics, K);
    doc["residual_w"] = w_identity_residual(optics, K);
    emit(rc, doc.dump(2) + "\n", "", out, err);
    return 0;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const ExperimentResult res = run_experiment(rc.experiment, rc.threads);

    std::string payload;
    if (rc.output_format == "csv") {
        std::ostringstream os;
        os << "repetition,estimate\n";
        for (std::size_t i = 0; i < res.estimates.size(); ++i)
            os << i << "," << fmt12(res.estimates[i]) << "\n";
        payload = os.str();
    } else {
        json doc;
        doc["command"] = "simulate";
        doc["config"] = resolved_config_json(rc);
        doc["result"] = {{"estimates", res.estimates},
                         {"empirical_rescaled_variance", res.empirical_rescaled_variance},
                         {"analytic_crb", res.analytic_crb},
                         {"quantum_bound", res.quantum_bound},
                         {"mean_estimate", res.mean_estimate},
                         {"reference_value", res.reference_value},
                         {"bias", res.mean_estimate - res.reference_value},
                         {"guard_count", res.guard_count},
                         {"mode_truncation", res.mode_truncation},
                         {"flags",
                          {{"insufficient_repetitions", res.insufficient_repetitions},
                           {"low_confidence", res.low_confidence}}}};
        payload = doc.dump(2) + "\n";
    }

    std::ostringstream summary;
    summary << "simulate channel=" << to_string(rc.experiment.channel)
            << " photons=" << rc.experiment.photons_per_run
            << " repetitions=" << rc.experiment.repetitions
            << " rescaled_variance=" << fmt12(res.empirical_rescaled_variance)
            << " analytic_crb=" << fmt12(res.analytic_crb)
            << " ratio=" << fmt12(res.empirical_rescaled_variance / res.analytic_crb)
            << " wall_s=" << fmt12(res.wall_time_seconds);
    emit(rc, payload, summary.str(), out, err);
    return 0;
}

int cmd_scan(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const ScanSpec& spec = *rc.scan;
    ScanTable table;
    table.columns = {to_string(spec.axis), "quantum_roughness", "spade_roughness",
                     "di_roughness"};
    if (spec.empirical) table.columns.push_back("empirical_rescaled_variance");
    table.columns.push_back("divergent");

    const double base_zr = rc.experiment.optics.rayleigh_range;
    for (double v : spec.values) {
        ExperimentConfig e = rc.experiment;
        switch (spec.axis) {
            case ScanSpec::Axis::separation:
                e.distribution = two_point(v);
                break;
            case ScanSpec::Axis::photons:
                e.photons_per_run = static_cast<std::uint64_t>(v);
                break;
            case ScanSpec::Axis::rayleigh_range: {
                // Hold the dimensionless geometry fixed: scale positions with z_R.
                const double scale = v / base_zr;
                e.optics.rayleigh_range = v;
                for (double& z : e.distribution.positions) z *= scale;
                break;
            }
        }
        const double sigma = roughness(e.distribution);
        std::vector<double> row;
        row.push_back(v);
        if (sigma == 0.0) {
            const double inf = std::numeric_limits<double>::infinity();
            row.push_back(inf);
            row.push_back(inf);
            row.push_back(inf);
            if (spec.empirical) row.push_back(inf);
            row.push_back(1.0);
        } else {
            row.push_back(quantum_bound_roughness(e.distribution, e.optics));
            row.push_back(spade_roughness_crb(e.distribution, e.optics));
            row.push_back(di_roughness_crb(e.distribution, e.optics));
            if (spec.empirical)
                row.push_back(run_experiment(e, rc.threads).empirical_rescaled_variance);
            row.push_back(0.0);
        }
        table.rows.push_back(std::move(row));
    }

    std::string payload;
    if (rc.output_format == "csv") {
        std::ostringstream os;
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            os << (i ? "," : "") << table.columns[i];
        os << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt12(row[i]);
            os << "\n";
        }
        payload = os.str();
    } else {
        json doc;
        doc["command"] = "scan";
        doc["config"] = resolved_config_json(rc);
        doc["columns"] = table.columns;
        doc["rows"] = table.rows;
        payload = doc.dump(2) + "\n";
    }
    std::ostringstream summary;
    summary << "scan axis=" << to_string(spec.axis) << " points=" << spec.values.size()
            << " empirical=" << (spec.empirical ? "yes" : "no");
    emit(rc, payload, summary.str(), out, err);
    return 0;
}

} // namespace

ScanTable parse_scan_csv(std::istream& in) {
    ScanTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("scan csv: empty input");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    if (table.columns.empty()) throw std::invalid_argument("scan csv: no columns");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream fields(line);
        while (std::getline(fields, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::invalid_argument("scan csv: bad number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != table.columns.size())
            throw std::invalid_argument("scan csv: row width does not match header");
        table.rows.push_back(std::move(row));
    }
    return table;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Precision limits for axial roughness estimation: quantum bound, "
                 "SPADE, and direct imaging"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    std::string out_path;
    std::string format;

    const auto add_common = [&](CLI::App* sc) {
        sc->add_option("--config", config_path, "JSON config file ('-' reads stdin)");
        sc->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_given = true; });
        sc->add_option("--threads", threads, "worker threads (0 = library default)")
            ->check(CLI::Range(0, 4096));
        sc->add_option("--out", out_path, "output file (default: stdout)");
        sc->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };
    add_common(app.add_subcommand("bounds", "analytic quantum/SPADE/DI roughness bounds"));
    add_common(app.add_subcommand("matrices", "moment-map matrices and identity residuals"));
    add_common(app.add_subcommand("simulate", "Monte Carlo estimator runs on one channel"));
    add_common(app.add_subcommand("scan", "bound table over a parameter grid"));

    std::vector<const char*> argv;
    argv.push_back("roughness");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig rc;
        rc.experiment.distribution = two_point(0.05);
        rc.command = app.get_subcommands().front()->get_name();

        if (!config_path.empty()) {
            json doc;
            if (config_path == "-") {
                try {
                    doc = json::parse(std::cin);
                } catch (const json::parse_error& e) {
                    config_error("", std::string("JSON parse failure: ") + e.what());
                }
            } else {
                std::ifstream file(config_path);
                if (!file) throw std::invalid_argument("cannot open config file " + config_path);
                try {
                    doc = json::parse(file);
                } catch (const json::parse_error& e) {
                    config_error("", std::string("JSON parse failure: ") + e.what());
                }
            }
            apply_config_file(rc, doc);
        }

        if (seed_given) rc.experiment.seed = seed;
        rc.threads = threads;
        if (!out_path.empty()) rc.output_path = out_path;
        if (!format.empty()) rc.output_format = format;

        if (rc.output_format != "json" && rc.output_format != "csv")
            config_error("/output_format", "expected json or csv");
        if (rc.output_format == "csv" && rc.command != "scan" && rc.command != "simulate")
            throw std::invalid_argument("csv output is only available for scan and simulate");
        validate(rc.experiment.distribution);
        validate(rc.experiment.optics);
        if (rc.command == "scan") {
            if (!rc.scan) throw std::invalid_argument("scan requires a scan block in the config");
            validate_scan(*rc.scan);
        }

        if (rc.command == "bounds") return cmd_bounds(rc, out, err);
        if (rc.command == "matrices") return cmd_matrices(rc, out, err);
        if (rc.command == "simulate") return cmd_simulate(rc, out, err);
        return cmd_scan(rc, out, err);
    } catch (const singular_parametrization_error& e) {
        err << "error (singular parametrization): " << e.what() << "\n";
        return 2;
    } catch (const estimator_error& e) {
        err << "error (estimator): " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace rough
