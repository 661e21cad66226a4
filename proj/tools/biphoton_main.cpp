#include <algorithm>
#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"
#include "biphoton/cli.hpp"

namespace {

using biphoton::RunConfig;

struct CommonArgs {
    std::string output_path;
    std::string format;  // empty until --format is given; subcommands have defaults
};

void add_common_options(CLI::App* sub, RunConfig& config, CommonArgs& common) {
    sub->add_flag("--gaussian", config.gaussian_family,
                  "use the pure two-mode Gaussian family instead of spdc");
    sub->add_option("--c", config.pump_waist_c, "pump waist at the crystal plane [m]");
    sub->add_option("--p", config.p_value, "dimensionless state parameter p");
    sub->add_option("--L", config.crystal_length_L, "crystal length [m]")
        ->capture_default_str();
    sub->add_option("--lambda", config.vacuum_wavelength,
                    "vacuum wavelength of the down-converted photons [m]")
        ->capture_default_str();
    sub->add_option("--fq", config.focal_length_fq, "far-field lens focal length [m]")
        ->capture_default_str();
    sub->add_option("--slit", config.slit_width, "far-field slit width [m]")
        ->capture_default_str();
    sub->add_option("--fiber", config.fiber_core_diameter,
                    "near-field fiber core diameter [m]")
        ->capture_default_str();
    sub->add_option("--rel-tol", config.quad.relative_tolerance,
                    "quadrature relative tolerance")
        ->capture_default_str();
    sub->add_option("--abs-tol", config.quad.absolute_tolerance,
                    "quadrature absolute tolerance")
        ->capture_default_str();
    sub->add_option("--max-subdiv", config.quad.max_subdivisions,
                    "quadrature subdivision budget")
        ->capture_default_str();
    sub->add_option("--trunc-factor", config.quad.truncation_radius_factor,
                    "domain cutoff in units of the integrand's natural width")
        ->capture_default_str();
    sub->add_option("--schmidt-n", config.schmidt_points,
                    "grid resolution for the SVD Schmidt number")
        ->capture_default_str();
    sub->add_option("--format", common.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output", common.output_path, "write the artifact to this file");
    sub->add_option("--config", config.config_path,
                    "plain-text 'key = value' config; flags win on conflict");
}

// Expands "--config FILE" before CLI11 sees the argument list: every
// 'key = value' line whose flag is absent from the command line is appended,
// so explicit flags always win.
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) return args;  // missing file reported by the option's own check
    const auto given = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value == "true") {
            args.push_back(flag);
        } else if (value != "false") {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

int dispatch(const RunConfig& config, const CommonArgs& common,
             const std::function<void(std::ostream&)>& body) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!common.output_path.empty()) {
        file.open(common.output_path, std::ios::binary);
        if (!file) {
            std::cerr << "invalid input: cannot open output file " << common.output_path
                      << '\n';
            return biphoton::kExitBadInput;
        }
        out = &file;
    }
    (void)config;
    return biphoton::run_command([&] { body(*out); }, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EPR-steering witness toolkit for spatial biphotons"};
    app.require_subcommand(1);

    RunConfig config;
    CommonArgs common;

    // witness
    auto* witness = app.add_subcommand("witness", "conditional variances and the witness w");
    add_common_options(witness, config, common);

    // sweep
    double p_min = 0.1, p_max = 3.0;
    int steps = 30;
    auto* sweep = app.add_subcommand("sweep", "w and K for both families on a p grid (csv)");
    add_common_options(sweep, config, common);
    sweep->add_option("--p-min", p_min, "lower end of the p grid")->capture_default_str();
    sweep->add_option("--p-max", p_max, "upper end of the p grid")->capture_default_str();
    sweep->add_option("--steps", steps, "number of grid rows")->capture_default_str();

    // interval
    auto* interval =
        app.add_subcommand("interval", "endpoints of the w > 1/4 violation window (json)");
    add_common_options(interval, config, common);

    // distribution
    std::string plane_name = "near";
    double fixed = 0.0, grid_halfwidth = 0.0;
    int n_points = 4096;
    bool with_aperture = false;
    auto* distribution =
        app.add_subcommand("distribution", "conditional coincidence distribution (csv)");
    add_common_options(distribution, config, common);
    distribution->add_option("--plane", plane_name, "near or far")
        ->check(CLI::IsMember({"near", "far"}))
        ->capture_default_str();
    distribution->add_option("--fixed", fixed, "fixed conjugate-arm position [m]")
        ->capture_default_str();
    distribution->add_option("--halfwidth", grid_halfwidth,
                             "grid half-width [m] (0 = auto)");
    distribution->add_option("--n", n_points, "grid points")->capture_default_str();
    distribution->add_flag("--aperture", with_aperture,
                           "convolve with the slit/fiber transmittance");

    // displace
    std::vector<double> z_values;
    double d_fixed = 0.0;
    int d_points = 0;
    auto* displace = app.add_subcommand(
        "displace", "near-field conditional for displaced imaged planes (csv)");
    add_common_options(displace, config, common);
    displace->add_option("--z", z_values, "imaged plane offsets from the crystal center [m]")
        ->required();
    displace->add_option("--fixed", d_fixed, "fixed conjugate-arm position [m]")
        ->capture_default_str();
    displace->add_option("--n", d_points, "grid points (0 = default 4096)");

    // simulate
    std::string sim_plane = "far";
    int n_positions = 81;
    std::int64_t peak_counts = 80, seed = 1;
    auto* simulate = app.add_subcommand("simulate", "synthetic Poisson coincidence scan");
    add_common_options(simulate, config, common);
    simulate->add_option("--plane", sim_plane, "near or far")
        ->check(CLI::IsMember({"near", "far"}))
        ->capture_default_str();
    simulate->add_option("--n-positions", n_positions, "scan positions")
        ->capture_default_str();
    simulate->add_option("--peak-counts", peak_counts, "expected counts at the peak")
        ->capture_default_str();
    simulate->add_option("--seed", seed, "rng seed")->capture_default_str();

    // fit
    std::string scan_path;
    auto* fit = app.add_subcommand("fit", "least-squares fit of a scan file (json)");
    add_common_options(fit, config, common);
    fit->add_option("scan", scan_path, "scan file path")->required();

    // reproduce-table2
    auto* table2 = app.add_subcommand(
        "reproduce-table2", "six-state table: measured variances, w, and theory w (csv)");
    add_common_options(table2, config, common);

    try {
        std::vector<std::string> args = merge_config_args(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : biphoton::kExitBadInput;
    }

    if (common.format.empty())
        common.format = witness->parsed() || interval->parsed() || fit->parsed() ? "json"
                                                                                 : "csv";
    config.format = common.format == "csv" ? biphoton::OutputFormat::Csv
                                           : biphoton::OutputFormat::Json;
    config.output_path = common.output_path;

    const auto plane_of = [](const std::string& name) {
        return name == "near" ? biphoton::ScanPlane::NearField
                              : biphoton::ScanPlane::FarField;
    };

    if (witness->parsed())
        return dispatch(config, common,
                        [&](std::ostream& out) { biphoton::cmd_witness(config, out); });
    if (sweep->parsed())
        return dispatch(config, common, [&](std::ostream& out) {
            biphoton::cmd_sweep(config, p_min, p_max, steps, out);
        });
    if (interval->parsed())
        return dispatch(config, common,
                        [&](std::ostream& out) { biphoton::cmd_interval(config, out); });
    if (distribution->parsed())
        return dispatch(config, common, [&](std::ostream& out) {
            biphoton::cmd_distribution(config, plane_of(plane_name), fixed, grid_halfwidth,
                                       n_points, with_aperture, out);
        });
    if (displace->parsed())
        return dispatch(config, common, [&](std::ostream& out) {
            biphoton::cmd_displace(config, z_values, d_fixed, d_points, out);
        });
    if (simulate->parsed())
        return dispatch(config, common, [&](std::ostream& out) {
            biphoton::cmd_simulate(config, plane_of(sim_plane), n_positions, peak_counts,
                                   seed, out);
        });
    if (fit->parsed())
        return dispatch(config, common,
                        [&](std::ostream& out) { biphoton::cmd_fit(config, scan_path, out); });
    if (table2->parsed())
        return dispatch(config, common, [&](std::ostream& out) {
            biphoton::cmd_reproduce_table2(config, out);
        });
    return biphoton::kExitBadInput;
}
