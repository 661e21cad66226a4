#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biphoton/analysis.hpp"
#include "biphoton/witness.hpp"

namespace biphoton {

enum class OutputFormat { Csv, Json };

// Exit-code contract shared by every subcommand:
//   0 success, 2 invalid input/config, 3 numerical non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
    bool gaussian_family = false;
    std::optional<double> pump_waist_c;  // m; exactly one of c / p
    std::optional<double> p_value;
    double crystal_length_L = 1.8e-2;    // m
    double vacuum_wavelength = 710e-9;   // m

    double focal_length_fq = 0.15;       // m
    double slit_width = 50e-6;           // m
    double fiber_core_diameter = 4.7e-6; // m

    QuadratureSpec quad;
    int schmidt_points = 512;
    OutputFormat format = OutputFormat::Json;
    std::string output_path;  // empty writes to stdout
    std::string config_path;  // merged by the launcher; recorded for reference
};

// Validates the family/parameter combination and builds the state.
BiphotonState make_state(const RunConfig& config);
DetectionGeometry make_geometry(const RunConfig& config);

// Subcommand bodies.  They write the artifact to `out` and throw on error;
// run_command translates exceptions into the exit-code contract.
void cmd_witness(const RunConfig& config, std::ostream& out);
void cmd_sweep(const RunConfig& config, double p_min, double p_max, int steps,
               std::ostream& out);
void cmd_interval(const RunConfig& config, std::ostream& out);
void cmd_distribution(const RunConfig& config, ScanPlane plane, double fixed,
                      double grid_halfwidth, int n_points, bool with_aperture,
                      std::ostream& out);
void cmd_displace(const RunConfig& config, const std::vector<double>& z_values,
                  double fixed, int n_points, std::ostream& out);
void cmd_simulate(const RunConfig& config, ScanPlane plane, int n_positions,
                  std::int64_t peak_counts, std::int64_t seed, std::ostream& out);
void cmd_fit(const RunConfig& config, const std::string& scan_path, std::ostream& out);
void cmd_reproduce_table2(const RunConfig& config, std::ostream& out);

// Runs a command body and maps exceptions to exit codes (messages to `err`).
int run_command(const std::function<void()>& body, std::ostream& err);

}  // namespace biphoton
