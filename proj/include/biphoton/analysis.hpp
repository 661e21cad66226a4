#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biphoton/optics.hpp"
#include "biphoton/states.hpp"

namespace biphoton {

enum class ScanPlane { NearField, FarField };

// One conditional coincidence scan: arm 2 positions and counts with arm 1
// held at fixed_conjugate_position.
struct ScanData {
    std::vector<double> positions;  // m, strictly increasing
    std::vector<std::int64_t> counts;
    ScanPlane plane;
    double fixed_conjugate_position = 0.0;
    std::optional<std::int64_t> integration_seed;

    void validate() const;  // throws std::invalid_argument
};

struct FitResult {
    double variance;        // second moment of the fitted model, scan units (m^2)
    double variance_sigma;  // first-order uncertainty from the parameter covariance
    double amplitude;       // peak counts of the fitted model
    double center;          // m
    double residual_norm;   // ||residual|| / ||counts||, dimensionless
    bool converged;
};

struct ValueWithSigma {
    double value;
    double sigma;
};

enum class ErrorPropagation { LinearSum, Quadrature };

// Poisson sample with a portable, engine-stable algorithm (inversion for
// small means, transformed rejection for large ones).
std::int64_t poisson_sample(double mean, std::mt19937_64& rng);

// Synthetic scan: expected counts are peak_counts times the aperture-
// convolved model density relative to its peak, Poisson-sampled per
// position.  Positions span +-3 model widths.  Bit-identical for a fixed
// seed.
ScanData simulate_scan(const SpdcBiphoton& state, ScanPlane plane,
                       const DetectionGeometry& geometry, int n_positions,
                       std::int64_t peak_counts, std::int64_t seed,
                       const QuadratureSpec& spec = {});

// Least-squares fit of (amplitude, center, width-scale) of the plane-
// appropriate model shape to the counts.  The variance is the second moment
// of the fitted model; its uncertainty comes from the residual-scaled
// Jacobian covariance.  Never fabricates uncertainties on failure.
FitResult fit_scan(const ScanData& data, const SpdcBiphoton& state_template,
                   const QuadratureSpec& spec = {});

// w = var_q * var_x with the relative uncertainties combined linearly
// (default; matches how the bundled reference table was evaluated) or in
// quadrature.
ValueWithSigma propagate_witness_error(const ValueWithSigma& var_q,
                                       const ValueWithSigma& var_x,
                                       ErrorPropagation mode = ErrorPropagation::LinearSum);

// Scan file format: '#'-prefixed metadata lines (plane, fixed, seed), a
// 'position_m,counts' header, one comma-separated row per position.
std::string scan_to_string(const ScanData& data);
ScanData parse_scan(std::istream& in);
void write_scan_file(const ScanData& data, const std::string& path);
ScanData read_scan_file(const std::string& path);

// Bundled reference measurements for the six benchmark states: conditional
// variances at both planes with their quoted uncertainties.
struct MeasuredVariances {
    double p;
    ValueWithSigma var_x;  // m^2
    ValueWithSigma var_q;  // 1/m^2
};
std::span<const MeasuredVariances> reference_measured_variances();

}  // namespace biphoton
