#pragma once

#include <Eigen/Core>
#include <vector>

#include "biphoton/states.hpp"

namespace biphoton {

struct SchmidtSpectrum {
    std::vector<double> coefficients;  // lambda_i, descending, sum to 1
    double schmidt_number_k;           // 1 / sum(lambda_i^2)
    int grid_points;
    double grid_halfwidth;
};

// Closed-form Schmidt number of the two-transverse-dimension Gaussian state,
// (1/4)(1/p + p)^2.
double k_gaussian_2d(double p);

// Per-transverse-direction factor, (1/2)(1/p + p); squares to k_gaussian_2d.
double k_gaussian_1d(double p);

// Momentum kernel sampled on an n x n grid over [-halfwidth, halfwidth]^2,
// scaled by the grid cell so singular values approximate the continuum ones.
// The OpenMP fill and the serial reference produce bit-identical matrices.
Eigen::MatrixXd kernel_matrix(const BiphotonState& state, int n, double halfwidth);
Eigen::MatrixXd kernel_matrix_ref(const BiphotonState& state, int n, double halfwidth);

// Grid half-width used when the caller does not supply one: the +/- envelope
// scales of the momentum kernel mapped back to single-photon coordinates.
double default_kernel_halfwidth(const BiphotonState& state);

// Schmidt coefficients by discretization and singular-value decomposition.
// Also computes the spectrum at n_points/2; throws NonConvergenceError when
// the two Schmidt numbers differ by more than 1e-3 relative (grid too coarse
// at the requested resolution).  grid_halfwidth <= 0 selects the default.
SchmidtSpectrum schmidt_spectrum(const BiphotonState& state, int n_points,
                                 double grid_halfwidth = 0.0);

}  // namespace biphoton
