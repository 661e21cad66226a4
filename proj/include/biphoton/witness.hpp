#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biphoton/distributions.hpp"
#include "biphoton/states.hpp"

namespace biphoton {

// Upper bound of the conditional-variance product for pure bipartite
// Gaussian states with the x/q observable pair.  Referenced everywhere the
// verdict is taken; never inlined as a literal.
inline constexpr double kGaussianWitnessBound = 0.25;

struct WitnessResult {
    double p;
    double var_q_given_0;  // 1/m^2
    double var_x_given_0;  // m^2
    double w;              // product of the two, dimensionless
    std::optional<double> w_uncertainty;
    bool gaussian_bound_violated;  // w > kGaussianWitnessBound
};

// W = var(q2 | q1 = 0) * var(x2 | x1 = 0).  Gaussian states use the closed
// forms sp^2 sm^2/(sp^2+sm^2) and 1/(sp^2+sm^2); SPDC states are integrated
// numerically.
WitnessResult evaluate_witness(const BiphotonState& state, const QuadratureSpec& spec = {});

enum class StateFamily { Gaussian, Spdc };

// One state family at fixed (L, lambda), parameterized by p alone.  For the
// Gaussian family sigma_minus is held at 1 (K and W are scale-free).
BiphotonState family_state(StateFamily family, double p, double crystal_length_L,
                           double lambda_vacuum);

struct SweepRow {
    double p;
    double k_1d;
    double w;
    bool ok;
    std::string error;  // non-empty when ok is false
};

struct SweepOptions {
    double crystal_length_L = 1.8e-2;
    double lambda_vacuum = 710e-9;
    int schmidt_points = 512;  // resolution of the SVD Schmidt number
    QuadratureSpec quad;
};

// Witness and per-direction Schmidt number on a uniform p grid.  Rows are
// independent and run under OpenMP; output order and values are identical to
// sweep_ref for any thread count.  Per-row failures are recorded in the row
// and the sweep continues.
std::vector<SweepRow> sweep(StateFamily family, double p_min, double p_max, int steps,
                            const SweepOptions& opts = {});
// Serial reference implementation, kept for testing and benchmarks.
std::vector<SweepRow> sweep_ref(StateFamily family, double p_min, double p_max, int steps,
                                const SweepOptions& opts = {});

// Endpoints of the w(p) > 1/4 window, by coarse bracketing on [0.05, 5]
// (0.05 step) and bisection to 1e-3 in p.  Empty when w - 1/4 never changes
// sign (the Gaussian family).
std::optional<std::pair<double, double>> violation_interval(StateFamily family,
                                                            const SweepOptions& opts = {});

}  // namespace biphoton
