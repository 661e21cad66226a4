#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton/specfun.hpp"
#include "biphoton/states.hpp"

namespace biphoton {

// Thrown when more than the allowed probability mass lies outside a
// requested grid.
class TailBoundError : public std::runtime_error {
public:
    explicit TailBoundError(const std::string& what) : std::runtime_error(what) {}
};

// A normalized one-dimensional probability density sampled on a uniform grid.
// The axis is strictly increasing; the trapezoidal integral of `density`
// over `axis` is 1 to within 1e-8.
struct DensitySamples {
    std::vector<double> axis;     // m (Position) or 1/m (Momentum)
    std::vector<double> density;  // per unit coordinate
    Representation representation;
    double fixed_conjugate_value;

    // Trapezoidal moments of the stored samples.
    double trapezoid_integral() const;
    double mean() const;
    double variance() const;
};

// Conditional density of party 2's outcome given party 1 fixed at u1,
// proportional to |amplitude(u1, u2)|^2.  The grid is centered on the
// density's Gaussian-envelope center; normalization is computed with
// specfun::integrate and the samples carry a final trapezoid-consistency
// rescale so the DensitySamples invariant holds exactly.
//
// Throws TailBoundError if more than 1e-6 of the probability mass lies
// outside the grid.
DensitySamples conditional_density(const BiphotonState& state, Representation rep,
                                   double u1, double grid_halfwidth, int n_points,
                                   const QuadratureSpec& spec = {});

// As above with the grid auto-selected from the state's natural widths
// (half-width = truncation_radius_factor x envelope width, 4096 points).
DensitySamples conditional_density(const BiphotonState& state, Representation rep,
                                   double u1, const QuadratureSpec& spec = {});

// Auto grid half-width used by the overload above.
double conditional_grid_halfwidth(const BiphotonState& state, Representation rep,
                                  double u1, const QuadratureSpec& spec = {});

// Second central moment of the conditional distribution, by direct
// quadrature on the auto-selected domain.  Oscillatory SPDC integrands are
// subdivided at their sinc zeros / sint nodes.
double conditional_variance(const BiphotonState& state, Representation rep, double u1,
                            const QuadratureSpec& spec = {});

// Inferred variance: the marginal-weighted average of the conditional
// variances, by nested quadrature over u1.
double inferred_variance(const BiphotonState& state, Representation rep,
                         const QuadratureSpec& spec = {});

}  // namespace biphoton
