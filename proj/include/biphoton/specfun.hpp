#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace biphoton {

// Thrown when an adaptive algorithm exhausts its budget before reaching
// the requested tolerance.
class NonConvergenceError : public std::runtime_error {
public:
    explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// sinc(x) = sin(x)/x, with sinc(0) = 1.
double sinc(double x);

// Sine integral Si(x) = int_0^x sinc(t) dt.  Odd in x.
// Power series below the crossover, complex continued fraction for the
// exponential integral E1(ix) above it; both agree to ~1e-15 at the seam.
double sine_integral(double x);

// Cosine integral Ci(x) = gamma + ln(x) + int_0^x (cos t - 1)/t dt, x > 0.
double cosine_integral(double x);

// sint(x) = 1 - (2/pi) Si(x).  Decays like (2/pi) cos(x)/x for large x.
double sint(double x);

// Tail mass of a unit-height Gaussian envelope exp(-t^2 / (2 sigma^2))
// beyond |t| > r on one side: int_r^inf exp(-t^2/(2 sigma^2)) dt.
double gaussian_tail_mass(double sigma, double r);

struct QuadratureSpec {
    double relative_tolerance = 1e-9;
    double absolute_tolerance = 1e-12;
    int max_subdivisions = 10000;
    // Domain cutoff for improper integrals, as a multiple of the
    // integrand's natural width (supplied by the caller).
    double truncation_radius_factor = 10.0;
};

// Deterministic adaptive quadrature of f over [lo, hi].
//
// Gauss-Kronrod 7-15 panels, worst-error-first bisection.  Initial panel
// boundaries are seeded at `breakpoints` (integrand zeros or oscillation
// nodes supplied by the caller); values outside (lo, hi) are ignored.
// Re-running with identical inputs gives bit-identical results.
//
// Throws NonConvergenceError if the subdivision budget is exhausted.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec = {},
                 std::span<const double> breakpoints = {});

}  // namespace biphoton
