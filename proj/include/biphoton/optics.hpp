#pragma once

#include <complex>

#include "biphoton/distributions.hpp"
#include "biphoton/states.hpp"

namespace biphoton {

struct DetectionGeometry {
    double focal_length_fq;       // far-field lens focal length, m
    double slit_width;            // far-field scanning slit, m
    double fiber_core_diameter;   // near-field collection fiber, m

    DetectionGeometry(double f, double slit, double fiber)
        : focal_length_fq(f), slit_width(slit), fiber_core_diameter(fiber) {
        if (!(f > 0.0) || !(slit > 0.0) || !(fiber > 0.0))
            throw std::invalid_argument("DetectionGeometry: parameters must be positive");
    }
};

// Far-field lens mapping q = k x / f_q.
double far_field_map(double x, const DetectionGeometry& geometry, double k);

// Coincidence rate at the far-field plane while arm 2 scans x2 and arm 1 is
// fixed at x1; the momentum conditional re-expressed via q = k x / f_q.
DensitySamples far_field_coincidence(const SpdcBiphoton& state,
                                     const DetectionGeometry& geometry, double x1,
                                     double grid_halfwidth, int n_points,
                                     const QuadratureSpec& spec = {});
DensitySamples far_field_coincidence(const SpdcBiphoton& state,
                                     const DetectionGeometry& geometry, double x1,
                                     const QuadratureSpec& spec = {});

// Coincidence rate at the image of the crystal center, in crystal-plane
// coordinates (the position conditional).
DensitySamples near_field_coincidence(const SpdcBiphoton& state, double x1,
                                      double grid_halfwidth, int n_points,
                                      const QuadratureSpec& spec = {});
DensitySamples near_field_coincidence(const SpdcBiphoton& state, double x1,
                                      const QuadratureSpec& spec = {});

// Convolution with a unit-area top-hat of the given width, renormalized on
// the original axis.  Width 0 returns the input unchanged.
DensitySamples aperture_convolve(const DensitySamples& density, double aperture_width);

// Position-representation factor of the phase-matching term when the imaged
// plane sits a distance z from the crystal center, in the scaled variables
// u = x^2/(4b) and tau = z/(4kb):
//
//   g(u, tau) = int_0^inf J0(2 sqrt(u t)) sinc(t) exp(-i tau t) dt,
//
// evaluated in closed form through Si and Ci.  g(u, 0) = (pi/2) sint(u);
// |g|^2 is even in tau and diverges logarithmically at u -> 0 for |tau| = 1
// (the crystal face).
std::complex<double> displaced_pm_position_factor(double u, double tau);

// Near-field conditional with the imaged plane displaced by z from the
// crystal center; the quadratic propagation phase acts on both photons.
// Requires |z| <= L.  z = 0 reproduces near_field_coincidence.
DensitySamples displaced_near_field(const SpdcBiphoton& state, double z, double x1,
                                    double grid_halfwidth, int n_points,
                                    const QuadratureSpec& spec = {});
DensitySamples displaced_near_field(const SpdcBiphoton& state, double z, double x1,
                                    const QuadratureSpec& spec = {});

// Auto grid half-width used by the overload above: wide enough for the
// displaced pump envelope and the displaced-factor lobe.
double displaced_grid_halfwidth(const SpdcBiphoton& state, double z,
                                const QuadratureSpec& spec = {});

}  // namespace biphoton
