#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>

namespace biphoton {

// Pure two-mode Gaussian state, one transverse dimension.  The momentum
// amplitude is exp(-(q1+q2)^2/(4 sigma_plus^2)) exp(-(q1-q2)^2/(4 sigma_minus^2)).
struct GaussianBiphoton {
    double sigma_plus;   // width of the symmetric (+) Gaussian factor, 1/m
    double sigma_minus;  // width of the antisymmetric (-) factor, 1/m

    GaussianBiphoton(double sp, double sm) : sigma_plus(sp), sigma_minus(sm) {
        if (!(sp > 0.0) || !(sm > 0.0))
            throw std::invalid_argument("GaussianBiphoton: widths must be positive");
    }
};

// Collinear degenerate SPDC spatial biphoton: Gaussian pump envelope times
// the sinc phase-matching factor.
struct SpdcBiphoton {
    double pump_waist_c;      // pump beam radius at the crystal plane, m
    double crystal_length_L;  // m
    double wavenumber_k;      // down-converted photon wavenumber, 1/m

    SpdcBiphoton(double c, double L, double k)
        : pump_waist_c(c), crystal_length_L(L), wavenumber_k(k) {
        if (!(c > 0.0) || !(L > 0.0) || !(k > 0.0))
            throw std::invalid_argument("SpdcBiphoton: parameters must be positive");
    }

    // Phase-matching scale: the momentum amplitude carries sinc(b (q1-q2)^2).
    double b() const { return crystal_length_L / (8.0 * wavenumber_k); }

    // The single dimensionless knob: p = (1/c) sqrt(L / (2k)).
    double p() const {
        return std::sqrt(crystal_length_L / (2.0 * wavenumber_k)) / pump_waist_c;
    }
};

using BiphotonState = std::variant<GaussianBiphoton, SpdcBiphoton>;

enum class Representation { Momentum, Position };

// Builds the SPDC state from bench quantities; k = 2 pi / lambda with the
// vacuum wavelength of the down-converted photons.
SpdcBiphoton spdc_from_experiment(double pump_waist_c, double crystal_length_L,
                                  double lambda_vacuum);

// sigma_plus/sigma_minus for Gaussian states, (1/c) sqrt(L/(2k)) for SPDC.
double p_param(const BiphotonState& state);

// Unnormalized real amplitudes, unity at the origin.  The SPDC forms are the
// two-dimensional kernels evaluated at zero orthogonal transverse coordinate.
double momentum_amplitude(const BiphotonState& state, double q1, double q2);
double position_amplitude(const BiphotonState& state, double x1, double x2);

// Envelope scales of the kernel's +/- coordinates (u = q1+q2, w = q1-q2 in
// momentum; the conjugate pair in position).  Gaussian factors report their
// standard deviation; the sinc/sint factors report their first-zero scale.
struct CoordinateWidths {
    double sum_width;
    double diff_width;
};
CoordinateWidths coordinate_widths(const BiphotonState& state, Representation rep);

}  // namespace biphoton
