#include "biphoton/optics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace biphoton {

double far_field_map(double x, const DetectionGeometry& geometry, double k) {
    return k * x / geometry.focal_length_fq;
}

namespace {

// Shared assembly: sample f over [center-hw, center+hw], normalize by the
// quadrature integral, verify the Gaussian-envelope tail bound, then apply
// the trapezoid-consistency rescale required by the DensitySamples contract.
DensitySamples build_density(const std::function<double(double)>& f, double center,
                             double halfwidth, int n_points, double env_center,
                             double env_sigma, std::span<const double> breakpoints,
                             const QuadratureSpec& spec, Representation rep,
                             double fixed_value, double env_scale = 1.0) {
    if (n_points < 64)
        throw std::invalid_argument("density grid: n_points must be >= 64");
    if (!(halfwidth > 0.0))
        throw std::invalid_argument("density grid: halfwidth must be positive");
    const double lo = center - halfwidth, hi = center + halfwidth;
    const double z = integrate(f, lo, hi, spec, breakpoints);
    if (!(z > 0.0)) throw NonConvergenceError("density grid: vanishing normalization");

    const double outside = env_scale *
                           (gaussian_tail_mass(env_sigma, std::max(env_center - lo, 0.0)) +
                            gaussian_tail_mass(env_sigma, std::max(hi - env_center, 0.0))) /
                           z;
    if (outside > 1e-6)
        throw TailBoundError("density grid: > 1e-6 of probability mass outside grid");

    DensitySamples out;
    out.representation = rep;
    out.fixed_conjugate_value = fixed_value;
    out.axis.resize(n_points);
    out.density.resize(n_points);
    const double h = (hi - lo) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        out.axis[i] = lo + i * h;
        out.density[i] = f(out.axis[i]) / z;
    }
    const double t = out.trapezoid_integral();
    for (double& d : out.density) d /= t;
    return out;
}

}  // namespace

DensitySamples far_field_coincidence(const SpdcBiphoton& state,
                                     const DetectionGeometry& geometry, double x1,
                                     double grid_halfwidth, int n_points,
                                     const QuadratureSpec& spec) {
    const double scale = state.wavenumber_k / geometry.focal_length_fq;  // q per x
    const BiphotonState s{state};
    const auto f = [&](double x2) {
        const double a = momentum_amplitude(s, scale * x1, scale * x2);
        return a * a;
    };
    // Pump-envelope parameters and sinc zeros mapped into slit coordinates.
    const double env_sigma = 1.0 / (state.pump_waist_c * scale);
    const double b = state.b();
    std::vector<double> bps{x1};
    const double dmax = std::abs(grid_halfwidth) + std::abs(x1) + env_sigma;
    const int nmax = static_cast<int>(b * scale * scale * dmax * dmax / M_PI) + 1;
    for (int n = 1; n <= nmax; ++n) {
        const double d = std::sqrt(n * M_PI / b) / scale;
        bps.push_back(x1 - d);
        bps.push_back(x1 + d);
    }
    return build_density(f, -x1, grid_halfwidth, n_points, -x1, env_sigma, bps, spec,
                         Representation::Position, x1);
}

DensitySamples far_field_coincidence(const SpdcBiphoton& state,
                                     const DetectionGeometry& geometry, double x1,
                                     const QuadratureSpec& spec) {
    const double scale = state.wavenumber_k / geometry.focal_length_fq;
    const double env_sigma = 1.0 / (state.pump_waist_c * scale);
    return far_field_coincidence(state, geometry, x1,
                                 spec.truncation_radius_factor * env_sigma, 4096, spec);
}

DensitySamples near_field_coincidence(const SpdcBiphoton& state, double x1,
                                      double grid_halfwidth, int n_points,
                                      const QuadratureSpec& spec) {
    return conditional_density(BiphotonState{state}, Representation::Position, x1,
                               grid_halfwidth, n_points, spec);
}

DensitySamples near_field_coincidence(const SpdcBiphoton& state, double x1,
                                      const QuadratureSpec& spec) {
    return conditional_density(BiphotonState{state}, Representation::Position, x1, spec);
}

DensitySamples aperture_convolve(const DensitySamples& density, double aperture_width) {
    if (aperture_width < 0.0)
        throw std::invalid_argument("aperture_convolve: width must be >= 0");
    if (aperture_width == 0.0 || density.axis.size() < 2) return density;

    const double h = density.axis[1] - density.axis[0];
    const double w = aperture_width;
    // Discrete top-hat kernel with fractional edge bins; sums to exactly 1.
    const int m = static_cast<int>(std::ceil((0.5 * w + 0.5 * h) / h));
    std::vector<double> kernel(2 * m + 1, 0.0);
    for (int j = -m; j <= m; ++j) {
        const double lo = std::max(j * h - 0.5 * h, -0.5 * w);
        const double hi = std::min(j * h + 0.5 * h, 0.5 * w);
        kernel[j + m] = std::max(hi - lo, 0.0) / w;
    }

    DensitySamples out = density;
    const int n = static_cast<int>(density.density.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = -m; j <= m; ++j) {
            const int src = i - j;
            if (src >= 0 && src < n) acc += kernel[j + m] * density.density[src];
        }
        out.density[i] = acc;
    }
    const double t = out.trapezoid_integral();
    for (double& d : out.density) d /= t;
    return out;
}

std::complex<double> displaced_pm_position_factor(double u, double tau) {
    const bool conjugate = tau < 0.0;
    tau = std::abs(tau);
    if (!(u >= 0.0)) throw std::invalid_argument("displaced_pm_position_factor: u >= 0");

    std::complex<double> g;
    if (u == 0.0) {
        if (tau == 1.0) {
            // Logarithmic divergence at the crystal face; callers clamp u.
            g = {std::numeric_limits<double>::infinity(), 0.0};
        } else if (tau < 1.0) {
            g = {0.5 * M_PI, -0.5 * std::log((1.0 + tau) / (1.0 - tau))};
        } else {
            g = {0.0, -0.5 * std::log((tau + 1.0) / (tau - 1.0))};
        }
    } else {
        const double a2 = u / (1.0 + tau);
        const double si2 = sine_integral(a2);
        const double ci2 = cosine_integral(a2);
        if (tau < 1.0) {
            const double a1 = u / (1.0 - tau);
            g = {0.5 * (M_PI - sine_integral(a1) - si2),
                 -0.5 * (cosine_integral(a1) - ci2)};
        } else if (tau == 1.0) {
            const double sh = sine_integral(0.5 * u);
            g = {0.5 * (0.5 * M_PI - sh), 0.5 * cosine_integral(0.5 * u)};
        } else {
            const double al = u / (tau - 1.0);
            g = {0.5 * (sine_integral(al) - si2), -0.5 * (cosine_integral(al) - ci2)};
        }
    }
    return conjugate ? std::conj(g) : g;
}

DensitySamples displaced_near_field(const SpdcBiphoton& state, double z, double x1,
                                    double grid_halfwidth, int n_points,
                                    const QuadratureSpec& spec) {
    const double L = state.crystal_length_L;
    if (!(std::abs(z) <= L))
        throw std::invalid_argument("displaced_near_field: requires |z| <= L");

    const double c = state.pump_waist_c;
    const double k = state.wavenumber_k;
    const double b = state.b();
    const double tau = z / (4.0 * k * b);

    // Pump factor with the propagation phase absorbed: a complex-Gaussian
    // transform, |envelope|^2 = exp(-(x1+x2)^2 / (2 sigma_p^2)).
    const double sigma_p = std::sqrt(c * c * c * c + (z / k) * (z / k)) / c;
    // At the face (|tau| = 1) the correlation diverges logarithmically at
    // x2 = x1; clamp the scaled argument at a physically negligible floor so
    // sampled values stay finite.  The clamp region is ~1e-6 grid cells wide.
    const double u_floor = std::abs(std::abs(tau) - 1.0) < 1e-14 ? 1e-12 : 0.0;
    const auto rho = [&](double x2) {
        const double xm = 0.5 * (x1 - x2);
        const double u = std::max(xm * xm / (4.0 * b), u_floor);
        const double xp2 = (x1 + x2) * (x1 + x2);
        return std::exp(-xp2 / (2.0 * sigma_p * sigma_p)) *
               std::norm(displaced_pm_position_factor(u, tau));
    };

    // Oscillation nodes of the displaced factor: the faster of the two phase
    // rates (1 +- |tau|) sets the node spacing in u.
    std::vector<double> bps{x1};
    const double rate = 1.0 + std::abs(tau);
    const double dmax = grid_halfwidth + std::abs(x1);
    const int nmax = static_cast<int>(rate * dmax * dmax / (16.0 * b * M_PI)) + 1;
    for (int n = 0; n <= nmax; ++n) {
        const double d = 4.0 * std::sqrt(b * (M_PI / 2.0 + n * M_PI) / rate);
        bps.push_back(x1 - d);
        bps.push_back(x1 + d);
    }
    // |g|^2 is not bounded by 1, so the pump-envelope tail bound carries the
    // displaced-factor magnitude at the grid edge.
    const double u_edge = grid_halfwidth * grid_halfwidth / (16.0 * b);
    const double edge_g2 = std::norm(displaced_pm_position_factor(std::max(u_edge, u_floor), tau));
    return build_density(rho, -x1, grid_halfwidth, n_points, -x1, sigma_p, bps, spec,
                         Representation::Position, x1, std::max(1.0, 4.0 * edge_g2));
}

double displaced_grid_halfwidth(const SpdcBiphoton& state, double z,
                                const QuadratureSpec& spec) {
    const double c = state.pump_waist_c;
    const double k = state.wavenumber_k;
    const double sigma_p = std::sqrt(c * c * c * c + (z / k) * (z / k)) / c;
    const double b = state.b();
    const double tau = z / (4.0 * k * b);
    return std::max(spec.truncation_radius_factor * sigma_p,
                    8.0 * std::sqrt(b * (1.0 + std::abs(tau))));
}

DensitySamples displaced_near_field(const SpdcBiphoton& state, double z, double x1,
                                    const QuadratureSpec& spec) {
    return displaced_near_field(state, z, x1, displaced_grid_halfwidth(state, z, spec),
                                4096, spec);
}

}  // namespace biphoton
