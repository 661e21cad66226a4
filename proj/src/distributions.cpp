#include "biphoton/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace biphoton {

namespace {

// Gaussian-envelope parameters of the conditional density in u2 at fixed u1:
// the density is bounded pointwise by exp(-(u2 - center)^2 / (2 sigma^2)).
struct Envelope {
    double center;
    double sigma;
};

Envelope conditional_envelope(const BiphotonState& state, Representation rep, double u1) {
    if (const auto* g = std::get_if<GaussianBiphoton>(&state)) {
        const double sp2 = g->sigma_plus * g->sigma_plus;
        const double sm2 = g->sigma_minus * g->sigma_minus;
        if (rep == Representation::Momentum) {
            // |A|^2 = exp(-(u2+u1)^2/(2 sp^2) - (u2-u1)^2/(2 sm^2))
            const double a = 1.0 / (2.0 * sp2), b = 1.0 / (2.0 * sm2);
            return {u1 * (b - a) / (a + b), std::sqrt(0.5 / (a + b))};
        }
        // |psi|^2 = exp(-sp^2 (u2+u1)^2/2 - sm^2 (u2-u1)^2/2)
        return {u1 * (sm2 - sp2) / (sp2 + sm2), 1.0 / std::sqrt(sp2 + sm2)};
    }
    const auto& s = std::get<SpdcBiphoton>(state);
    const double c = s.pump_waist_c;
    if (rep == Representation::Momentum) return {-u1, 1.0 / c};  // pump factor
    return {-u1, c};
}

// Subdivision points of the oscillatory factor of |amplitude(u1, .)|^2.
std::vector<double> oscillation_breakpoints(const BiphotonState& state, Representation rep,
                                            double u1, double lo, double hi) {
    std::vector<double> pts;
    const auto* s = std::get_if<SpdcBiphoton>(&state);
    if (!s) return pts;
    const double b = s->b();
    pts.push_back(u1);  // ridge of the difference-coordinate factor
    if (rep == Representation::Momentum) {
        // sinc(b (u1-u2)^2) zeros at |u1-u2| = sqrt(n pi / b)
        const double dmax = std::max(std::abs(lo - u1), std::abs(hi - u1));
        const int nmax = static_cast<int>(b * dmax * dmax / M_PI) + 1;
        for (int n = 1; n <= nmax; ++n) {
            const double d = std::sqrt(n * M_PI / b);
            pts.push_back(u1 - d);
            pts.push_back(u1 + d);
        }
    } else {
        // sint((u1-u2)^2/(16 b)) oscillation nodes near pi/2 + n pi
        const double dmax = std::max(std::abs(lo - u1), std::abs(hi - u1));
        const int nmax = static_cast<int>(dmax * dmax / (16.0 * b * M_PI)) + 1;
        for (int n = 0; n <= nmax; ++n) {
            const double d = 4.0 * std::sqrt(b * (M_PI / 2.0 + n * M_PI));
            pts.push_back(u1 - d);
            pts.push_back(u1 + d);
        }
    }
    return pts;
}

double density_value(const BiphotonState& state, Representation rep, double u1, double u2) {
    const double a = rep == Representation::Momentum ? momentum_amplitude(state, u1, u2)
                                                     : position_amplitude(state, u1, u2);
    return a * a;
}

struct ConditionalMoments {
    double norm;      // integral of |amplitude|^2 over the domain
    double mean;
    double variance;
    double lo, hi;
};

ConditionalMoments conditional_moments(const BiphotonState& state, Representation rep,
                                       double u1, const Envelope& env, double halfwidth,
                                       const QuadratureSpec& spec) {
    const double lo = env.center - halfwidth, hi = env.center + halfwidth;
    const auto f = [&](double u2) { return density_value(state, rep, u1, u2); };
    const auto bps = oscillation_breakpoints(state, rep, u1, lo, hi);
    const double z = integrate(f, lo, hi, spec, bps);
    if (!(z > 0.0))
        throw NonConvergenceError("conditional density: vanishing normalization");

    // The mean integral of a symmetric density is exactly zero; an absolute
    // tolerance only makes sense against the moment's natural scale.
    QuadratureSpec mspec = spec;
    mspec.absolute_tolerance = spec.relative_tolerance * z * env.sigma;
    const double m1 =
        integrate([&](double u2) { return (u2 - env.center) * f(u2); }, lo, hi, mspec, bps) / z +
        env.center;
    mspec.absolute_tolerance = spec.relative_tolerance * z * env.sigma * env.sigma;
    const double m2 = integrate([&](double u2) { return (u2 - m1) * (u2 - m1) * f(u2); },
                                lo, hi, mspec, bps) / z;
    return {z, m1, m2, lo, hi};
}

void check_tail_bound(const BiphotonState& state, Representation rep, double u1,
                      double lo, double hi, double norm) {
    const Envelope env = conditional_envelope(state, rep, u1);
    // density <= envelope pointwise (the oscillatory factor has modulus <= 1)
    const double left = gaussian_tail_mass(env.sigma, std::max(env.center - lo, 0.0));
    const double right = gaussian_tail_mass(env.sigma, std::max(hi - env.center, 0.0));
    const double outside = (left + right) / norm;
    if (outside > 1e-6)
        throw TailBoundError("conditional density: > 1e-6 of probability mass outside grid");
}

}  // namespace

double DensitySamples::trapezoid_integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < axis.size(); ++i)
        s += 0.5 * (density[i] + density[i + 1]) * (axis[i + 1] - axis[i]);
    return s;
}

double DensitySamples::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < axis.size(); ++i)
        s += 0.5 * (axis[i] * density[i] + axis[i + 1] * density[i + 1]) *
             (axis[i + 1] - axis[i]);
    return s / trapezoid_integral();
}

double DensitySamples::variance() const {
    const double mu = mean();
    double s = 0.0;
    auto g = [&](std::size_t i) {
        return (axis[i] - mu) * (axis[i] - mu) * density[i];
    };
    for (std::size_t i = 0; i + 1 < axis.size(); ++i)
        s += 0.5 * (g(i) + g(i + 1)) * (axis[i + 1] - axis[i]);
    return s / trapezoid_integral();
}

DensitySamples conditional_density(const BiphotonState& state, Representation rep,
                                   double u1, double grid_halfwidth, int n_points,
                                   const QuadratureSpec& spec) {
    if (n_points < 64)
        throw std::invalid_argument("conditional_density: n_points must be >= 64");
    if (!(grid_halfwidth > 0.0))
        throw std::invalid_argument("conditional_density: grid_halfwidth must be positive");

    const Envelope env = conditional_envelope(state, rep, u1);
    const double lo = env.center - grid_halfwidth;
    const double hi = env.center + grid_halfwidth;

    const auto f = [&](double u2) { return density_value(state, rep, u1, u2); };
    const auto bps = oscillation_breakpoints(state, rep, u1, lo, hi);
    const double z = integrate(f, lo, hi, spec, bps);
    if (!(z > 0.0))
        throw NonConvergenceError("conditional_density: vanishing normalization");
    check_tail_bound(state, rep, u1, lo, hi, z);

    DensitySamples out;
    out.representation = rep;
    out.fixed_conjugate_value = u1;
    out.axis.resize(n_points);
    out.density.resize(n_points);
    const double h = (hi - lo) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        out.axis[i] = lo + i * h;
        out.density[i] = f(out.axis[i]) / z;
    }
    // Trapezoid-consistency rescale; a no-op (1 +- <1e-8) for smooth densities.
    const double t = out.trapezoid_integral();
    for (double& d : out.density) d /= t;
    return out;
}

double conditional_grid_halfwidth(const BiphotonState& state, Representation rep,
                                  double u1, const QuadratureSpec& spec) {
    return spec.truncation_radius_factor * conditional_envelope(state, rep, u1).sigma;
}

DensitySamples conditional_density(const BiphotonState& state, Representation rep,
                                   double u1, const QuadratureSpec& spec) {
    return conditional_density(state, rep, u1,
                               conditional_grid_halfwidth(state, rep, u1, spec), 4096, spec);
}

double conditional_variance(const BiphotonState& state, Representation rep, double u1,
                            const QuadratureSpec& spec) {
    const Envelope env = conditional_envelope(state, rep, u1);
    const double r = spec.truncation_radius_factor * env.sigma;
    const auto m = conditional_moments(state, rep, u1, env, r, spec);
    check_tail_bound(state, rep, u1, m.lo, m.hi, m.norm);
    return m.variance;
}

double inferred_variance(const BiphotonState& state, Representation rep,
                         const QuadratureSpec& spec) {
    // Outer range: the marginal of u1 spreads over both +/- coordinate scales.
    const CoordinateWidths cw = coordinate_widths(state, rep);
    const double r1 = spec.truncation_radius_factor * 0.5 * (cw.sum_width + cw.diff_width);

    // Inner conditional moments are already at the requested tolerance; keep
    // the outer pass one order looser so the nesting cost stays bounded.
    QuadratureSpec outer = spec;
    outer.relative_tolerance = std::max(spec.relative_tolerance * 10.0, 1e-8);

    const double rin = spec.truncation_radius_factor *
                       conditional_envelope(state, rep, 0.0).sigma;
    const auto inner = [&](double u1) {
        const Envelope e = conditional_envelope(state, rep, u1);
        return conditional_moments(state, rep, u1, e, rin, spec);
    };
    const double num = integrate(
        [&](double u1) { const auto m = inner(u1); return m.norm * m.variance; },
        -r1, r1, outer);
    const double den = integrate([&](double u1) { return inner(u1).norm; }, -r1, r1, outer);
    if (!(den > 0.0))
        throw NonConvergenceError("inferred_variance: vanishing marginal normalization");
    return num / den;
}

}  // namespace biphoton
