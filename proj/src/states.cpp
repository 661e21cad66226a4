#include "biphoton/states.hpp"

#include <cmath>

#include "biphoton/specfun.hpp"

namespace biphoton {

namespace {
// First zero of sint(t): Si(t) = pi/2.
constexpr double kSintFirstZero = 1.9264476603173706;
}  // namespace

SpdcBiphoton spdc_from_experiment(double pump_waist_c, double crystal_length_L,
                                  double lambda_vacuum) {
    if (!(lambda_vacuum > 0.0))
        throw std::invalid_argument("spdc_from_experiment: wavelength must be positive");
    return SpdcBiphoton(pump_waist_c, crystal_length_L, 2.0 * M_PI / lambda_vacuum);
}

double p_param(const BiphotonState& state) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianBiphoton>)
                return s.sigma_plus / s.sigma_minus;
            else
                return s.p();
        },
        state);
}

double momentum_amplitude(const BiphotonState& state, double q1, double q2) {
    const double u = q1 + q2;
    const double w = q1 - q2;
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianBiphoton>) {
                return std::exp(-u * u / (4.0 * s.sigma_plus * s.sigma_plus)
                                - w * w / (4.0 * s.sigma_minus * s.sigma_minus));
            } else {
                const double c = s.pump_waist_c;
                return std::exp(-c * c * u * u / 4.0) * sinc(s.b() * w * w);
            }
        },
        state);
}

double position_amplitude(const BiphotonState& state, double x1, double x2) {
    const double xp = 0.5 * (x1 + x2);
    const double xm = 0.5 * (x1 - x2);
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianBiphoton>) {
                const double sp2 = s.sigma_plus * s.sigma_plus;
                const double sm2 = s.sigma_minus * s.sigma_minus;
                return std::exp(-sp2 * xp * xp - sm2 * xm * xm);
            } else {
                const double c = s.pump_waist_c;
                return std::exp(-xp * xp / (c * c)) * sint(xm * xm / (4.0 * s.b()));
            }
        },
        state);
}

CoordinateWidths coordinate_widths(const BiphotonState& state, Representation rep) {
    return std::visit(
        [&](const auto& s) -> CoordinateWidths {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianBiphoton>) {
                if (rep == Representation::Momentum)
                    return {M_SQRT2 * s.sigma_plus, M_SQRT2 * s.sigma_minus};
                return {M_SQRT2 / s.sigma_plus, M_SQRT2 / s.sigma_minus};
            } else {
                const double c = s.pump_waist_c;
                const double b = s.b();
                if (rep == Representation::Momentum)
                    return {M_SQRT2 / c, std::sqrt(M_PI / b)};
                return {M_SQRT2 * c, 4.0 * std::sqrt(b * kSintFirstZero)};
            }
        },
        state);
}

}  // namespace biphoton
