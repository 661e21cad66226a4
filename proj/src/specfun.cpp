#include "biphoton/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace biphoton {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

// Si and Cin power series, adequate to full double precision for x <= 4.
double si_series(double x) {
    double p = x;        // (-1)^n x^(2n+1) / (2n+1)!
    double sum = x;
    for (int n = 1; n <= 60; ++n) {
        p *= -x * x / ((2.0 * n) * (2.0 * n + 1.0));
        const double term = p / (2.0 * n + 1.0);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double cin_series(double x) {
    double q = 0.5 * x * x;  // (-1)^(n+1) x^(2n) / (2n)!
    double sum = q / 2.0;
    for (int n = 2; n <= 60; ++n) {
        q *= -x * x / ((2.0 * n - 1.0) * (2.0 * n));
        const double term = q / (2.0 * n);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// E1(ix) for x > 0 by the modified-Lentz continued fraction.
// E1(ix) = -Ci(x) + i (Si(x) - pi/2).
std::complex<double> e1_imag_axis(double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 1e-16;
    std::complex<double> b(1.0, x);
    std::complex<double> c(1.0 / std::numeric_limits<double>::min(), 0.0);
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 2; i <= kMaxIter; ++i) {
        const double a = -static_cast<double>(i - 1) * static_cast<double>(i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) break;
    }
    return h * std::complex<double>(std::cos(x), -std::sin(x));
}

constexpr double kSeriesCrossover = 4.0;

}  // namespace

double sinc(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double sine_integral(double x) {
    if (x < 0.0) return -sine_integral(-x);
    if (x <= kSeriesCrossover) return si_series(x);
    const auto e1 = e1_imag_axis(x);
    return 0.5 * M_PI + e1.imag();
}

double cosine_integral(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("cosine_integral: requires x > 0");
    if (x <= kSeriesCrossover) return kEulerGamma + std::log(x) - cin_series(x);
    return -e1_imag_axis(x).real();
}

double sint(double x) {
    if (x <= kSeriesCrossover) return 1.0 - (2.0 / M_PI) * sine_integral(x);
    // 1 - (2/pi) Si computed directly from the E1 remainder; avoids the
    // cancellation of subtracting two near-equal numbers at large x.
    return -(2.0 / M_PI) * e1_imag_axis(x).imag();
}

double gaussian_tail_mass(double sigma, double r) {
    return sigma * std::sqrt(M_PI / 2.0) * std::erfc(r / (sigma * M_SQRT2));
}

namespace {

// Gauss-Kronrod 7-15 nodes and weights (positive half; QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
constexpr double kWg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

struct Panel {
    double lo, hi;
    double estimate;
    double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    const double fc = f(centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];

    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * kXgk[jtw];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * kXgk[jtwm1];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * hlgth;
    resabs *= std::abs(hlgth);
    resasc *= std::abs(hlgth);

    double abserr = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0)
        abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    const double epmach = std::numeric_limits<double>::epsilon();
    const double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * epmach))
        abserr = std::max(epmach * 50.0 * resabs, abserr);

    if (!std::isfinite(result))
        throw std::invalid_argument("integrate: integrand produced a non-finite value");
    return Panel{a, b, result, abserr};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec, std::span<const double> breakpoints) {
    if (!(spec.relative_tolerance > 0.0) || !(spec.absolute_tolerance > 0.0))
        throw std::invalid_argument("integrate: tolerances must be positive");
    if (spec.max_subdivisions < 1)
        throw std::invalid_argument("integrate: max_subdivisions must be >= 1");
    if (!(spec.truncation_radius_factor >= 5.0))
        throw std::invalid_argument("integrate: truncation_radius_factor must be >= 5");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("integrate: requires finite lo < hi");

    std::vector<double> bounds;
    bounds.push_back(lo);
    for (double bp : breakpoints)
        if (bp > lo && bp < hi) bounds.push_back(bp);
    bounds.push_back(hi);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<Panel> panels;
    panels.reserve(bounds.size() + 64);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
        panels.push_back(gk15(f, bounds[i], bounds[i + 1]));

    int splits = 0;
    for (;;) {
        double total = 0.0, err = 0.0;
        for (const Panel& p : panels) {
            total += p.estimate;
            err += p.error;
        }
        const double tol = std::max(spec.absolute_tolerance,
                                    spec.relative_tolerance * std::abs(total));
        if (err <= tol) break;

        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].error > panels[worst].error) worst = i;

        const Panel p = panels[worst];
        const double mid = 0.5 * (p.lo + p.hi);
        if (splits >= spec.max_subdivisions || mid <= p.lo || mid >= p.hi)
            throw NonConvergenceError("integrate: subdivision budget exhausted before tolerance");
        ++splits;
        panels[worst] = gk15(f, p.lo, mid);
        panels.push_back(gk15(f, mid, p.hi));
    }

    // Deterministic final sum: panels ordered by position, compensated.
    std::sort(panels.begin(), panels.end(),
              [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
    double sum = 0.0, comp = 0.0;
    for (const Panel& p : panels) {
        const double y = p.estimate - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace biphoton
