#include "biphoton/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "biphoton/distributions.hpp"

namespace biphoton {

void ScanData::validate() const {
    if (positions.size() != counts.size())
        throw std::invalid_argument("ScanData: positions/counts length mismatch");
    if (positions.size() < 8)
        throw std::invalid_argument("ScanData: needs at least 8 positions");
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        if (!(positions[i] < positions[i + 1]))
            throw std::invalid_argument("ScanData: positions must be strictly increasing");
    for (std::int64_t c : counts)
        if (c < 0) throw std::invalid_argument("ScanData: counts must be non-negative");
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t poisson_inversion(double mean, std::mt19937_64& rng) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = uniform01(rng);
    while (p > limit) {
        ++k;
        p *= uniform01(rng);
    }
    return k;
}

// Hormann's PTRS transformed-rejection sampler, exact for mean >= 10.
std::int64_t poisson_ptrs(double mean, std::mt19937_64& rng) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform01(rng) - 0.5;
        const double v = uniform01(rng);
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -mean + kf * loglam - std::lgamma(kf + 1.0))
            return static_cast<std::int64_t>(kf);
    }
}

}  // namespace

std::int64_t poisson_sample(double mean, std::mt19937_64& rng) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson_sample: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) return poisson_inversion(mean, rng);
    return poisson_ptrs(mean, rng);
}

namespace {

DensitySamples model_density(const SpdcBiphoton& state, ScanPlane plane,
                             const DetectionGeometry& geometry, const QuadratureSpec& spec) {
    if (plane == ScanPlane::FarField) {
        return aperture_convolve(far_field_coincidence(state, geometry, 0.0, spec),
                                 geometry.slit_width);
    }
    return aperture_convolve(near_field_coincidence(state, 0.0, spec),
                             geometry.fiber_core_diameter);
}

double interpolate(const DensitySamples& d, double x) {
    const auto& ax = d.axis;
    if (x <= ax.front() || x >= ax.back()) return 0.0;
    const double h = ax[1] - ax[0];
    const auto i = static_cast<std::size_t>((x - ax.front()) / h);
    const double t = (x - ax[i]) / h;
    return (1.0 - t) * d.density[i] + t * d.density[i + 1];
}

// Plane-appropriate model shape in template units, unity at the origin.
double template_shape(const SpdcBiphoton& state, ScanPlane plane, double v) {
    const BiphotonState s{state};
    const double a = plane == ScanPlane::FarField ? momentum_amplitude(s, 0.0, v)
                                                  : position_amplitude(s, 0.0, v);
    return a * a;
}

double template_variance(const SpdcBiphoton& state, ScanPlane plane,
                         const QuadratureSpec& spec) {
    const Representation rep =
        plane == ScanPlane::FarField ? Representation::Momentum : Representation::Position;
    return conditional_variance(BiphotonState{state}, rep, 0.0, spec);
}

}  // namespace

ScanData simulate_scan(const SpdcBiphoton& state, ScanPlane plane,
                       const DetectionGeometry& geometry, int n_positions,
                       std::int64_t peak_counts, std::int64_t seed,
                       const QuadratureSpec& spec) {
    if (n_positions < 8)
        throw std::invalid_argument("simulate_scan: n_positions must be >= 8");
    if (peak_counts < 10)
        throw std::invalid_argument("simulate_scan: peak_counts must be >= 10");

    const DensitySamples model = model_density(state, plane, geometry, spec);
    const double sigma = std::sqrt(model.variance());
    const double peak_density = *std::max_element(model.density.begin(), model.density.end());

    ScanData scan;
    scan.plane = plane;
    scan.fixed_conjugate_position = 0.0;
    scan.integration_seed = seed;
    scan.positions.resize(n_positions);
    scan.counts.resize(n_positions);

    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const double lo = -3.0 * sigma, hi = 3.0 * sigma;
    for (int i = 0; i < n_positions; ++i) {
        const double x = lo + (hi - lo) * i / (n_positions - 1);
        scan.positions[i] = x;
        const double mean = peak_counts * interpolate(model, x) / peak_density;
        scan.counts[i] = poisson_sample(mean, rng);
    }
    scan.validate();
    return scan;
}

FitResult fit_scan(const ScanData& data, const SpdcBiphoton& state_template,
                   const QuadratureSpec& spec) {
    data.validate();
    const int n = static_cast<int>(data.positions.size());
    const double v_template = template_variance(state_template, data.plane, spec);

    // Moment-matched starting point.
    double total = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) {
        total += static_cast<double>(data.counts[i]);
        mean += data.counts[i] * data.positions[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("fit_scan: all counts are zero");
    mean /= total;
    double var = 0.0;
    for (int i = 0; i < n; ++i)
        var += data.counts[i] * (data.positions[i] - mean) * (data.positions[i] - mean);
    var /= total;

    double amp0 = 0.0;
    for (std::int64_t c : data.counts) amp0 = std::max(amp0, static_cast<double>(c));
    const double span = data.positions.back() - data.positions.front();
    const double w0 = std::sqrt(std::max(var, 1e-8 * span * span) / v_template);
    const double wx0 = w0 * std::sqrt(v_template);  // model width in scan units

    // The raw parameters span many orders of magnitude (counts vs meters vs
    // the width multiplier), so the solver works in units of the starting
    // point: theta = (amp/amp0, (center - mean)/wx0, w/w0), all O(1).
    const auto model_at = [&](const Eigen::Vector3d& t, double x) {
        const double x0 = mean + t(1) * wx0;
        const double w = std::abs(t(2)) * w0;  // shape is even in its argument
        return t(0) * amp0 * template_shape(state_template, data.plane, (x - x0) / w);
    };
    const auto ssr_of = [&](const Eigen::Vector3d& t) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = model_at(t, data.positions[i]) - data.counts[i];
            s += r * r;
        }
        return s;
    };
    const auto fill_jacobian = [&](const Eigen::Vector3d& t, Eigen::MatrixXd& jac) {
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6 * std::max(std::abs(t(j)), 1e-3);
            Eigen::Vector3d tp = t, tm = t;
            tp(j) += h;
            tm(j) -= h;
            for (int i = 0; i < n; ++i)
                jac(i, j) =
                    (model_at(tp, data.positions[i]) - model_at(tm, data.positions[i])) /
                    (2.0 * h);
        }
    };

    Eigen::Vector3d theta(1.0, 0.0, 1.0);
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd resid(n);
    double lm_mu = 1e-3;
    double ssr = ssr_of(theta);
    bool converged = false;

    for (int iter = 0; iter < 200 && !converged; ++iter) {
        for (int i = 0; i < n; ++i)
            resid(i) = model_at(theta, data.positions[i]) - data.counts[i];
        fill_jacobian(theta, jac);
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d jtr = jac.transpose() * resid;

        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            Eigen::Matrix3d damped = jtj;
            for (int d = 0; d < 3; ++d)
                damped(d, d) += lm_mu * std::max(jtj(d, d), 1e-12);
            const Eigen::Vector3d delta = damped.ldlt().solve(-jtr);
            const Eigen::Vector3d cand = theta + delta;
            const double nssr = ssr_of(cand);
            if (nssr <= ssr && std::isfinite(nssr)) {
                const double rel_drop = (ssr - nssr) / std::max(ssr, 1e-300);
                theta = cand;
                ssr = nssr;
                lm_mu = std::max(lm_mu / 3.0, 1e-12);
                improved = true;
                if (rel_drop < 1e-12) converged = true;
            } else {
                lm_mu *= 4.0;
            }
        }
        if (!improved) converged = true;  // stalled at the bottom of the damping ladder
    }

    const double amp = theta(0) * amp0;
    const double center = mean + theta(1) * wx0;
    const double wscale = std::abs(theta(2)) * w0;

    FitResult out;
    out.amplitude = amp;
    out.center = center;
    out.variance = wscale * wscale * v_template;
    out.residual_norm = 0.0;
    double ynorm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = model_at(theta, data.positions[i]) - data.counts[i];
        out.residual_norm += r * r;
        ynorm += static_cast<double>(data.counts[i]) * data.counts[i];
    }
    out.residual_norm = std::sqrt(out.residual_norm) / std::max(std::sqrt(ynorm), 1.0);

    // Residual-scaled parameter covariance at the solution, first order.
    fill_jacobian(theta, jac);
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const double dof = std::max(n - 3, 1);
    const Eigen::Matrix3d cov = jtj.inverse() * (ssr / dof);
    out.converged = converged && std::isfinite(cov(2, 2)) && cov(2, 2) >= 0.0;
    if (out.converged) {
        const double sigma_w = std::sqrt(cov(2, 2)) * w0;  // undo the theta scaling
        out.variance_sigma = 2.0 * wscale * v_template * sigma_w;
    } else {
        out.variance_sigma = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

ValueWithSigma propagate_witness_error(const ValueWithSigma& var_q,
                                       const ValueWithSigma& var_x, ErrorPropagation mode) {
    if (!(var_q.value > 0.0) || !(var_x.value > 0.0))
        throw std::invalid_argument("propagate_witness_error: central values must be positive");
    if (var_q.sigma < 0.0 || var_x.sigma < 0.0)
        throw std::invalid_argument("propagate_witness_error: sigmas must be >= 0");
    const double w = var_q.value * var_x.value;
    const double rq = var_q.sigma / var_q.value;
    const double rx = var_x.sigma / var_x.value;
    const double rel = mode == ErrorPropagation::LinearSum ? rq + rx : std::hypot(rq, rx);
    return {w, w * rel};
}

std::string scan_to_string(const ScanData& data) {
    data.validate();
    std::string out;
    out += data.plane == ScanPlane::NearField ? "# plane=near\n" : "# plane=far\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "# fixed=%.17g\n", data.fixed_conjugate_position);
    out += buf;
    if (data.integration_seed) {
        std::snprintf(buf, sizeof buf, "# seed=%lld\n",
                      static_cast<long long>(*data.integration_seed));
        out += buf;
    }
    out += "position_m,counts\n";
    for (std::size_t i = 0; i < data.positions.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%lld\n", data.positions[i],
                      static_cast<long long>(data.counts[i]));
        out += buf;
    }
    return out;
}

ScanData parse_scan(std::istream& in) {
    ScanData data;
    bool have_plane = false, have_header = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string kv = line.substr(1);
            kv.erase(std::remove(kv.begin(), kv.end(), ' '), kv.end());
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "plane") {
                if (val == "near")
                    data.plane = ScanPlane::NearField;
                else if (val == "far")
                    data.plane = ScanPlane::FarField;
                else
                    throw std::invalid_argument("scan file: plane must be near or far");
                have_plane = true;
            } else if (key == "fixed") {
                data.fixed_conjugate_position = std::stod(val);
            } else if (key == "seed") {
                data.integration_seed = std::stoll(val);
            }
            continue;
        }
        if (!have_header) {
            if (line != "position_m,counts")
                throw std::invalid_argument("scan file: missing position_m,counts header");
            have_header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("scan file: malformed data row");
        data.positions.push_back(std::stod(line.substr(0, comma)));
        data.counts.push_back(std::stoll(line.substr(comma + 1)));
    }
    if (!have_plane) throw std::invalid_argument("scan file: missing '# plane=' line");
    if (!have_header) throw std::invalid_argument("scan file: missing header");
    data.validate();
    return data;
}

void write_scan_file(const ScanData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open scan file for writing: " + path);
    out << scan_to_string(data);
}

ScanData read_scan_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open scan file: " + path);
    return parse_scan(in);
}

std::span<const MeasuredVariances> reference_measured_variances() {
    static const MeasuredVariances table[6] = {
        {0.1595, {6.62e-10, 0.26e-10}, {3.55e7, 0.14e7}},
        {0.3189, {9.17e-10, 0.37e-10}, {1.25e8, 0.05e8}},
        {0.4556, {7.76e-10, 0.31e-10}, {2.60e8, 0.10e8}},
        {0.7087, {7.75e-10, 0.31e-10}, {4.67e8, 0.19e8}},
        {0.7973, {7.23e-10, 0.29e-10}, {5.28e8, 0.21e8}},
        {0.9112, {8.16e-10, 0.33e-10}, {5.18e8, 0.21e8}},
    };
    return table;
}

}  // namespace biphoton
