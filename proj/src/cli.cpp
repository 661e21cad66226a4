#include "biphoton/cli.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace biphoton {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

json witness_json(const WitnessResult& r) {
    json j;
    j["p"] = r.p;
    j["var_q_given_0_inv_m2"] = r.var_q_given_0;
    j["var_x_given_0_m2"] = r.var_x_given_0;
    j["w"] = r.w;
    if (r.w_uncertainty)
        j["w_uncertainty"] = *r.w_uncertainty;
    else
        j["w_uncertainty"] = nullptr;
    j["gaussian_bound"] = kGaussianWitnessBound;
    j["gaussian_bound_violated"] = r.gaussian_bound_violated;
    return j;
}

void write_density_csv(const DensitySamples& d, std::ostream& out, const char* unit_suffix) {
    out << "position_m,density_per_" << unit_suffix << "\n";
    for (std::size_t i = 0; i < d.axis.size(); ++i)
        out << fmt(d.axis[i]) << ',' << fmt(d.density[i]) << '\n';
}

}  // namespace

BiphotonState make_state(const RunConfig& config) {
    if (config.gaussian_family) {
        if (!config.p_value || config.pump_waist_c)
            throw std::invalid_argument("gaussian family: supply --p (and no --c)");
        return GaussianBiphoton(*config.p_value, 1.0);
    }
    if (static_cast<bool>(config.p_value) == static_cast<bool>(config.pump_waist_c))
        throw std::invalid_argument("spdc family: supply exactly one of --c / --p");
    if (!(config.crystal_length_L > 0.0) || !(config.vacuum_wavelength > 0.0))
        throw std::invalid_argument("crystal length and wavelength must be positive");
    if (config.pump_waist_c)
        return spdc_from_experiment(*config.pump_waist_c, config.crystal_length_L,
                                    config.vacuum_wavelength);
    return family_state(StateFamily::Spdc, *config.p_value, config.crystal_length_L,
                        config.vacuum_wavelength);
}

DetectionGeometry make_geometry(const RunConfig& config) {
    return DetectionGeometry(config.focal_length_fq, config.slit_width,
                             config.fiber_core_diameter);
}

void cmd_witness(const RunConfig& config, std::ostream& out) {
    const WitnessResult r = evaluate_witness(make_state(config), config.quad);
    if (config.format == OutputFormat::Json) {
        out << witness_json(r).dump(2) << '\n';
    } else {
        out << "p,var_q_given_0_inv_m2,var_x_given_0_m2,w,gaussian_bound_violated\n"
            << fmt(r.p) << ',' << fmt(r.var_q_given_0) << ',' << fmt(r.var_x_given_0)
            << ',' << fmt(r.w) << ',' << (r.gaussian_bound_violated ? 1 : 0) << '\n';
    }
}

void cmd_sweep(const RunConfig& config, double p_min, double p_max, int steps,
               std::ostream& out) {
    SweepOptions opts;
    opts.crystal_length_L = config.crystal_length_L;
    opts.lambda_vacuum = config.vacuum_wavelength;
    opts.schmidt_points = config.schmidt_points;
    opts.quad = config.quad;

    const auto gauss = sweep(StateFamily::Gaussian, p_min, p_max, steps, opts);
    const auto spdc = sweep(StateFamily::Spdc, p_min, p_max, steps, opts);

    out << "p,k_gaussian_1d,w_gaussian,k_spdc_1d,w_spdc\n";
    for (int i = 0; i < steps; ++i) {
        out << fmt(gauss[i].p) << ',' << fmt(gauss[i].k_1d) << ',' << fmt(gauss[i].w)
            << ',' << fmt(spdc[i].k_1d) << ',' << fmt(spdc[i].w) << '\n';
    }
}

void cmd_interval(const RunConfig& config, std::ostream& out) {
    SweepOptions opts;
    opts.crystal_length_L = config.crystal_length_L;
    opts.lambda_vacuum = config.vacuum_wavelength;
    opts.quad = config.quad;
    const StateFamily family =
        config.gaussian_family ? StateFamily::Gaussian : StateFamily::Spdc;

    const auto interval = violation_interval(family, opts);
    json j;
    j["family"] = config.gaussian_family ? "gaussian" : "spdc";
    if (interval) {
        j["p_low"] = interval->first;
        j["p_high"] = interval->second;
        j["status"] = "ok";
    } else {
        j["p_low"] = nullptr;
        j["p_high"] = nullptr;
        j["status"] = "no violation interval: w - 1/4 never changes sign on [0.05, 5]";
    }
    out << j.dump(2) << '\n';
}

void cmd_distribution(const RunConfig& config, ScanPlane plane, double fixed,
                      double grid_halfwidth, int n_points, bool with_aperture,
                      std::ostream& out) {
    const BiphotonState state = make_state(config);
    const auto* spdc = std::get_if<SpdcBiphoton>(&state);
    DensitySamples d;
    if (plane == ScanPlane::FarField) {
        if (!spdc)
            throw std::invalid_argument("distribution: far-field output requires the spdc family");
        const DetectionGeometry g = make_geometry(config);
        const double hw = grid_halfwidth > 0.0
                              ? grid_halfwidth
                              : config.quad.truncation_radius_factor * g.focal_length_fq /
                                    (spdc->pump_waist_c * spdc->wavenumber_k);
        d = far_field_coincidence(*spdc, g, fixed, hw, n_points, config.quad);
        if (with_aperture) d = aperture_convolve(d, g.slit_width);
    } else {
        const double hw = grid_halfwidth > 0.0
                              ? grid_halfwidth
                              : conditional_grid_halfwidth(state, Representation::Position,
                                                           fixed, config.quad);
        d = conditional_density(state, Representation::Position, fixed, hw, n_points,
                                config.quad);
        if (with_aperture) d = aperture_convolve(d, config.fiber_core_diameter);
    }
    write_density_csv(d, out, "m");
}

void cmd_displace(const RunConfig& config, const std::vector<double>& z_values,
                  double fixed, int n_points, std::ostream& out) {
    const BiphotonState state = make_state(config);
    const auto* spdc = std::get_if<SpdcBiphoton>(&state);
    if (!spdc) throw std::invalid_argument("displace: requires the spdc family");
    if (z_values.empty()) throw std::invalid_argument("displace: supply at least one z");
    for (double z : z_values)
        if (!(std::abs(z) <= spdc->crystal_length_L))
            throw std::invalid_argument("displace: requires |z| <= L");

    out << "z_m,position_m,density_per_m\n";
    for (double z : z_values) {
        const DensitySamples d =
            n_points > 0 ? displaced_near_field(*spdc, z, fixed,
                                                displaced_grid_halfwidth(*spdc, z, config.quad),
                                                n_points, config.quad)
                         : displaced_near_field(*spdc, z, fixed, config.quad);
        for (std::size_t i = 0; i < d.axis.size(); ++i)
            out << fmt(z) << ',' << fmt(d.axis[i]) << ',' << fmt(d.density[i]) << '\n';
    }
}

void cmd_simulate(const RunConfig& config, ScanPlane plane, int n_positions,
                  std::int64_t peak_counts, std::int64_t seed, std::ostream& out) {
    const BiphotonState state = make_state(config);
    const auto* spdc = std::get_if<SpdcBiphoton>(&state);
    if (!spdc) throw std::invalid_argument("simulate: requires the spdc family");
    const ScanData scan = simulate_scan(*spdc, plane, make_geometry(config), n_positions,
                                        peak_counts, seed, config.quad);
    out << scan_to_string(scan);
}

void cmd_fit(const RunConfig& config, const std::string& scan_path, std::ostream& out) {
    const BiphotonState state = make_state(config);
    const auto* spdc = std::get_if<SpdcBiphoton>(&state);
    if (!spdc) throw std::invalid_argument("fit: requires the spdc family");
    const ScanData scan = read_scan_file(scan_path);
    const FitResult r = fit_scan(scan, *spdc, config.quad);

    json j;
    j["plane"] = scan.plane == ScanPlane::NearField ? "near" : "far";
    j["converged"] = r.converged;
    j["amplitude_counts"] = r.amplitude;
    j["center_m"] = r.center;
    j["variance_m2"] = r.variance;
    j["variance_sigma_m2"] = std::isfinite(r.variance_sigma) ? json(r.variance_sigma)
                                                             : json(nullptr);
    if (scan.plane == ScanPlane::FarField) {
        // Slit coordinates map to transverse momentum via q = k x / f_q.
        const double s = spdc->wavenumber_k / config.focal_length_fq;
        j["variance_q_inv_m2"] = r.variance * s * s;
        if (std::isfinite(r.variance_sigma))
            j["variance_q_sigma_inv_m2"] = r.variance_sigma * s * s;
        else
            j["variance_q_sigma_inv_m2"] = nullptr;
    }
    j["residual_norm"] = r.residual_norm;
    out << j.dump(2) << '\n';
}

void cmd_reproduce_table2(const RunConfig& config, std::ostream& out) {
    static constexpr double kWaists[6] = {200e-6, 100e-6, 70e-6, 45e-6, 40e-6, 35e-6};
    out << "state,c_m,p,var_x_measured_m2,var_x_sigma_m2,var_q_measured_inv_m2,"
           "var_q_sigma_inv_m2,w_measured,w_measured_sigma,w_theory\n";
    const auto measured = reference_measured_variances();
    for (int i = 0; i < 6; ++i) {
        const SpdcBiphoton state = spdc_from_experiment(kWaists[i], config.crystal_length_L,
                                                        config.vacuum_wavelength);
        const WitnessResult wt = evaluate_witness(BiphotonState{state}, config.quad);
        const auto we = propagate_witness_error(measured[i].var_q, measured[i].var_x,
                                                ErrorPropagation::LinearSum);
        out << (i + 1) << ',' << fmt(kWaists[i]) << ',' << fmt(wt.p) << ','
            << fmt(measured[i].var_x.value) << ',' << fmt(measured[i].var_x.sigma) << ','
            << fmt(measured[i].var_q.value) << ',' << fmt(measured[i].var_q.sigma) << ','
            << fmt(we.value) << ',' << fmt(we.sigma) << ',' << fmt(wt.w) << '\n';
    }
}

int run_command(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return kExitOk;
    } catch (const NonConvergenceError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const TailBoundError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace biphoton
