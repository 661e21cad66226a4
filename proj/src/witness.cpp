#include "biphoton/witness.hpp"

#include <cmath>
#include <limits>

#include "biphoton/parallel.hpp"
#include "biphoton/schmidt.hpp"

namespace biphoton {

WitnessResult evaluate_witness(const BiphotonState& state, const QuadratureSpec& spec) {
    WitnessResult r;
    r.p = p_param(state);
    if (const auto* g = std::get_if<GaussianBiphoton>(&state)) {
        const double sp2 = g->sigma_plus * g->sigma_plus;
        const double sm2 = g->sigma_minus * g->sigma_minus;
        r.var_q_given_0 = sp2 * sm2 / (sp2 + sm2);
        r.var_x_given_0 = 1.0 / (sp2 + sm2);
    } else {
        r.var_q_given_0 = conditional_variance(state, Representation::Momentum, 0.0, spec);
        r.var_x_given_0 = conditional_variance(state, Representation::Position, 0.0, spec);
    }
    r.w = r.var_q_given_0 * r.var_x_given_0;
    r.w_uncertainty = std::nullopt;
    r.gaussian_bound_violated = r.w > kGaussianWitnessBound;
    return r;
}

BiphotonState family_state(StateFamily family, double p, double crystal_length_L,
                           double lambda_vacuum) {
    if (!(p > 0.0)) throw std::invalid_argument("family_state: requires p > 0");
    if (family == StateFamily::Gaussian) return GaussianBiphoton(p, 1.0);
    const double k = 2.0 * M_PI / lambda_vacuum;
    const double c = std::sqrt(crystal_length_L / (2.0 * k)) / p;
    return SpdcBiphoton(c, crystal_length_L, k);
}

namespace {

SweepRow sweep_row(StateFamily family, double p, const SweepOptions& opts) {
    SweepRow row{p, 0.0, 0.0, true, {}};
    try {
        const BiphotonState state =
            family_state(family, p, opts.crystal_length_L, opts.lambda_vacuum);
        row.w = evaluate_witness(state, opts.quad).w;
        if (family == StateFamily::Gaussian)
            row.k_1d = k_gaussian_1d(p);
        else
            row.k_1d = schmidt_spectrum(state, opts.schmidt_points).schmidt_number_k;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.k_1d = row.w = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
}

std::vector<double> sweep_grid(double p_min, double p_max, int steps) {
    if (!(p_min > 0.0) || !(p_min < p_max))
        throw std::invalid_argument("sweep: requires 0 < p_min < p_max");
    if (steps < 2) throw std::invalid_argument("sweep: requires steps >= 2");
    std::vector<double> ps(steps);
    for (int i = 0; i < steps; ++i)
        ps[i] = p_min + (p_max - p_min) * i / (steps - 1);
    return ps;
}

}  // namespace

std::vector<SweepRow> sweep(StateFamily family, double p_min, double p_max, int steps,
                            const SweepOptions& opts) {
    const auto ps = sweep_grid(p_min, p_max, steps);
    std::vector<SweepRow> rows(ps.size());
    const int nt = parallel_thread_count();
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (int i = 0; i < static_cast<int>(ps.size()); ++i)
        rows[i] = sweep_row(family, ps[i], opts);
    return rows;
}

std::vector<SweepRow> sweep_ref(StateFamily family, double p_min, double p_max, int steps,
                                const SweepOptions& opts) {
    const auto ps = sweep_grid(p_min, p_max, steps);
    std::vector<SweepRow> rows(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) rows[i] = sweep_row(family, ps[i], opts);
    return rows;
}

std::optional<std::pair<double, double>> violation_interval(StateFamily family,
                                                            const SweepOptions& opts) {
    constexpr double kPLo = 0.05, kPHi = 5.0, kStep = 0.05, kTol = 1e-3;

    const auto excess = [&](double p) {
        const BiphotonState s = family_state(family, p, opts.crystal_length_L,
                                             opts.lambda_vacuum);
        return evaluate_witness(s, opts.quad).w - kGaussianWitnessBound;
    };

    const int n = static_cast<int>(std::round((kPHi - kPLo) / kStep)) + 1;
    std::vector<double> ps(n), vals(n);
    for (int i = 0; i < n; ++i) ps[i] = kPLo + i * kStep;
    const int nt = parallel_thread_count();
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (int i = 0; i < n; ++i) vals[i] = excess(ps[i]);

    std::vector<std::pair<double, double>> brackets;
    for (int i = 0; i + 1 < n; ++i)
        if ((vals[i] <= 0.0) != (vals[i + 1] <= 0.0)) brackets.emplace_back(ps[i], ps[i + 1]);
    if (brackets.size() < 2) return std::nullopt;

    const auto bisect = [&](double lo, double hi) {
        double flo = excess(lo);
        while (hi - lo > kTol) {
            const double mid = 0.5 * (lo + hi);
            const double fm = excess(mid);
            if ((fm <= 0.0) == (flo <= 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    return std::make_pair(bisect(brackets.front().first, brackets.front().second),
                          bisect(brackets.back().first, brackets.back().second));
}

}  // namespace biphoton
