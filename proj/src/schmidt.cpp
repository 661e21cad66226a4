#include "biphoton/schmidt.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "biphoton/parallel.hpp"
#include "biphoton/specfun.hpp"

namespace biphoton {

double k_gaussian_2d(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("k_gaussian_2d: requires p > 0");
    const double t = 1.0 / p + p;
    return 0.25 * t * t;
}

double k_gaussian_1d(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("k_gaussian_1d: requires p > 0");
    return 0.5 * (1.0 / p + p);
}

double default_kernel_halfwidth(const BiphotonState& state) {
    const CoordinateWidths cw = coordinate_widths(state, Representation::Momentum);
    // Covers |u| <= 8 sum_width and |w| <= 8 diff_width: q = (u +- w)/2.
    return 4.0 * (cw.sum_width + cw.diff_width);
}

Eigen::MatrixXd kernel_matrix(const BiphotonState& state, int n, double halfwidth) {
    Eigen::MatrixXd m(n, n);
    const double h = 2.0 * halfwidth / (n - 1);
    const int nt = parallel_thread_count();
#pragma omp parallel for num_threads(nt) schedule(static)
    for (int i = 0; i < n; ++i) {
        const double q1 = -halfwidth + i * h;
        for (int j = 0; j < n; ++j) {
            const double q2 = -halfwidth + j * h;
            m(i, j) = momentum_amplitude(state, q1, q2) * h;
        }
    }
    return m;
}

Eigen::MatrixXd kernel_matrix_ref(const BiphotonState& state, int n, double halfwidth) {
    Eigen::MatrixXd m(n, n);
    const double h = 2.0 * halfwidth / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double q1 = -halfwidth + i * h;
        for (int j = 0; j < n; ++j) {
            const double q2 = -halfwidth + j * h;
            m(i, j) = momentum_amplitude(state, q1, q2) * h;
        }
    }
    return m;
}

namespace {

double schmidt_number_at(const BiphotonState& state, int n, double halfwidth,
                         std::vector<double>* coefficients) {
    const Eigen::MatrixXd m = kernel_matrix(state, n, halfwidth);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& sv = svd.singularValues();

    double s2 = 0.0;
    for (int i = 0; i < sv.size(); ++i) s2 += sv[i] * sv[i];
    double sum_l2 = 0.0;
    if (coefficients) coefficients->resize(sv.size());
    for (int i = 0; i < sv.size(); ++i) {
        const double lam = sv[i] * sv[i] / s2;
        if (coefficients) (*coefficients)[i] = lam;
        sum_l2 += lam * lam;
    }
    return 1.0 / sum_l2;
}

}  // namespace

SchmidtSpectrum schmidt_spectrum(const BiphotonState& state, int n_points,
                                 double grid_halfwidth) {
    if (n_points < 256)
        throw std::invalid_argument("schmidt_spectrum: n_points must be >= 256");
    const double hw = grid_halfwidth > 0.0 ? grid_halfwidth : default_kernel_halfwidth(state);

    SchmidtSpectrum out;
    out.grid_points = n_points;
    out.grid_halfwidth = hw;
    out.schmidt_number_k = schmidt_number_at(state, n_points, hw, &out.coefficients);

    const double k_half = schmidt_number_at(state, n_points / 2, hw, nullptr);
    if (std::abs(out.schmidt_number_k - k_half) > 1e-3 * out.schmidt_number_k)
        throw NonConvergenceError(
            "schmidt_spectrum: not converged at requested resolution (K changed by > 1e-3 "
            "relative between n/2 and n)");

    std::sort(out.coefficients.begin(), out.coefficients.end(), std::greater<>());
    return out;
}

}  // namespace biphoton
