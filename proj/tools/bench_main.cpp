// Timing comparison of the OpenMP kernels against their serial reference
// implementations, with a result-equality check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "biphoton/parallel.hpp"
#include "biphoton/schmidt.hpp"
#include "biphoton/witness.hpp"

using namespace biphoton;

namespace {

double seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double t_ref, double t_omp, double max_diff) {
    std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %5.2fx   max|diff| %.3g\n",
                name, t_ref, t_omp, t_ref / t_omp, max_diff);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", parallel_thread_count());

    {
        const BiphotonState state{spdc_from_experiment(35e-6, 1.8e-2, 710e-9)};
        const int n = 2048;
        const double hw = default_kernel_halfwidth(state);
        Eigen::MatrixXd a, b;
        const double t_ref = seconds([&] { a = kernel_matrix_ref(state, n, hw); });
        const double t_omp = seconds([&] { b = kernel_matrix(state, n, hw); });
        report("kernel fill (2048x2048)", t_ref, t_omp, (a - b).cwiseAbs().maxCoeff());
    }

    {
        SweepOptions opts;
        opts.schmidt_points = 256;
        std::vector<SweepRow> a, b;
        const double t_ref =
            seconds([&] { a = sweep_ref(StateFamily::Spdc, 0.2, 2.8, 16, opts); });
        const double t_omp =
            seconds([&] { b = sweep(StateFamily::Spdc, 0.2, 2.8, 16, opts); });
        double md = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            md = std::max(md, std::abs(a[i].w - b[i].w));
            md = std::max(md, std::abs(a[i].k_1d - b[i].k_1d));
        }
        report("witness sweep (16 rows)", t_ref, t_omp, md);
    }

    return 0;
}
