// Times the OpenMP kernels against their serial references on a synthetic
// posterior. Usage: bench_kernels [draws] [x_points] [y_points] [repeats]
#include "condense/kernels.hpp"
#include "condense/model.hpp"
#include "condense/simulation.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

using namespace condense;

template <class F>
double best_of(std::size_t repeats, F&& f) {
    double best = 1e300;
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

int main(int argc, char** argv) {
    const std::size_t n_draws = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
    const std::size_t x_points = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 50;
    const std::size_t y_points = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 401;
    const std::size_t repeats = argc > 4 ? std::strtoul(argv[4], nullptr, 10) : 3;

    PriorConfig prior;
    prior.gamma = HyperParams{0.3, {0.0}, 1.0};
    RngStream rng(42, 0);
    PosteriorDraws draws;
    for (std::size_t i = 0; i < n_draws; ++i) draws.draws.push_back(sample_prior_state(prior, rng));

    const auto x_nodes = unit_grid(1, x_points);
    const auto y_axis = linspace(-4.0, 4.0, y_points);
    const TruthSpec truth = make_truth(TruthFamily::T1_sine_gaussian);
    const ConditionalDensity f0 = [&](std::span<const double> x, std::span<const double> y) {
        return truth_density(truth, x, y);
    };

    DensityTable a, b;
    const double pm_s = best_of(repeats, [&] { a = posterior_mean_density_serial(draws, x_nodes, y_axis); });
    const double pm_p = best_of(repeats, [&] { b = posterior_mean_density(draws, x_nodes, y_axis); });
    const bool pm_same = a.values == b.values;

    DensityTable t0, t1;
    const double tab_s = best_of(repeats, [&] { t0 = tabulate_serial(f0, 1, 1, x_nodes, y_axis); });
    const double tab_p = best_of(repeats, [&] { t1 = tabulate(f0, 1, 1, x_nodes, y_axis); });

    std::vector<RowDiscrepancy> r0, r1;
    const double rd_s = best_of(repeats, [&] { r0 = row_discrepancies_serial(t0, a); });
    const double rd_p = best_of(repeats, [&] { r1 = row_discrepancies(t0, a); });

    std::cout << "threads " << omp_get_max_threads() << ", draws " << n_draws << ", grid " << x_points << " x "
              << y_points << "\n";
    std::cout << "kernel                  serial_s   openmp_s   speedup  identical\n";
    auto line = [](const char* name, double s, double p, bool same) {
        std::printf("%-22s %9.4f  %9.4f  %8.2f  %s\n", name, s, p, s / p, same ? "yes" : "NO");
    };
    line("posterior_mean_density", pm_s, pm_p, pm_same);
    line("tabulate", tab_s, tab_p, t0.values == t1.values);
    bool rd_same = r0.size() == r1.size();
    for (std::size_t i = 0; rd_same && i < r0.size(); ++i) rd_same = r0[i].l1 == r1[i].l1 && r0[i].kl == r1[i].kl;
    line("row_discrepancies", rd_s, rd_p, rd_same);
    return pm_same ? 0 : 1;
}
