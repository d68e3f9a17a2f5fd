#pragma once

// Data-parallel evaluation kernels. Each has an OpenMP version and a serial
// reference that performs the same per-node arithmetic in the same order, so
// the two agree bit for bit; tests compare them and bench/ times them.

#include "condense/density_table.hpp"
#include "condense/inference.hpp"

#include <vector>

namespace condense {

// f_hat(y|x) = average over draws of the conditional density.
DensityTable posterior_mean_density(const PosteriorDraws& draws, std::span<const double> x_nodes,
                                    std::span<const double> y_axis);
DensityTable posterior_mean_density_serial(const PosteriorDraws& draws, std::span<const double> x_nodes,
                                           std::span<const double> y_axis);

DensityTable tabulate(const ConditionalDensity& f, std::size_t d_x, std::size_t d_y,
                      std::span<const double> x_nodes, std::span<const double> y_axis);
DensityTable tabulate_serial(const ConditionalDensity& f, std::size_t d_x, std::size_t d_y,
                             std::span<const double> x_nodes, std::span<const double> y_axis);

// Per-x-node integrals over the y grid (Riemann sums with cell volume h^d_y).
struct RowDiscrepancy {
    double mass_a = 0.0;
    double mass_b = 0.0;
    double l1 = 0.0;
    double hellinger2 = 0.0;
    double kl = 0.0;   // of b from a: int a log(a / b)
    double v2 = 0.0;   // int a log(a / b)^2
    bool support_violation = false;  // b == 0 where a > 0
};

std::vector<RowDiscrepancy> row_discrepancies(const DensityTable& a, const DensityTable& b);
std::vector<RowDiscrepancy> row_discrepancies_serial(const DensityTable& a, const DensityTable& b);

} // namespace condense
