#pragma once

#include "condense/density_table.hpp"

#include "json.hpp"

#include <limits>
#include <vector>

namespace condense {

// x_nodes with non-negative weights approximating integration against q(x),
// and an equally spaced y axis (tensor product over d_y coordinates).
struct QuadratureSpec {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::vector<double> x_nodes;
    std::vector<double> x_weights;
    std::vector<double> y_axis;
    double tolerance = 1e-3;

    std::size_t x_count() const { return x_weights.size(); }
    void validate() const;

    // Equal weights over the given nodes (Monte Carlo design draws or a grid
    // under uniform q).
    static QuadratureSpec uniform_weights(std::size_t d_x, std::size_t d_y, std::vector<double> x_nodes,
                                          std::vector<double> y_axis, double tolerance = 1e-3);
    // Midpoint grid on [0,1]^d_x with weights q(x) * cell / normaliser.
    static QuadratureSpec tensor_grid(std::size_t d_x, std::size_t d_y, std::size_t per_dim,
                                      const std::function<double(std::span<const double>)>& q,
                                      std::vector<double> y_axis, double tolerance = 1e-3);
};

inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

// int_X |f1 - f2|_1 q(x) dx
double l1_q(const ConditionalDensity& f1, const ConditionalDensity& f2, const QuadratureSpec& quad);
// Square root of int_X int (sqrt f1 - sqrt f2)^2 dy q(x) dx
double hellinger_q(const ConditionalDensity& f1, const ConditionalDensity& f2, const QuadratureSpec& quad);
// int_X q int f0 log(f0 / f) dy dx; kInfiniteDivergence when f vanishes where f0 does not.
double kl_q(const ConditionalDensity& f0, const ConditionalDensity& f, const QuadratureSpec& quad);
double v2_q(const ConditionalDensity& f0, const ConditionalDensity& f, const QuadratureSpec& quad);

struct MetricSet {
    double l1 = 0.0;
    double hellinger = 0.0;
    double kl = 0.0;
    double v2 = 0.0;
};

// All four functionals from tables on a common grid. The first table plays
// the role of f0 for KL and V2 and must carry mass >= 1 - 10 * tolerance on
// every x node, otherwise TruncatedSupportError is thrown.
MetricSet compare_tables(const DensityTable& a, const DensityTable& b, std::span<const double> x_weights,
                         double tolerance = 1e-3);
// Unweighted variant: every x node carries weight 1 / x_count.
MetricSet compare_tables(const DensityTable& a, const DensityTable& b, double tolerance = 1e-3);

nlohmann::json to_json(const MetricSet& m);

} // namespace condense
