#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace condense {

// A conditional density evaluated on x nodes times a tensor grid in y.
// y nodes enumerate y_axis^d_y with the last coordinate varying fastest;
// values[m * y_count() + k] is the density at (x node m, y node k).
struct DensityTable {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::vector<double> x_nodes;    // x_count() * d_x
    std::vector<double> y_axis;     // strictly increasing, equally spaced
    std::vector<double> values;

    std::size_t x_count() const { return d_x == 0 ? 0 : x_nodes.size() / d_x; }
    std::size_t y_count() const;
    std::span<const double> x_node(std::size_t m) const { return {x_nodes.data() + m * d_x, d_x}; }
    void y_node(std::size_t k, std::span<double> out) const;
    double spacing() const;
    // h^d_y
    double cell_volume() const;
    std::span<const double> slice(std::size_t m) const {
        return {values.data() + m * y_count(), y_count()};
    }
};

using ConditionalDensity = std::function<double(std::span<const double> x, std::span<const double> y)>;

std::vector<double> linspace(double lo, double hi, std::size_t count);

// Tensor grid of `per_dim` points per coordinate on [0,1]^d, row-major.
std::vector<double> unit_grid(std::size_t d, std::size_t per_dim);

// Header x1..x{d_x},y1..y{d_y},density; one row per (x node, y node).
void write_density_csv(std::ostream& out, const DensityTable& table);
// Reconstructs the tensor structure; throws ParseError on malformed input.
DensityTable read_density_csv(std::istream& in);
DensityTable read_density_csv(const std::string& path);

} // namespace condense
