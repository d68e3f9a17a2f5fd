#include "condense/density_table.hpp"

#include "condense/dataset.hpp"
#include "condense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace condense {

std::size_t DensityTable::y_count() const {
    std::size_t c = 1;
    for (std::size_t k = 0; k < d_y; ++k) c *= y_axis.size();
    return c;
}

void DensityTable::y_node(std::size_t k, std::span<double> out) const {
    const std::size_t K = y_axis.size();
    for (std::size_t dim = d_y; dim-- > 0;) {
        out[dim] = y_axis[k % K];
        k /= K;
    }
}

double DensityTable::spacing() const {
    if (y_axis.size() < 2) throw DomainError("y grid needs at least two points");
    return (y_axis.back() - y_axis.front()) / static_cast<double>(y_axis.size() - 1);
}

double DensityTable::cell_volume() const { return std::pow(spacing(), static_cast<double>(d_y)); }

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) throw DomainError("linspace needs at least two points");
    std::vector<double> out(count);
    const double h = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + h * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::vector<double> unit_grid(std::size_t d, std::size_t per_dim) {
    if (d == 0 || per_dim == 0) throw DomainError("unit_grid needs positive sizes");
    std::vector<double> axis(per_dim);
    for (std::size_t i = 0; i < per_dim; ++i) {
        axis[i] = per_dim == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(per_dim - 1);
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= per_dim;
    std::vector<double> out(total * d);
    for (std::size_t m = 0; m < total; ++m) {
        std::size_t r = m;
        for (std::size_t k = d; k-- > 0;) {
            out[m * d + k] = axis[r % per_dim];
            r /= per_dim;
        }
    }
    return out;
}

void write_density_csv(std::ostream& out, const DensityTable& table) {
    out << dataset_header(table.d_x, table.d_y) << ",density\n";
    std::vector<double> y(table.d_y);
    const std::size_t K = table.y_count();
    for (std::size_t m = 0; m < table.x_count(); ++m) {
        std::string prefix;
        for (double v : table.x_node(m)) prefix += format_double(v) + ',';
        for (std::size_t k = 0; k < K; ++k) {
            table.y_node(k, y);
            std::string row = prefix;
            for (double v : y) row += format_double(v) + ',';
            row += format_double(table.values[m * K + k]);
            out << row << '\n';
        }
    }
}

DensityTable read_density_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    DensityTable t;
    t.d_x = 0;
    t.d_y = 0;
    {
        std::size_t start = 0;
        std::vector<std::string> cols;
        while (true) {
            const auto comma = line.find(',', start);
            cols.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols.empty() || cols.back() != "density") throw ParseError("line 1: last column must be 'density'");
        cols.pop_back();
        for (const auto& c : cols) {
            if (!c.empty() && c[0] == 'x') ++t.d_x;
            else if (!c.empty() && c[0] == 'y') ++t.d_y;
            else throw ParseError("line 1: unexpected column '" + c + "'");
        }
        if (t.d_x == 0 || t.d_y == 0) throw ParseError("line 1: need x and y columns");
        if (dataset_header(t.d_x, t.d_y) + ",density" != line) throw ParseError("line 1: columns out of order");
    }
    const std::size_t width = t.d_x + t.d_y + 1;
    std::vector<std::vector<double>> rows;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!parse_csv_doubles(line, values) || values.size() != width) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                             " numeric fields");
        }
        rows.push_back(values);
    }
    if (rows.empty()) throw ParseError("density table has no rows");

    // the first x block fixes the y axis
    auto same_x = [&](const std::vector<double>& a, const std::vector<double>& b) {
        return std::equal(a.begin(), a.begin() + static_cast<long>(t.d_x), b.begin());
    };
    std::size_t block = 0;
    while (block < rows.size() && same_x(rows[block], rows[0])) ++block;
    // last coordinate varies fastest; its leading increasing run is the axis
    for (std::size_t r = 0; r < block; ++r) {
        const double v = rows[r][t.d_x + t.d_y - 1];
        if (!t.y_axis.empty() && v <= t.y_axis.back()) break;
        t.y_axis.push_back(v);
    }
    if (t.y_axis.size() < 2) throw ParseError("density table needs at least two y values per x node");
    const std::size_t K = t.y_count();
    if (rows.size() % K != 0 || block != K) throw ParseError("density table is not a full tensor grid");

    const double h = t.spacing();
    for (std::size_t i = 1; i < t.y_axis.size(); ++i) {
        if (std::abs((t.y_axis[i] - t.y_axis[i - 1]) - h) > 1e-6 * std::abs(h)) {
            throw ParseError("y grid must be equally spaced");
        }
    }
    std::vector<double> y(t.d_y);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t k = r % K;
        if (k == 0) t.x_nodes.insert(t.x_nodes.end(), rows[r].begin(), rows[r].begin() + static_cast<long>(t.d_x));
        else if (!same_x(rows[r], rows[r - 1])) {
            throw ParseError("line " + std::to_string(r + 2) + ": x node changes inside a block");
        }
        t.y_node(k, y);
        for (std::size_t d = 0; d < t.d_y; ++d) {
            if (rows[r][t.d_x + d] != y[d]) {
                throw ParseError("line " + std::to_string(r + 2) + ": y node out of grid order");
            }
        }
        const double f = rows[r].back();
        if (!(f >= 0.0) || !std::isfinite(f)) {
            throw ParseError("line " + std::to_string(r + 2) + ": density must be finite and non-negative");
        }
        t.values.push_back(f);
    }
    return t;
}

DensityTable read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_density_csv(in);
}

} // namespace condense
