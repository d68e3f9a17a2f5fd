#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace condense {

// n paired records (x_i in [0,1]^d_x, y_i in R^d_y), stored row-major.
struct Dataset {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return d_x == 0 ? 0 : x.size() / d_x; }
    bool empty() const { return x.empty(); }
    std::span<const double> x_row(std::size_t i) const { return {x.data() + i * d_x, d_x}; }
    std::span<const double> y_row(std::size_t i) const { return {y.data() + i * d_y, d_y}; }

    void push_back(std::span<const double> xi, std::span<const double> yi);
};

// Header "x1,...,x{d_x},y1,...,y{d_y}"; decimal point, no locale.
std::string dataset_header(std::size_t d_x, std::size_t d_y);

// Throws ParseError with the offending line number.
Dataset read_dataset_csv(std::istream& in, std::size_t d_x, std::size_t d_y);
Dataset read_dataset_csv(const std::string& path, std::size_t d_x, std::size_t d_y);
// Infers d_x / d_y from the header.
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// Splits a CSV line and parses every field as a double; false on failure.
bool parse_csv_doubles(const std::string& line, std::vector<double>& out);

} // namespace condense
