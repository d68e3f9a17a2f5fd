#include "condense/dataset.hpp"

#include "condense/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace condense {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& v) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    return ec == std::errc() && ptr == t.data() + t.size();
}

} // namespace

void Dataset::push_back(std::span<const double> xi, std::span<const double> yi) {
    x.insert(x.end(), xi.begin(), xi.end());
    y.insert(y.end(), yi.begin(), yi.end());
}

std::string dataset_header(std::size_t d_x, std::size_t d_y) {
    std::string h;
    for (std::size_t k = 1; k <= d_x; ++k) h += (k > 1 ? ",x" : "x") + std::to_string(k);
    for (std::size_t k = 1; k <= d_y; ++k) h += ",y" + std::to_string(k);
    return h;
}

bool parse_csv_doubles(const std::string& line, std::vector<double>& out) {
    out.clear();
    for (const auto& f : split_fields(line)) {
        double v;
        if (!parse_double(f, v)) return false;
        out.push_back(v);
    }
    return true;
}

Dataset read_dataset_csv(std::istream& in, std::size_t d_x, std::size_t d_y) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected = dataset_header(d_x, d_y);
    if (trim(line) != expected) {
        throw ParseError("line 1: expected header '" + expected + "', found '" + line + "'");
    }
    Dataset data;
    data.d_x = d_x;
    data.d_y = d_y;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || trim(line) == "\r") continue;
        if (!parse_csv_doubles(line, values)) {
            throw ParseError("line " + std::to_string(lineno) + ": non-numeric field");
        }
        if (values.size() != d_x + d_y) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(d_x + d_y) + " fields, found " +
                             std::to_string(values.size()));
        }
        for (std::size_t k = 0; k < d_x; ++k) {
            if (!(values[k] >= 0.0 && values[k] <= 1.0)) {
                throw ParseError("line " + std::to_string(lineno) + ": covariate x" +
                                 std::to_string(k + 1) + " outside [0, 1]");
            }
        }
        for (double v : values) {
            if (!std::isfinite(v)) throw ParseError("line " + std::to_string(lineno) + ": non-finite value");
        }
        data.push_back(std::span<const double>(values.data(), d_x),
                       std::span<const double>(values.data() + d_x, d_y));
    }
    return data;
}

Dataset read_dataset_csv(const std::string& path, std::size_t d_x, std::size_t d_y) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_dataset_csv(in, d_x, d_y);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw ParseError("line 1: missing header");
    std::size_t d_x = 0, d_y = 0;
    for (const auto& f : split_fields(header)) {
        const std::string t = trim(f);
        if (!t.empty() && t[0] == 'x') ++d_x;
        else if (!t.empty() && t[0] == 'y') ++d_y;
        else throw ParseError("line 1: unexpected column '" + t + "'");
    }
    if (d_x == 0 || d_y == 0) throw ParseError("line 1: header needs x and y columns");
    in.clear();
    in.seekg(0);
    return read_dataset_csv(in, d_x, d_y);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    out << dataset_header(data.d_x, data.d_y) << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::string row;
        for (double v : data.x_row(i)) row += format_double(v) + ',';
        for (double v : data.y_row(i)) row += format_double(v) + ',';
        row.pop_back();
        out << row << '\n';
    }
}

} // namespace condense
