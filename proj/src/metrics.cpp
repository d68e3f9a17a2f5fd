#include "condense/metrics.hpp"

#include "condense/errors.hpp"
#include "condense/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace condense {

void QuadratureSpec::validate() const {
    if (d_x == 0 || d_y == 0) throw DomainError("quadrature dimensions must be positive");
    if (x_weights.empty() || x_nodes.size() != x_weights.size() * d_x) {
        throw DomainError("quadrature nodes and weights disagree");
    }
    double total = 0.0;
    for (double w : x_weights) {
        if (!(w >= 0.0)) throw DomainError("quadrature weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-10) throw DomainError("quadrature weights must sum to 1");
    if (y_axis.size() < 2) throw DomainError("y grid needs at least two points");
    for (std::size_t i = 1; i < y_axis.size(); ++i) {
        if (!(y_axis[i] > y_axis[i - 1])) throw DomainError("y grid must be strictly increasing");
    }
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
}

QuadratureSpec QuadratureSpec::uniform_weights(std::size_t d_x, std::size_t d_y, std::vector<double> x_nodes,
                                               std::vector<double> y_axis, double tolerance) {
    QuadratureSpec q;
    q.d_x = d_x;
    q.d_y = d_y;
    const std::size_t m = d_x == 0 ? 0 : x_nodes.size() / d_x;
    q.x_nodes = std::move(x_nodes);
    q.x_weights.assign(m, m == 0 ? 0.0 : 1.0 / static_cast<double>(m));
    q.y_axis = std::move(y_axis);
    q.tolerance = tolerance;
    q.validate();
    return q;
}

QuadratureSpec QuadratureSpec::tensor_grid(std::size_t d_x, std::size_t d_y, std::size_t per_dim,
                                           const std::function<double(std::span<const double>)>& q,
                                           std::vector<double> y_axis, double tolerance) {
    if (per_dim == 0) throw DomainError("per_dim must be positive");
    QuadratureSpec spec;
    spec.d_x = d_x;
    spec.d_y = d_y;
    spec.y_axis = std::move(y_axis);
    spec.tolerance = tolerance;
    std::size_t total = 1;
    for (std::size_t k = 0; k < d_x; ++k) total *= per_dim;
    spec.x_nodes.resize(total * d_x);
    spec.x_weights.resize(total);
    double sum = 0.0;
    for (std::size_t m = 0; m < total; ++m) {
        std::size_t r = m;
        for (std::size_t k = d_x; k-- > 0;) {
            spec.x_nodes[m * d_x + k] = (static_cast<double>(r % per_dim) + 0.5) / static_cast<double>(per_dim);
            r /= per_dim;
        }
        const double w = q(std::span<const double>(spec.x_nodes.data() + m * d_x, d_x));
        spec.x_weights[m] = w;
        sum += w;
    }
    if (!(sum > 0.0)) throw DomainError("design density vanishes on the grid");
    for (double& w : spec.x_weights) w /= sum;
    spec.validate();
    return spec;
}

namespace {

std::vector<RowDiscrepancy> rows_for(const ConditionalDensity& f1, const ConditionalDensity& f2,
                                     const QuadratureSpec& quad) {
    quad.validate();
    DensityTable a = tabulate(f1, quad.d_x, quad.d_y, quad.x_nodes, quad.y_axis);
    DensityTable b = tabulate(f2, quad.d_x, quad.d_y, quad.x_nodes, quad.y_axis);
    return row_discrepancies(a, b);
}

void check_mass(const std::vector<RowDiscrepancy>& rows, double tolerance) {
    for (std::size_t m = 0; m < rows.size(); ++m) {
        if (rows[m].mass_a < 1.0 - 10.0 * tolerance) {
            std::ostringstream os;
            os << "y grid carries only " << rows[m].mass_a << " of the density's mass at x node " << m;
            throw TruncatedSupportError(os.str());
        }
    }
}

MetricSet combine(const std::vector<RowDiscrepancy>& rows, std::span<const double> weights) {
    MetricSet out;
    double h2 = 0.0;
    bool infinite = false;
    for (std::size_t m = 0; m < rows.size(); ++m) {
        out.l1 += weights[m] * rows[m].l1;
        h2 += weights[m] * rows[m].hellinger2;
        out.kl += weights[m] * rows[m].kl;
        out.v2 += weights[m] * rows[m].v2;
        if (rows[m].support_violation && weights[m] > 0.0) infinite = true;
    }
    out.hellinger = std::sqrt(std::max(h2, 0.0));
    out.kl = std::max(out.kl, 0.0);
    out.v2 = std::max(out.v2, 0.0);
    if (infinite) {
        out.kl = kInfiniteDivergence;
        out.v2 = kInfiniteDivergence;
    }
    return out;
}

MetricSet metrics_for(const ConditionalDensity& f1, const ConditionalDensity& f2, const QuadratureSpec& quad) {
    const auto rows = rows_for(f1, f2, quad);
    check_mass(rows, quad.tolerance);
    return combine(rows, quad.x_weights);
}

} // namespace

double l1_q(const ConditionalDensity& f1, const ConditionalDensity& f2, const QuadratureSpec& quad) {
    return metrics_for(f1, f2, quad).l1;
}

double hellinger_q(const ConditionalDensity& f1, const ConditionalDensity& f2, const QuadratureSpec& quad) {
    return metrics_for(f1, f2, quad).hellinger;
}

double kl_q(const ConditionalDensity& f0, const ConditionalDensity& f, const QuadratureSpec& quad) {
    return metrics_for(f0, f, quad).kl;
}

double v2_q(const ConditionalDensity& f0, const ConditionalDensity& f, const QuadratureSpec& quad) {
    return metrics_for(f0, f, quad).v2;
}

MetricSet compare_tables(const DensityTable& a, const DensityTable& b, std::span<const double> x_weights,
                         double tolerance) {
    if (x_weights.size() != a.x_count()) throw DomainError("one weight per x node required");
    const auto rows = row_discrepancies(a, b);
    check_mass(rows, tolerance);
    return combine(rows, x_weights);
}

MetricSet compare_tables(const DensityTable& a, const DensityTable& b, double tolerance) {
    std::vector<double> w(a.x_count(), 1.0 / static_cast<double>(a.x_count()));
    return compare_tables(a, b, w, tolerance);
}

nlohmann::json to_json(const MetricSet& m) {
    auto finite_or_inf = [](double v) -> nlohmann::json {
        if (std::isinf(v)) return "inf";
        return v;
    };
    return {{"l1", m.l1}, {"hellinger", m.hellinger}, {"kl", finite_or_inf(m.kl)}, {"v2", finite_or_inf(m.v2)}};
}

} // namespace condense
