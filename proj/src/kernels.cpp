#include "condense/kernels.hpp"

#include "condense/distributions.hpp"
#include "condense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace condense {

namespace {

constexpr double kLogFloor = 1e-300;
// atoms whose predictor weight falls below this are skipped
constexpr double kWeightCutoff = 1e-16;

struct GridShape {
    std::size_t d_x, d_y, x_count, y_count;
};

GridShape check_grid(std::size_t d_x, std::size_t d_y, std::span<const double> x_nodes,
                     std::span<const double> y_axis) {
    if (d_x == 0 || d_y == 0) throw DomainError("dimensions must be positive");
    if (x_nodes.empty() || x_nodes.size() % d_x != 0) throw DomainError("x nodes do not match d_x");
    if (y_axis.size() < 2) throw DomainError("y grid needs at least two points");
    for (std::size_t i = 1; i < y_axis.size(); ++i) {
        if (!(y_axis[i] > y_axis[i - 1])) throw DomainError("y grid must be strictly increasing");
    }
    std::size_t yc = 1;
    for (std::size_t k = 0; k < d_y; ++k) yc *= y_axis.size();
    return {d_x, d_y, x_nodes.size() / d_x, yc};
}

DensityTable empty_table(const GridShape& g, std::span<const double> x_nodes, std::span<const double> y_axis) {
    DensityTable t;
    t.d_x = g.d_x;
    t.d_y = g.d_y;
    t.x_nodes.assign(x_nodes.begin(), x_nodes.end());
    t.y_axis.assign(y_axis.begin(), y_axis.end());
    t.values.assign(g.x_count * g.y_count, 0.0);
    return t;
}

// One x node of the posterior mean: out[k] for every y node k.
void posterior_row(const PosteriorDraws& draws, const DensityTable& t, std::size_t m, double* out) {
    const auto x = t.x_node(m);
    const std::size_t K = t.y_count();
    const std::size_t dy = t.d_y;
    std::vector<double> logw, coef, mu;
    std::vector<double> y(dy);
    std::fill(out, out + K, 0.0);
    for (const MixtureState& s : draws.draws) {
        const std::size_t n = s.size();
        logw.assign(n, -std::numeric_limits<double>::infinity());
        const double inv2s2 = 1.0 / (2.0 * s.sigma * s.sigma);
        for (std::size_t j = 0; j < n; ++j) {
            if (s.weights[j] <= 0.0) continue;
            double d2 = 0.0;
            const auto ax = s.atom_x(j);
            for (std::size_t k = 0; k < s.d_x; ++k) d2 += (x[k] - ax[k]) * (x[k] - ax[k]);
            logw[j] = std::log(s.weights[j]) - d2 * inv2s2;
        }
        const double lse = log_sum_exp(logw);
        const double norm = std::pow(2.0 * std::numbers::pi * s.sigma * s.sigma, -0.5 * static_cast<double>(dy));
        coef.clear();
        mu.clear();
        for (std::size_t j = 0; j < n; ++j) {
            const double w = std::exp(logw[j] - lse);
            if (w < kWeightCutoff) continue;
            coef.push_back(w * norm);
            const auto ay = s.atom_y(j);
            mu.insert(mu.end(), ay.begin(), ay.end());
        }
        for (std::size_t k = 0; k < K; ++k) {
            t.y_node(k, y);
            double f = 0.0;
            for (std::size_t a = 0; a < coef.size(); ++a) {
                double d2 = 0.0;
                for (std::size_t d = 0; d < dy; ++d) {
                    const double diff = y[d] - mu[a * dy + d];
                    d2 += diff * diff;
                }
                f += coef[a] * std::exp(-d2 * inv2s2);
            }
            out[k] += f;
        }
    }
    const double inv = 1.0 / static_cast<double>(draws.draws.size());
    for (std::size_t k = 0; k < K; ++k) out[k] *= inv;
}

DensityTable prepare_posterior(const PosteriorDraws& draws, std::span<const double> x_nodes,
                               std::span<const double> y_axis) {
    if (draws.draws.empty()) throw DomainError("posterior mean needs at least one draw");
    const auto& s0 = draws.draws.front();
    return empty_table(check_grid(s0.d_x, s0.d_y, x_nodes, y_axis), x_nodes, y_axis);
}

void tabulate_row(const ConditionalDensity& f, DensityTable& t, std::size_t m) {
    std::vector<double> y(t.d_y);
    const std::size_t K = t.y_count();
    for (std::size_t k = 0; k < K; ++k) {
        t.y_node(k, y);
        t.values[m * K + k] = f(t.x_node(m), y);
    }
}

void check_pair(const DensityTable& a, const DensityTable& b) {
    if (a.d_x != b.d_x || a.d_y != b.d_y || a.x_nodes != b.x_nodes || a.y_axis != b.y_axis) {
        throw DomainError("density tables are defined on different grids");
    }
}

RowDiscrepancy discrepancy_row(const DensityTable& a, const DensityTable& b, std::size_t m) {
    const auto fa = a.slice(m);
    const auto fb = b.slice(m);
    const double h = a.cell_volume();
    RowDiscrepancy r;
    for (std::size_t k = 0; k < fa.size(); ++k) {
        const double u = fa[k], v = fb[k];
        r.mass_a += u;
        r.mass_b += v;
        r.l1 += std::abs(u - v);
        const double root = std::sqrt(u) - std::sqrt(v);
        r.hellinger2 += root * root;
        if (u > 0.0) {
            if (v <= 0.0 && u > kLogFloor) r.support_violation = true;
            const double lr = std::log(std::max(u, kLogFloor)) - std::log(std::max(v, kLogFloor));
            r.kl += u * lr;
            r.v2 += u * lr * lr;
        }
    }
    r.mass_a *= h;
    r.mass_b *= h;
    r.l1 *= h;
    r.hellinger2 *= h;
    r.kl *= h;
    r.v2 *= h;
    return r;
}

} // namespace

DensityTable posterior_mean_density(const PosteriorDraws& draws, std::span<const double> x_nodes,
                                    std::span<const double> y_axis) {
    DensityTable t = prepare_posterior(draws, x_nodes, y_axis);
    const std::size_t K = t.y_count();
    const long M = static_cast<long>(t.x_count());
#pragma omp parallel for schedule(dynamic)
    for (long m = 0; m < M; ++m) posterior_row(draws, t, static_cast<std::size_t>(m), t.values.data() + m * K);
    return t;
}

DensityTable posterior_mean_density_serial(const PosteriorDraws& draws, std::span<const double> x_nodes,
                                           std::span<const double> y_axis) {
    DensityTable t = prepare_posterior(draws, x_nodes, y_axis);
    const std::size_t K = t.y_count();
    for (std::size_t m = 0; m < t.x_count(); ++m) posterior_row(draws, t, m, t.values.data() + m * K);
    return t;
}

DensityTable tabulate(const ConditionalDensity& f, std::size_t d_x, std::size_t d_y,
                      std::span<const double> x_nodes, std::span<const double> y_axis) {
    DensityTable t = empty_table(check_grid(d_x, d_y, x_nodes, y_axis), x_nodes, y_axis);
    const long M = static_cast<long>(t.x_count());
#pragma omp parallel for schedule(dynamic)
    for (long m = 0; m < M; ++m) tabulate_row(f, t, static_cast<std::size_t>(m));
    return t;
}

DensityTable tabulate_serial(const ConditionalDensity& f, std::size_t d_x, std::size_t d_y,
                             std::span<const double> x_nodes, std::span<const double> y_axis) {
    DensityTable t = empty_table(check_grid(d_x, d_y, x_nodes, y_axis), x_nodes, y_axis);
    for (std::size_t m = 0; m < t.x_count(); ++m) tabulate_row(f, t, m);
    return t;
}

std::vector<RowDiscrepancy> row_discrepancies(const DensityTable& a, const DensityTable& b) {
    check_pair(a, b);
    std::vector<RowDiscrepancy> rows(a.x_count());
    const long M = static_cast<long>(rows.size());
#pragma omp parallel for schedule(static)
    for (long m = 0; m < M; ++m) rows[static_cast<std::size_t>(m)] = discrepancy_row(a, b, static_cast<std::size_t>(m));
    return rows;
}

std::vector<RowDiscrepancy> row_discrepancies_serial(const DensityTable& a, const DensityTable& b) {
    check_pair(a, b);
    std::vector<RowDiscrepancy> rows(a.x_count());
    for (std::size_t m = 0; m < rows.size(); ++m) rows[m] = discrepancy_row(a, b, m);
    return rows;
}

} // namespace condense
