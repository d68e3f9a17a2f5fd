#include "condense/simulation.hpp"

#include "condense/distributions.hpp"
#include "condense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace condense {

namespace {

constexpr double kT1Noise = 0.3;
constexpr double kFdStep = 1e-4;

double gauss(double y, double mean, double sd) { return std::exp(log_normal_pdf_1d(y, mean, sd)); }

double sine_mean(double x1) { return std::sin(2.0 * std::numbers::pi * x1); }

void check_cube(const TruthSpec& t, std::span<const double> x) {
    if (x.size() != t.d_x) throw DomainError("covariate dimension does not match the truth");
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("covariate outside the unit cube");
    }
}

double euclid(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

// Nested central differences along the coordinates in `dims`.
double derivative(const ScalarField& f, std::vector<double>& z, std::span<const unsigned> dims, double h) {
    if (dims.empty()) return f(z);
    const unsigned k = dims.front();
    const double keep = z[k];
    z[k] = keep + h;
    const double up = derivative(f, z, dims.subspan(1), h);
    z[k] = keep - h;
    const double down = derivative(f, z, dims.subspan(1), h);
    z[k] = keep;
    return (up - down) / (2.0 * h);
}

// Non-decreasing coordinate sequences of length r over d coordinates; each is
// one mixed partial D^k.
void enumerate_indices(std::size_t d, unsigned r, unsigned start, std::vector<unsigned>& cur,
                       std::vector<std::vector<unsigned>>& out) {
    if (cur.size() == r) {
        out.push_back(cur);
        return;
    }
    for (unsigned k = start; k < d; ++k) {
        cur.push_back(k);
        enumerate_indices(d, r, k, cur, out);
        cur.pop_back();
    }
}

} // namespace

std::string to_string(TruthFamily f) {
    switch (f) {
    case TruthFamily::T1_sine_gaussian: return "T1_sine_gaussian";
    case TruthFamily::T2_xmix: return "T2_xmix";
    case TruthFamily::T3_irrelevant: return "T3_irrelevant";
    case TruthFamily::custom: return "custom";
    }
    return "custom";
}

TruthFamily truth_family_from_string(const std::string& name) {
    if (name == "T1" || name == "T1_sine_gaussian") return TruthFamily::T1_sine_gaussian;
    if (name == "T2" || name == "T2_xmix") return TruthFamily::T2_xmix;
    if (name == "T3" || name == "T3_irrelevant") return TruthFamily::T3_irrelevant;
    if (name == "custom") return TruthFamily::custom;
    throw ConfigError("unknown truth family '" + name + "'");
}

void TruthSpec::validate() const {
    if (d_x == 0) throw ConfigError("truth needs d_x >= 1");
    if (d_y != 1) throw ConfigError("built-in truths have a scalar response");
    if (relevant_dims > d_x) throw ConfigError("relevant_dims exceeds d_x");
    if (family == TruthFamily::T3_irrelevant && d_x < 2) throw ConfigError("T3 needs d_x >= 2");
    if (family == TruthFamily::custom) {
        if (!(custom.noise_sd > 0.0)) throw ConfigError("custom truth needs noise_sd > 0");
        if (relevant_dims > 1) throw ConfigError("custom truth depends on at most x1");
    }
}

TruthSpec make_truth(TruthFamily family) {
    TruthSpec t;
    t.family = family;
    switch (family) {
    case TruthFamily::T1_sine_gaussian:
        t.d_x = 1;
        t.relevant_dims = 1;
        break;
    case TruthFamily::T2_xmix:
        t.d_x = 1;
        t.relevant_dims = 1;
        t.tail_b0 = 0.5;
        break;
    case TruthFamily::T3_irrelevant:
        t.d_x = 3;
        t.relevant_dims = 1;
        break;
    case TruthFamily::custom:
        t.d_x = 1;
        t.relevant_dims = 1;
        break;
    }
    if (family == TruthFamily::custom) {
        // f0 <= exp(-(|y| - A)^2 / 2 s^2) / (s sqrt(2 pi)), A = |offset| + |amplitude|
        const double a = std::abs(t.custom.offset) + std::abs(t.custom.amplitude);
        const double s = t.custom.noise_sd;
        t.tail_b0 = a < 3.0 ? 0.5 * (3.0 - a) * (3.0 - a) / (9.0 * 2.0 * s * s) : 0.0;
        t.tail_const = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi)) + 1.0;
    }
    return t;
}

TruthSpec make_independent_truth(std::size_t d_x) {
    TruthSpec t = make_truth(TruthFamily::custom);
    t.d_x = d_x;
    t.relevant_dims = 0;
    t.custom = {0.0, 0.0, 0.5};
    t.tail_b0 = 0.5 * 9.0 / (9.0 * 2.0 * 0.25);
    t.tail_const = 1.0 / (0.5 * std::sqrt(2.0 * std::numbers::pi)) + 1.0;
    return t;
}

double truth_density(const TruthSpec& truth, std::span<const double> x, std::span<const double> y) {
    check_cube(truth, x);
    if (y.size() != 1) throw DomainError("built-in truths have a scalar response");
    const double v = y[0];
    switch (truth.family) {
    case TruthFamily::T1_sine_gaussian:
    case TruthFamily::T3_irrelevant:
        return gauss(v, sine_mean(x[0]), kT1Noise);
    case TruthFamily::T2_xmix:
        return 0.5 * gauss(v, -1.0 + x[0], 0.25) + 0.5 * gauss(v, 1.0 - x[0], 0.5);
    case TruthFamily::custom: {
        const double shift = truth.relevant_dims > 0 ? truth.custom.amplitude * sine_mean(x[0]) : 0.0;
        return gauss(v, truth.custom.offset + shift, truth.custom.noise_sd);
    }
    }
    return 0.0;
}

double sample_truth_response(const TruthSpec& truth, std::span<const double> x, RngStream& rng) {
    check_cube(truth, x);
    switch (truth.family) {
    case TruthFamily::T1_sine_gaussian:
    case TruthFamily::T3_irrelevant:
        return sine_mean(x[0]) + kT1Noise * rng.normal();
    case TruthFamily::T2_xmix:
        if (rng.uniform() < 0.5) return -1.0 + x[0] + 0.25 * rng.normal();
        return 1.0 - x[0] + 0.5 * rng.normal();
    case TruthFamily::custom: {
        const double shift = truth.relevant_dims > 0 ? truth.custom.amplitude * sine_mean(x[0]) : 0.0;
        return truth.custom.offset + shift + truth.custom.noise_sd * rng.normal();
    }
    }
    return 0.0;
}

double design_density(const TruthSpec& truth, std::span<const double> x) {
    if (x.size() != truth.d_x) throw DomainError("covariate dimension does not match the truth");
    for (double v : x) {
        if (v < 0.0 || v > 1.0) return 0.0;
    }
    return 1.0;
}

Dataset generate_dataset(const TruthSpec& truth, std::size_t n, RngStream& rng) {
    truth.validate();
    if (n == 0) throw DomainError("dataset size must be positive");
    Dataset data;
    data.d_x = truth.d_x;
    data.d_y = truth.d_y;
    data.x.reserve(n * truth.d_x);
    data.y.reserve(n);
    std::vector<double> x(truth.d_x);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : x) v = rng.uniform();
        const double y = sample_truth_response(truth, x, rng);
        data.push_back(x, std::span<const double>(&y, 1));
    }
    return data;
}

nlohmann::json to_json(const TruthSpec& truth) {
    nlohmann::json j = {{"family", to_string(truth.family)},
                        {"d_x", truth.d_x},
                        {"d_y", truth.d_y},
                        {"relevant_dims", truth.relevant_dims},
                        {"design", "uniform_cube"},
                        {"tail", {{"B0", truth.tail_b0}, {"tau", truth.tail_exponent}, {"C", truth.tail_const}}}};
    if (truth.family == TruthFamily::custom) {
        j["params"] = {{"offset", truth.custom.offset},
                       {"amplitude", truth.custom.amplitude},
                       {"noise_sd", truth.custom.noise_sd}};
    }
    return j;
}

unsigned holder_order(double beta) {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    return static_cast<unsigned>(std::ceil(beta) - 1.0);
}

HolderReport holder_check(const ScalarField& f, double beta, const Envelope& envelope, double tau_env,
                          std::span<const HolderProbe> probes) {
    const unsigned order = holder_order(beta);
    if (order > 3) throw DomainError("derivative orders above 3 are not supported");
    if (tau_env < 0.0) throw DomainError("tau must be non-negative");
    if (probes.empty()) throw DomainError("holder_check needs probes");
    const std::size_t d = probes.front().z.size();
    const double exponent = beta - static_cast<double>(order);

    std::vector<std::vector<unsigned>> indices;
    std::vector<unsigned> cur;
    enumerate_indices(d, order, 0, cur, indices);

    HolderReport report;
    bool have_worst = false;
    double worst_signal = 0.0, worst_noise = 0.0;
    std::vector<double> a(d), b(d);
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto& probe = probes[p];
        if (probe.z.size() != d || probe.delta.size() != d) throw DomainError("probe dimension mismatch");
        const double norm = euclid(probe.delta);
        if (!(norm >= 1e-3 - 1e-15 && norm <= 1.0 + 1e-12)) throw DomainError("probe |delta| outside [1e-3, 1]");
        const double bound = envelope(probe.z) * std::exp(tau_env * norm * norm) * std::pow(norm, exponent);
        for (const auto& idx : indices) {
            a = probe.z;
            for (std::size_t k = 0; k < d; ++k) b[k] = probe.z[k] + probe.delta[k];
            const double da = derivative(f, a, idx, kFdStep);
            const double db = derivative(f, b, idx, kFdStep);
            const double signal = std::abs(db - da);
            const double ratio = bound > 0.0 ? signal / bound : (signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (!have_worst || ratio > report.max_ratio) {
                have_worst = true;
                report.max_ratio = ratio;
                report.worst_probe = p;
                report.worst_multi_index = idx;
                // step-doubling discrepancy plus round-off as the noise level
                const double da2 = derivative(f, a, idx, 2.0 * kFdStep);
                const double db2 = derivative(f, b, idx, 2.0 * kFdStep);
                const double scale = std::abs(f(probe.z)) + std::abs(f(b)) + 1e-300;
                const double roundoff =
                    order == 0 ? 0.0 : 1e-16 * scale * std::pow(2.0 / kFdStep, static_cast<double>(order));
                worst_noise = std::abs(da - da2) + std::abs(db - db2) + roundoff;
                worst_signal = signal;
            }
        }
    }
    report.inconclusive = order > 0 && worst_noise > worst_signal;
    report.pass = report.max_ratio <= 1.0 + 1e-2;
    return report;
}

std::vector<HolderProbe> random_probes(std::size_t d, std::size_t count, std::span<const double> lo,
                                       std::span<const double> hi, RngStream& rng) {
    if (lo.size() != d || hi.size() != d) throw DomainError("probe box dimension mismatch");
    std::vector<HolderProbe> out;
    out.reserve(count);
    while (out.size() < count) {
        HolderProbe p;
        p.z.resize(d);
        p.delta.resize(d);
        const double norm = std::exp(std::log(1e-3) * rng.uniform());
        double len = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            p.delta[k] = rng.normal();
            len += p.delta[k] * p.delta[k];
        }
        len = std::sqrt(len);
        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
            p.delta[k] *= norm / len;
            const double lo_k = std::max(lo[k], lo[k] - p.delta[k]);
            const double hi_k = std::min(hi[k], hi[k] - p.delta[k]);
            if (!(lo_k < hi_k)) {
                inside = false;
                break;
            }
            p.z[k] = lo_k + (hi_k - lo_k) * rng.uniform();
        }
        if (inside) out.push_back(std::move(p));
    }
    return out;
}

} // namespace condense
