#include "condense/empirical_bayes.hpp"

#include "condense/errors.hpp"

#include <cmath>
#include <numbers>

namespace condense {

namespace {

constexpr double kInset = 1e-9;

double project(double v, double lo, double hi, bool& moved) {
    moved = false;
    if (v < lo) {
        moved = true;
        return lo + kInset;
    }
    if (v >= hi) {
        moved = true;
        return hi - kInset;
    }
    return v;
}

} // namespace

bool EBReport::any_clamped() const {
    if (beta_clamped || tau2_clamped) return true;
    for (bool f : lambda_clamped) {
        if (f) return true;
    }
    return false;
}

HyperParams estimate_hyperparams(const Dataset& data, double alpha_shape) {
    if (!(alpha_shape > 1.0)) throw DomainError("alpha_shape must exceed 1");
    const std::size_t n = data.size();
    if (n < 2) throw InsufficientDataError("need at least 2 observations, found " + std::to_string(n));

    const std::size_t dy = data.d_y;
    std::vector<double> mean(dy, 0.0), var(dy, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto yi = data.y_row(i);
        for (std::size_t k = 0; k < dy; ++k) mean[k] += yi[k];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto yi = data.y_row(i);
        for (std::size_t k = 0; k < dy; ++k) {
            const double d = yi[k] - mean[k];
            var[k] += d * d;
        }
    }
    double pooled = 0.0;
    for (double& v : var) {
        v /= static_cast<double>(n - 1);
        if (!(v > 0.0)) throw DegenerateDataError("response has zero sample variance");
        pooled += v;
    }
    pooled /= static_cast<double>(dy);

    const double d = static_cast<double>(data.d_x + data.d_y);
    const double bandwidth =
        1.06 * std::sqrt(pooled) * std::pow(static_cast<double>(n), -1.0 / (d + 4.0));

    HyperParams g;
    g.lambda = mean;
    g.tau2 = pooled;
    g.beta_scale = (alpha_shape - 1.0) * bandwidth;
    return g;
}

KnBox default_kn_box(std::size_t n, std::size_t d_y, const KnBoxConstants& constants) {
    if (n < 2) throw InsufficientDataError("K_n box needs n >= 2");
    if (d_y == 0) throw DomainError("d_y must be positive");
    return kn_box_at(std::log(static_cast<double>(n) + std::numbers::e), constants);
}

KnBox kn_box_at(double ln, const KnBoxConstants& constants) {
    if (!(ln > 1.0)) throw DomainError("log(n + e) must exceed 1");
    KnBox box;
    box.b_lo = std::pow(ln, -constants.b_exponent);
    box.b_hi = std::pow(ln, constants.b_exponent);
    box.l_hi = constants.c_l * std::sqrt(ln);
    box.l_lo = -box.l_hi;
    box.t2_lo = std::pow(ln, -constants.t2_lo_exponent);
    box.t2_hi = std::pow(ln, constants.t2_hi_exponent);
    box.validate();
    return box;
}

EBReport clamp_to_kn(const HyperParams& gamma, const KnBox& kn) {
    gamma.validate();
    kn.validate();
    EBReport r;
    r.raw_gamma = gamma;
    r.kn = kn;
    r.clamped_gamma = gamma;
    r.clamped_gamma.beta_scale = project(gamma.beta_scale, kn.b_lo, kn.b_hi, r.beta_clamped);
    r.clamped_gamma.tau2 = project(gamma.tau2, kn.t2_lo, kn.t2_hi, r.tau2_clamped);
    r.lambda_clamped.resize(gamma.lambda.size());
    for (std::size_t k = 0; k < gamma.lambda.size(); ++k) {
        bool moved = false;
        r.clamped_gamma.lambda[k] = project(gamma.lambda[k], kn.l_lo, kn.l_hi, moved);
        r.lambda_clamped[k] = moved;
    }
    return r;
}

nlohmann::json to_json(const HyperParams& g) {
    return {{"beta", g.beta_scale}, {"lambda", g.lambda}, {"tau2", g.tau2}};
}

nlohmann::json to_json(const KnBox& kn) {
    return {{"beta", {kn.b_lo, kn.b_hi}}, {"lambda", {kn.l_lo, kn.l_hi}}, {"tau2", {kn.t2_lo, kn.t2_hi}}};
}

nlohmann::json to_json(const EBReport& report) {
    nlohmann::json flags = {{"beta", report.beta_clamped},
                            {"lambda", report.lambda_clamped},
                            {"tau2", report.tau2_clamped}};
    return {{"raw", to_json(report.raw_gamma)},
            {"clamped", to_json(report.clamped_gamma)},
            {"box", to_json(report.kn)},
            {"flags", flags}};
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
    HyperParams g;
    g.beta_scale = j.at("beta").get<double>();
    g.lambda = j.at("lambda").get<std::vector<double>>();
    g.tau2 = j.at("tau2").get<double>();
    return g;
}

} // namespace condense
