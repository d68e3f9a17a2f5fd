#include "condense/model.hpp"

#include "condense/distributions.hpp"
#include "condense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace condense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_kernel(std::span<const double> z, std::span<const double> mean, double sigma) {
    double ss = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = z[k] - mean[k];
        ss += d * d;
    }
    const double k = static_cast<double>(z.size());
    return -0.5 * k * std::log(2.0 * std::numbers::pi * sigma * sigma) - ss / (2.0 * sigma * sigma);
}

void check_point(const MixtureState& s, std::span<const double> x, std::span<const double> y) {
    if (x.size() != s.d_x || y.size() != s.d_y) {
        throw DomainError("point dimension does not match the state");
    }
}

} // namespace

void HyperParams::validate() const {
    if (!(beta_scale > 0.0) || !std::isfinite(beta_scale)) throw DomainError("beta_scale must be > 0");
    if (!(tau2 > 0.0) || !std::isfinite(tau2)) throw DomainError("tau2 must be > 0");
    if (lambda.empty()) throw DomainError("lambda must have d_y components");
    for (double l : lambda) {
        if (!std::isfinite(l)) throw DomainError("lambda must be finite");
    }
}

void PriorConfig::validate() const {
    if (!(alpha_shape > 1.0)) throw DomainError("alpha_shape must exceed 1");
    if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
    if (d_x == 0 || d_y == 0) throw DomainError("d_x and d_y must be positive");
    if (truncation < 2) throw DomainError("truncation must be at least 2");
    gamma.validate();
    if (gamma.lambda.size() != d_y) throw DomainError("lambda length must equal d_y");
}

std::size_t PriorConfig::default_truncation(double c0, double tail) {
    if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
    const double r = c0 / (1.0 + c0);
    std::size_t n = 2;
    while (std::pow(r, static_cast<double>(n - 1)) >= tail) ++n;
    return n;
}

void MixtureState::validate() const {
    const std::size_t n = sticks.size();
    if (n == 0) throw DomainError("state has no atoms");
    if (weights.size() != n || mu_x.size() != n * d_x || mu_y.size() != n * d_y) {
        throw DomainError("state arrays have inconsistent sizes");
    }
    for (double v : sticks) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("stick outside [0, 1]");
    }
    if (sticks.back() != 1.0) throw DomainError("last stick must equal 1");
    double total = 0.0;
    for (double p : weights) {
        if (!(p >= 0.0)) throw DomainError("negative weight");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("weights do not sum to 1");
    for (double m : mu_x) {
        if (!(m >= 0.0 && m <= 1.0)) throw DomainError("covariate atom outside the unit cube");
    }
    for (double m : mu_y) {
        if (!std::isfinite(m)) throw DomainError("response atom not finite");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
}

MixtureState make_state(std::vector<double> sticks, std::vector<double> mu_x,
                        std::vector<double> mu_y, double sigma, std::size_t d_x, std::size_t d_y) {
    MixtureState s;
    s.d_x = d_x;
    s.d_y = d_y;
    s.weights = stick_break(sticks);
    s.sticks = std::move(sticks);
    s.mu_x = std::move(mu_x);
    s.mu_y = std::move(mu_y);
    s.sigma = sigma;
    s.validate();
    return s;
}

void KnBox::validate() const {
    if (!(b_lo > 0.0 && b_lo < b_hi)) throw DomainError("need 0 < b_lo < b_hi");
    if (!(l_lo < l_hi)) throw DomainError("need l_lo < l_hi");
    if (!(t2_lo > 0.0 && t2_lo < t2_hi)) throw DomainError("need 0 < t2_lo < t2_hi");
}

bool KnBox::contains(const HyperParams& g) const {
    if (!(g.beta_scale >= b_lo && g.beta_scale < b_hi)) return false;
    if (!(g.tau2 >= t2_lo && g.tau2 < t2_hi)) return false;
    return std::all_of(g.lambda.begin(), g.lambda.end(),
                       [&](double l) { return l >= l_lo && l < l_hi; });
}

std::vector<double> stick_break(std::span<const double> sticks) {
    if (sticks.empty()) throw DomainError("no sticks");
    for (double v : sticks) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("stick outside [0, 1]");
    }
    if (sticks.back() != 1.0) throw DomainError("last stick must equal 1");
    std::vector<double> p(sticks.size());
    double remaining = 1.0;
    for (std::size_t j = 0; j < sticks.size(); ++j) {
        p[j] = sticks[j] * remaining;
        remaining *= 1.0 - sticks[j];
    }
    return p;
}

double PredictorWeights::normalizer() const { return std::exp(log_normalizer); }

PredictorWeights predictor_weights(const MixtureState& state, std::span<const double> x) {
    if (x.size() != state.d_x) throw DomainError("covariate dimension mismatch");
    const std::size_t n = state.size();
    std::vector<double> logw(n, kNegInf);
    for (std::size_t j = 0; j < n; ++j) {
        if (state.weights[j] > 0.0) {
            logw[j] = std::log(state.weights[j]) + log_kernel(x, state.atom_x(j), state.sigma);
        }
    }
    PredictorWeights out;
    out.log_normalizer = log_sum_exp(logw);
    out.weights.resize(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.weights[j] = std::exp(logw[j] - out.log_normalizer);
        total += out.weights[j];
    }
    for (double& w : out.weights) w /= total;
    return out;
}

double log_joint_density(const MixtureState& state, std::span<const double> x,
                         std::span<const double> y) {
    check_point(state, x, y);
    const std::size_t n = state.size();
    std::vector<double> terms(n, kNegInf);
    for (std::size_t j = 0; j < n; ++j) {
        if (state.weights[j] > 0.0) {
            terms[j] = std::log(state.weights[j]) + log_kernel(x, state.atom_x(j), state.sigma) +
                       log_kernel(y, state.atom_y(j), state.sigma);
        }
    }
    return log_sum_exp(terms);
}

double joint_density(const MixtureState& state, std::span<const double> x,
                     std::span<const double> y) {
    return std::exp(log_joint_density(state, x, y));
}

double log_conditional_density(const MixtureState& state, std::span<const double> x,
                               std::span<const double> y) {
    check_point(state, x, y);
    const std::size_t n = state.size();
    std::vector<double> gx(n, kNegInf), joint(n, kNegInf);
    for (std::size_t j = 0; j < n; ++j) {
        if (state.weights[j] > 0.0) {
            gx[j] = std::log(state.weights[j]) + log_kernel(x, state.atom_x(j), state.sigma);
            joint[j] = gx[j] + log_kernel(y, state.atom_y(j), state.sigma);
        }
    }
    return log_sum_exp(joint) - log_sum_exp(gx);
}

double conditional_density(const MixtureState& state, std::span<const double> x,
                           std::span<const double> y) {
    return std::exp(log_conditional_density(state, x, y));
}

MixtureState sample_prior_state(const PriorConfig& prior, RngStream& rng) {
    prior.validate();
    const std::size_t n = prior.truncation;
    std::vector<double> sticks(n);
    for (std::size_t j = 0; j + 1 < n; ++j) sticks[j] = sample_beta(1.0, prior.c0, rng);
    sticks[n - 1] = 1.0;

    std::vector<double> mu_x(n * prior.d_x);
    for (double& m : mu_x) m = rng.uniform();

    const double tau = std::sqrt(prior.gamma.tau2);
    std::vector<double> mu_y(n * prior.d_y);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < prior.d_y; ++k) {
            mu_y[j * prior.d_y + k] = prior.gamma.lambda[k] + tau * rng.normal();
        }
    }
    const double sigma = sample_inverse_gamma(prior.alpha_shape, prior.gamma.beta_scale, rng);
    return make_state(std::move(sticks), std::move(mu_x), std::move(mu_y), sigma, prior.d_x,
                      prior.d_y);
}

MixtureState psi_transform(const MixtureState& state, const HyperParams& gamma_src,
                           const HyperParams& gamma_dst) {
    gamma_src.validate();
    gamma_dst.validate();
    if (gamma_src.lambda.size() != state.d_y || gamma_dst.lambda.size() != state.d_y) {
        throw DomainError("lambda length must equal d_y");
    }
    if (gamma_src == gamma_dst) return state;

    MixtureState out = state;
    out.sigma = (gamma_dst.beta_scale / gamma_src.beta_scale) * state.sigma;
    const double rho = std::sqrt(gamma_dst.tau2 / gamma_src.tau2);
    for (std::size_t j = 0; j < state.size(); ++j) {
        for (std::size_t k = 0; k < state.d_y; ++k) {
            const double zeta = state.mu_y[j * state.d_y + k] - gamma_src.lambda[k];
            out.mu_y[j * state.d_y + k] = gamma_dst.lambda[k] + rho * zeta;
        }
    }
    return out;
}

} // namespace condense
