#pragma once

#include "condense/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace condense {

// EB-selectable prior hyper-parameters: IG scale for the bandwidth and
// location/squared scale of the response base measure.
struct HyperParams {
    double beta_scale = 1.0;
    std::vector<double> lambda;
    double tau2 = 1.0;

    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

// Fixed prior pieces. The covariate base measure is uniform on [0,1]^d_x and
// the response base measure is N(lambda, tau2 I).
struct PriorConfig {
    double alpha_shape = 3.0;
    double c0 = 1.0;
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::size_t truncation = 15;
    HyperParams gamma;

    void validate() const;

    // Smallest N >= 2 with (c0 / (1 + c0))^(N - 1) < tail.
    static std::size_t default_truncation(double c0, double tail = 1e-4);
};

// One draw of the mixing distribution and bandwidth. Atom coordinates are
// stored row-major: mu_x[j * d_x + k], mu_y[j * d_y + k].
struct MixtureState {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::vector<double> sticks;
    std::vector<double> weights;
    std::vector<double> mu_x;
    std::vector<double> mu_y;
    double sigma = 1.0;

    std::size_t size() const { return sticks.size(); }
    std::span<const double> atom_x(std::size_t j) const { return {mu_x.data() + j * d_x, d_x}; }
    std::span<const double> atom_y(std::size_t j) const { return {mu_y.data() + j * d_y, d_y}; }
    std::span<double> atom_x(std::size_t j) { return {mu_x.data() + j * d_x, d_x}; }
    std::span<double> atom_y(std::size_t j) { return {mu_y.data() + j * d_y, d_y}; }

    // Throws DomainError when an invariant is broken.
    void validate() const;

    bool operator==(const MixtureState&) const = default;
};

// Builds a state from sticks and atoms; weights are derived.
MixtureState make_state(std::vector<double> sticks, std::vector<double> mu_x,
                        std::vector<double> mu_y, double sigma, std::size_t d_x, std::size_t d_y);

// Box [b_lo, b_hi) x [l_lo, l_hi)^d_y x [t2_lo, t2_hi) for the EB estimate.
struct KnBox {
    double b_lo = 0.0, b_hi = 0.0;
    double l_lo = 0.0, l_hi = 0.0;
    double t2_lo = 0.0, t2_hi = 0.0;

    void validate() const;
    bool contains(const HyperParams& g) const;
};

// p_j = V_j prod_{h<j} (1 - V_h). The last stick must be exactly 1.
std::vector<double> stick_break(std::span<const double> sticks);

struct PredictorWeights {
    std::vector<double> weights;
    // log g(x) = log sum_q p_q phi_sigma(x - mu_q^x)
    double log_normalizer = 0.0;

    double normalizer() const;
};

// p_{j,sigma}(x) = p_j phi_sigma(x - mu_j^x) / g(x), evaluated with a max shift.
PredictorWeights predictor_weights(const MixtureState& state, std::span<const double> x);

double log_conditional_density(const MixtureState& state, std::span<const double> x,
                               std::span<const double> y);
double conditional_density(const MixtureState& state, std::span<const double> x,
                           std::span<const double> y);

// f(y|x) g(x) = sum_j p_j phi_sigma(x - mu_j^x) phi_sigma(y - mu_j^y)
double log_joint_density(const MixtureState& state, std::span<const double> x,
                         std::span<const double> y);
double joint_density(const MixtureState& state, std::span<const double> x,
                     std::span<const double> y);

MixtureState sample_prior_state(const PriorConfig& prior, RngStream& rng);

// Transports a draw under gamma_src to one distributed under gamma_dst:
// sigma scales by beta_dst / beta_src, centred response atoms are shifted to
// lambda_dst and scaled by sqrt(tau2_dst / tau2_src).
MixtureState psi_transform(const MixtureState& state, const HyperParams& gamma_src,
                           const HyperParams& gamma_dst);

} // namespace condense
