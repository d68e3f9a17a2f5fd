#pragma once

#include "condense/dataset.hpp"
#include "condense/model.hpp"
#include "condense/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace condense {

// conditional_likelihood targets the model for f(y|x) only, with the design
// density left unmodelled; the normaliser g(x_i) enters every Metropolis
// ratio. joint_fit treats (x, y) as a d-dimensional Gaussian mixture, which
// makes the stick and covariate-atom updates conjugate.
enum class LikelihoodMode { conditional_likelihood, joint_fit };

std::string to_string(LikelihoodMode mode);
LikelihoodMode likelihood_mode_from_string(const std::string& name);

struct ProposalScales {
    double log_sigma_step = 0.1;
    double mu_x_step = 0.05;
    double stick_logit_step = 0.5;

    bool operator==(const ProposalScales&) const = default;
};

struct ChainConfig {
    std::size_t iterations = 20000;
    std::size_t burn_in = 5000;
    std::size_t thin = 10;
    LikelihoodMode mode = LikelihoodMode::conditional_likelihood;
    ProposalScales proposal_scales;
    bool adapt_burnin = true;
    std::uint64_t seed = 1;
    // Wall-clock limit for one chain; 0 disables it.
    double timeout_seconds = 0.0;
    std::size_t min_retained = 100;

    std::size_t retained() const;
    void validate() const;
};

struct AcceptanceRates {
    double sigma = 0.0;
    double mu_x = 0.0;
    double sticks = 0.0;
};

struct PosteriorDraws {
    std::vector<MixtureState> draws;
    std::vector<std::size_t> iterations;
    std::vector<double> log_posterior;
    AcceptanceRates acceptance_rates;
    ProposalScales final_scales;
    double ess_sigma = 0.0;
    LikelihoodMode mode = LikelihoodMode::conditional_likelihood;
    HyperParams gamma_used;
};

// Latent component indicators, 0-based. Both modes share the same full
// conditional: P(s_i = j) is proportional to p_j phi(x_i - mu_j^x) phi(y_i - mu_j^y).
std::vector<std::size_t> sample_allocations(const MixtureState& state, const Dataset& data,
                                            RngStream& rng);

// Conjugate Gaussian draw of every response atom given the allocations.
std::vector<double> update_mu_y(const MixtureState& state, std::span<const std::size_t> allocations,
                                const Dataset& data, const HyperParams& gamma, RngStream& rng);

// Joint-mode stick update: V_j ~ Beta(1 + n_j, c0 + sum_{l>j} n_l), V_N = 1.
std::vector<double> sample_sticks_conjugate(std::span<const std::size_t> counts, double c0, RngStream& rng);

// Per-component allocation counts.
std::vector<std::size_t> allocation_counts(std::span<const std::size_t> allocations,
                                           std::size_t components);

// One full update: allocations, mu_y, mu_x, sticks, sigma.
MixtureState gibbs_sweep(const MixtureState& state, const Dataset& data, const PriorConfig& prior,
                         const ChainConfig& config, RngStream& rng);

// Unnormalised log posterior of a state under the mode's likelihood.
double log_posterior(const MixtureState& state, const Dataset& data, const PriorConfig& prior,
                     LikelihoodMode mode);

// Enough to continue a chain bit-identically.
struct ChainCheckpoint {
    MixtureState state;
    std::string rng_state;
    std::size_t next_iteration = 0;
    ProposalScales scales;
    std::vector<std::size_t> accepted;  // sigma, mu_x, sticks (post burn-in)
    std::vector<std::size_t> proposed;
    std::vector<std::size_t> batch_accepted;
    std::vector<std::size_t> batch_proposed;
};

class Sampler;

// Drives one chain. Draws are retained at iterations i >= burn_in with
// (i - burn_in) % thin == 0.
class ChainRunner {
public:
    ChainRunner(const Dataset& data, const PriorConfig& prior, const ChainConfig& config);
    // Resume from a checkpoint; `so_far` holds the draws retained before it.
    ChainRunner(const Dataset& data, const PriorConfig& prior, const ChainConfig& config,
                const ChainCheckpoint& checkpoint, PosteriorDraws so_far);
    ~ChainRunner();
    ChainRunner(const ChainRunner&) = delete;
    ChainRunner& operator=(const ChainRunner&) = delete;

    // Advance until `iteration` sweeps have been completed (capped at config.iterations).
    void run_until(std::size_t iteration);
    std::size_t completed() const { return next_iteration_; }

    ChainCheckpoint checkpoint() const;
    // Final draws with acceptance rates and ESS filled in.
    PosteriorDraws finish() const;
    const PosteriorDraws& retained() const { return draws_; }

private:
    void step();

    const Dataset& data_;
    PriorConfig prior_;
    ChainConfig config_;
    RngStream rng_;
    std::unique_ptr<Sampler> sampler_;
    std::size_t next_iteration_ = 0;
    std::vector<std::size_t> accepted_, proposed_;
    std::vector<std::size_t> batch_accepted_, batch_proposed_;
    PosteriorDraws draws_;
};

PosteriorDraws run_chain(const Dataset& data, const PriorConfig& prior, const ChainConfig& config);

// Initial positive sequence ESS estimate.
double effective_sample_size(std::span<const double> trace);

} // namespace condense
