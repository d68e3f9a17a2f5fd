#pragma once

#include "condense/dataset.hpp"
#include "condense/rng.hpp"

#include "json.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace condense {

enum class TruthFamily { T1_sine_gaussian, T2_xmix, T3_irrelevant, custom };

std::string to_string(TruthFamily f);
TruthFamily truth_family_from_string(const std::string& name);

// Parameters of the `custom` family: y ~ N(offset + amplitude * sin(2 pi x_1), noise_sd^2),
// with x_1 ignored when relevant_dims == 0.
struct CustomTruthParams {
    double offset = 0.0;
    double amplitude = 1.0;
    double noise_sd = 0.3;
};

// Ground-truth conditional density f0(y|x) under a uniform design on [0,1]^d_x.
// (tail_b0, tail_exponent, tail_const) declare f0(y|x) <= C exp(-B0 |y|^tau)
// for large |y|.
struct TruthSpec {
    TruthFamily family = TruthFamily::T1_sine_gaussian;
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    std::size_t relevant_dims = 1;
    CustomTruthParams custom;
    double tail_b0 = 1.0;
    double tail_exponent = 2.0;
    double tail_const = 2.0;

    void validate() const;
};

TruthSpec make_truth(TruthFamily family);
// Independent response, y ~ N(0, 0.5^2) for every x (no relevant covariates).
TruthSpec make_independent_truth(std::size_t d_x);

// Throws DomainError for x outside the unit cube.
double truth_density(const TruthSpec& truth, std::span<const double> x, std::span<const double> y);
double sample_truth_response(const TruthSpec& truth, std::span<const double> x, RngStream& rng);

// Design density q (uniform on the cube).
double design_density(const TruthSpec& truth, std::span<const double> x);

Dataset generate_dataset(const TruthSpec& truth, std::size_t n, RngStream& rng);

nlohmann::json to_json(const TruthSpec& truth);

// Probe for the local Hoelder envelope check: base point z and increment delta.
struct HolderProbe {
    std::vector<double> z;
    std::vector<double> delta;
};

struct HolderReport {
    double max_ratio = 0.0;
    std::size_t worst_probe = 0;
    // Mixed partial D^k with |k| = <beta> at the worst probe.
    std::vector<unsigned> worst_multi_index;
    bool pass = false;
    bool inconclusive = false;
};

using ScalarField = std::function<double(std::span<const double>)>;
using Envelope = std::function<double(std::span<const double>)>;

// Largest integer strictly below beta.
unsigned holder_order(double beta);

// max over probes and multi-indices of
// |D^k f(z + delta) - D^k f(z)| / (L(z) exp(tau |delta|^2) |delta|^(beta - <beta>)),
// with derivatives by central differences at step 1e-4. pass iff <= 1 + 1e-2.
HolderReport holder_check(const ScalarField& f, double beta, const Envelope& envelope, double tau_env,
                          std::span<const HolderProbe> probes);

// Uniform probes: z in [lo, hi]^d, |delta| log-uniform in [1e-3, 1], z + delta kept inside the box.
std::vector<HolderProbe> random_probes(std::size_t d, std::size_t count, std::span<const double> lo,
                                       std::span<const double> hi, RngStream& rng);

} // namespace condense
