#pragma once

#include "condense/empirical_bayes.hpp"
#include "condense/inference.hpp"
#include "condense/simulation.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace condense {

struct PriorSettings {
    double alpha_shape = 3.0;
    // DP mass; the default truncation grows with it (24 atoms at c0 = 2)
    double c0 = 2.0;
    std::size_t truncation = 0;  // 0 selects PriorConfig::default_truncation(c0)
    KnBoxConstants box;
    // When set, EB estimation is skipped and these hyper-parameters are used.
    std::optional<HyperParams> fixed_gamma;
};

struct GridSettings {
    std::size_t x_points = 0;        // per covariate dimension; 0 = 21 / 11 / 5 for d_x = 1 / 2 / >= 3
    std::size_t y_points = 201;      // per response dimension
    double y_margin_sigmas = 6.0;    // data range extended by this many max posterior sigmas
};

struct StudySettings {
    std::vector<std::size_t> n_grid = {200, 500, 1000, 2000};
    std::size_t replicates = 5;
    double beta_assumed = 2.0;
    std::size_t workers = 1;
    double max_failure_fraction = 0.2;
    // evaluation quadrature for errors against the truth
    std::size_t eval_x_points = 50;   // midpoint grid for d_x = 1
    std::size_t eval_mc_points = 200; // Monte Carlo design points for d_x > 1
    std::size_t eval_y_points = 401;
    // dimred pairing
    std::string base_truth = "T1";
    std::string embedded_truth = "T3";
};

// Parsed configuration file with flat sections [data], [truth], [prior],
// [chain], [grid], [study]. Unknown keys are rejected.
struct RunConfig {
    std::size_t d_x = 1;
    std::size_t d_y = 1;
    TruthSpec truth;
    PriorSettings prior;
    ChainConfig chain;
    GridSettings grid;
    StudySettings study;

    // Canonical JSON rendering; the config hash is computed from it.
    nlohmann::json to_json() const;
    std::string hash() const;
};

RunConfig default_run_config();
// Throws ConfigError (exit 4) on bad values, ParseError on unreadable files.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

// Prior for a dataset with the given EB (or fixed) hyper-parameters.
PriorConfig make_prior(const RunConfig& config, const HyperParams& gamma);

} // namespace condense
