#pragma once

#include "condense/inference.hpp"

#include "json.hpp"

#include <iosfwd>

namespace condense {

// One line of draws.jsonl: {sticks, weights, mu_x, mu_y, sigma, iteration, log_posterior}.
// mu_x / mu_y are arrays of per-atom coordinate arrays.
nlohmann::json state_to_json(const MixtureState& state);
MixtureState state_from_json(const nlohmann::json& j);

void write_draws_jsonl(std::ostream& out, const PosteriorDraws& draws);
// Reads states, iterations and log posteriors; throws ParseError with the line number.
PosteriorDraws read_draws_jsonl(std::istream& in);

nlohmann::json to_json(const ChainConfig& config);
ChainConfig chain_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ChainCheckpoint& checkpoint);
ChainCheckpoint checkpoint_from_json(const nlohmann::json& j);

// acceptance rates, ESS, final scales, mode, gamma_used
nlohmann::json diagnostics_json(const PosteriorDraws& draws);

} // namespace condense
