#include "condense/draws_io.hpp"

#include "condense/empirical_bayes.hpp"
#include "condense/errors.hpp"

#include <istream>
#include <ostream>

namespace condense {

namespace {

nlohmann::json rows(const std::vector<double>& flat, std::size_t width) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t j = 0; j < flat.size() / width; ++j) {
        out.push_back(std::vector<double>(flat.begin() + static_cast<long>(j * width),
                                          flat.begin() + static_cast<long>((j + 1) * width)));
    }
    return out;
}

std::vector<double> flatten(const nlohmann::json& j, std::size_t& width) {
    std::vector<double> out;
    width = 0;
    for (const auto& row : j) {
        const auto v = row.get<std::vector<double>>();
        if (width == 0) width = v.size();
        if (v.size() != width || width == 0) throw ParseError("ragged atom coordinates");
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

nlohmann::json scales_json(const ProposalScales& s) {
    return {{"log_sigma_step", s.log_sigma_step}, {"mu_x_step", s.mu_x_step}, {"stick_logit_step", s.stick_logit_step}};
}

ProposalScales scales_from_json(const nlohmann::json& j) {
    ProposalScales s;
    s.log_sigma_step = j.at("log_sigma_step").get<double>();
    s.mu_x_step = j.at("mu_x_step").get<double>();
    s.stick_logit_step = j.at("stick_logit_step").get<double>();
    return s;
}

} // namespace

nlohmann::json state_to_json(const MixtureState& state) {
    return {{"sticks", state.sticks},
            {"weights", state.weights},
            {"mu_x", rows(state.mu_x, state.d_x)},
            {"mu_y", rows(state.mu_y, state.d_y)},
            {"sigma", state.sigma}};
}

MixtureState state_from_json(const nlohmann::json& j) {
    MixtureState s;
    s.sticks = j.at("sticks").get<std::vector<double>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    s.mu_x = flatten(j.at("mu_x"), s.d_x);
    s.mu_y = flatten(j.at("mu_y"), s.d_y);
    s.sigma = j.at("sigma").get<double>();
    s.validate();
    return s;
}

void write_draws_jsonl(std::ostream& out, const PosteriorDraws& draws) {
    for (std::size_t i = 0; i < draws.draws.size(); ++i) {
        nlohmann::json line = state_to_json(draws.draws[i]);
        line["iteration"] = draws.iterations.at(i);
        line["log_posterior"] = draws.log_posterior.at(i);
        out << line.dump() << '\n';
    }
}

PosteriorDraws read_draws_jsonl(std::istream& in) {
    PosteriorDraws out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.draws.push_back(state_from_json(j));
            out.iterations.push_back(j.at("iteration").get<std::size_t>());
            out.log_posterior.push_back(j.value("log_posterior", 0.0));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("draws line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DomainError& e) {
            throw ParseError("draws line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

nlohmann::json to_json(const ChainConfig& c) {
    return {{"iterations", c.iterations},
            {"burn_in", c.burn_in},
            {"thin", c.thin},
            {"mode", to_string(c.mode)},
            {"proposal_scales", scales_json(c.proposal_scales)},
            {"adapt_burnin", c.adapt_burnin},
            {"seed", c.seed},
            {"timeout_seconds", c.timeout_seconds}};
}

ChainConfig chain_config_from_json(const nlohmann::json& j) {
    ChainConfig c;
    c.iterations = j.at("iterations").get<std::size_t>();
    c.burn_in = j.at("burn_in").get<std::size_t>();
    c.thin = j.at("thin").get<std::size_t>();
    c.mode = likelihood_mode_from_string(j.at("mode").get<std::string>());
    c.proposal_scales = scales_from_json(j.at("proposal_scales"));
    c.adapt_burnin = j.at("adapt_burnin").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.timeout_seconds = j.value("timeout_seconds", 0.0);
    return c;
}

nlohmann::json to_json(const ChainCheckpoint& c) {
    return {{"state", state_to_json(c.state)},
            {"rng_state", c.rng_state},
            {"next_iteration", c.next_iteration},
            {"scales", scales_json(c.scales)},
            {"accepted", c.accepted},
            {"proposed", c.proposed},
            {"batch_accepted", c.batch_accepted},
            {"batch_proposed", c.batch_proposed}};
}

ChainCheckpoint checkpoint_from_json(const nlohmann::json& j) {
    ChainCheckpoint c;
    try {
        c.state = state_from_json(j.at("state"));
        c.rng_state = j.at("rng_state").get<std::string>();
        c.next_iteration = j.at("next_iteration").get<std::size_t>();
        c.scales = scales_from_json(j.at("scales"));
        c.accepted = j.at("accepted").get<std::vector<std::size_t>>();
        c.proposed = j.at("proposed").get<std::vector<std::size_t>>();
        c.batch_accepted = j.at("batch_accepted").get<std::vector<std::size_t>>();
        c.batch_proposed = j.at("batch_proposed").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    return c;
}

nlohmann::json diagnostics_json(const PosteriorDraws& draws) {
    return {{"acceptance_rates",
             {{"sigma", draws.acceptance_rates.sigma},
              {"mu_x", draws.acceptance_rates.mu_x},
              {"sticks", draws.acceptance_rates.sticks}}},
            {"ess_sigma", draws.ess_sigma},
            {"retained", draws.draws.size()},
            {"final_scales", scales_json(draws.final_scales)},
            {"mode", to_string(draws.mode)},
            {"gamma_used", to_json(draws.gamma_used)}};
}

} // namespace condense
